#include "vtrack/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vtrack/errors.hpp"

namespace vtrack {

using json = nlohmann::ordered_json;

namespace {

json point_json(Point2 p) { return json::array({p.x, p.y}); }

Point2 point_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

template <typename T, typename Parse>
std::vector<T> read_jsonl(const std::string& path, Parse parse) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<T> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse(line));
    } catch (const ParseError& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

template <typename T, typename Format>
void write_jsonl(const std::string& path, std::span<const T> items, Format format) {
  std::string text;
  for (const T& item : items) {
    text += format(item);
    text += '\n';
  }
  write_file(path, text);
}

// Runs `body`, turning JSON access errors into ParseError.
template <typename F>
auto parsing(F body) -> decltype(body()) {
  try {
    return body();
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
}

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
  if (!out.flush()) throw IoError("write failed for '" + path + "'");
}

// ---- scans ----

std::string scan_to_json(const Scan& scan) {
  json points = json::array();
  for (const ScanPoint& p : scan.points) {
    points.push_back({{"x", p.position.x},
                      {"y", p.position.y},
                      {"layer", p.layer},
                      {"range", p.range},
                      {"bearing", p.bearing}});
  }
  json j = {{"frame_id", scan.frame_id},
            {"timestamp", scan.timestamp},
            {"points", std::move(points)},
            {"labels", scan.labels}};
  return j.dump();
}

Scan scan_from_json(const std::string& line) {
  return parsing([&] {
    const json j = json::parse(line);
    Scan s;
    s.frame_id = j.at("frame_id").get<std::int64_t>();
    s.timestamp = j.at("timestamp").get<double>();
    for (const json& p : j.at("points")) {
      s.points.push_back({{p.at("x").get<double>(), p.at("y").get<double>()},
                          p.at("layer").get<int>(),
                          p.at("range").get<double>(),
                          p.at("bearing").get<double>()});
    }
    if (j.contains("labels")) s.labels = j.at("labels").get<std::vector<int>>();
    try {
      s.validate();
    } catch (const InvalidSpec& e) {
      throw ParseError(e.what());
    }
    return s;
  });
}

void write_scans(const std::string& path, std::span<const Scan> scans) {
  write_jsonl<Scan>(path, scans, scan_to_json);
}

std::vector<Scan> read_scans(const std::string& path) {
  return read_jsonl<Scan>(path, scan_from_json);
}

// ---- ground truth ----

std::string truth_to_json(const FrameTruth& frame) {
  json vehicles = json::array();
  for (const VehicleTruth& v : frame.vehicles) {
    json corners = json::array();
    for (const Point2& c : v.corners) corners.push_back(point_json(c));
    vehicles.push_back({{"id", v.id},
                        {"x", v.pose.x},
                        {"y", v.pose.y},
                        {"heading", v.pose.heading},
                        {"length", v.length},
                        {"width", v.width},
                        {"motion", to_string(v.motion)},
                        {"corners", std::move(corners)},
                        {"nearest_corner", v.nearest_corner_index},
                        {"num_points", v.num_points},
                        {"view", to_string(v.view)}});
  }
  json j = {{"frame_id", frame.frame_id},
            {"timestamp", frame.timestamp},
            {"vehicles", std::move(vehicles)}};
  return j.dump();
}

FrameTruth truth_from_json(const std::string& line) {
  return parsing([&] {
    const json j = json::parse(line);
    FrameTruth f;
    f.frame_id = j.at("frame_id").get<std::int64_t>();
    f.timestamp = j.at("timestamp").get<double>();
    for (const json& v : j.at("vehicles")) {
      VehicleTruth t;
      t.id = v.at("id").get<int>();
      t.pose = {v.at("x").get<double>(), v.at("y").get<double>(), v.at("heading").get<double>()};
      t.length = v.at("length").get<double>();
      t.width = v.at("width").get<double>();
      t.motion = model_from_string(v.at("motion").get<std::string>());
      const json& corners = v.at("corners");
      if (corners.size() != 4) throw ParseError("vehicle needs 4 corners");
      for (std::size_t i = 0; i < 4; ++i) t.corners[i] = point_from(corners.at(i));
      t.nearest_corner_index = v.at("nearest_corner").get<int>();
      if (t.nearest_corner_index < 0 || t.nearest_corner_index > 3) {
        throw ParseError("nearest_corner out of range");
      }
      t.num_points = v.at("num_points").get<int>();
      t.view = view_from_string(v.at("view").get<std::string>());
      f.vehicles.push_back(t);
    }
    return f;
  });
}

void write_truth(const std::string& path, const GroundTruth& gt) {
  write_jsonl<FrameTruth>(path, gt.frames, truth_to_json);
}

GroundTruth read_truth(const std::string& path) {
  GroundTruth gt;
  gt.frames = read_jsonl<FrameTruth>(path, truth_from_json);
  std::stable_sort(gt.frames.begin(), gt.frames.end(),
                   [](const FrameTruth& a, const FrameTruth& b) { return a.frame_id < b.frame_id; });
  return gt;
}

// ---- results ----

std::string result_to_json(const FrameResult& frame) {
  json detections = json::array();
  for (const DetectionRecord& d : frame.detections) {
    json corners = json::array();
    for (const Point2& c : d.corners) corners.push_back(point_json(c));
    json candidates = json::array();
    for (const CandidateRecord& c : d.candidates) {
      candidates.push_back(
          {{"criterion", to_string(c.criterion)}, {"heading", c.heading}, {"cost", c.cost}});
    }
    detections.push_back({{"index", d.index},
                          {"corners", std::move(corners)},
                          {"heading", d.heading},
                          {"criterion", to_string(d.criterion)},
                          {"cost", d.cost},
                          {"nearest_corner", d.nearest_corner},
                          {"degenerate", d.degenerate},
                          {"num_points", d.num_points},
                          {"gt_object", d.gt_object ? json(*d.gt_object) : json(nullptr)},
                          {"candidates", std::move(candidates)}});
  }
  json assignments = json::array();
  for (const AssignmentRecord& a : frame.assignments) {
    assignments.push_back({{"track_id", a.track_id}, {"detection", a.detection}});
  }
  json tracks = json::array();
  for (const TrackRecord& t : frame.tracks) {
    json slots = json::array();
    for (const SlotRecord& s : t.slots) {
      slots.push_back({{"model", to_string(s.model)},
                       {"x", s.position.x},
                       {"y", s.position.y},
                       {"probability", s.probability}});
    }
    tracks.push_back({{"id", t.id},
                      {"state", to_string(t.state)},
                      {"corner", point_json(t.corner)},
                      {"heading", t.heading},
                      {"mixture_corner", point_json(t.mixture_corner)},
                      {"best_model", to_string(t.best_model)},
                      {"measured", t.measured},
                      {"detection", t.detection ? json(*t.detection) : json(nullptr)},
                      {"slots", std::move(slots)}});
  }
  json j = {{"frame_id", frame.frame_id},
            {"timestamp", frame.timestamp},
            {"detections", std::move(detections)},
            {"assignments", std::move(assignments)},
            {"tracks", std::move(tracks)}};
  return j.dump();
}

namespace {

Lifecycle lifecycle_from_string(const std::string& name) {
  for (Lifecycle l : {Lifecycle::Tentative, Lifecycle::Confirmed, Lifecycle::Dead}) {
    if (to_string(l) == name) return l;
  }
  throw ParseError("unknown track state '" + name + "'");
}

}  // namespace

FrameResult result_from_json(const std::string& line) {
  return parsing([&] {
    const json j = json::parse(line);
    FrameResult f;
    f.frame_id = j.at("frame_id").get<std::int64_t>();
    f.timestamp = j.at("timestamp").get<double>();
    for (const json& d : j.at("detections")) {
      DetectionRecord r;
      r.index = d.at("index").get<std::size_t>();
      const json& corners = d.at("corners");
      if (corners.size() != 4) throw ParseError("detection needs 4 corners");
      for (std::size_t i = 0; i < 4; ++i) r.corners[i] = point_from(corners.at(i));
      r.heading = d.at("heading").get<double>();
      r.criterion = criterion_from_string(d.at("criterion").get<std::string>());
      r.cost = d.at("cost").get<double>();
      r.nearest_corner = d.at("nearest_corner").get<int>();
      r.degenerate = d.value("degenerate", false);
      r.num_points = d.at("num_points").get<std::size_t>();
      if (!d.at("gt_object").is_null()) r.gt_object = d.at("gt_object").get<int>();
      for (const json& c : d.at("candidates")) {
        r.candidates.push_back({criterion_from_string(c.at("criterion").get<std::string>()),
                                c.at("heading").get<double>(), c.at("cost").get<double>()});
      }
      f.detections.push_back(std::move(r));
    }
    for (const json& a : j.at("assignments")) {
      f.assignments.push_back({a.at("track_id").get<int>(), a.at("detection").get<std::size_t>()});
    }
    for (const json& t : j.at("tracks")) {
      TrackRecord r;
      r.id = t.at("id").get<int>();
      r.state = lifecycle_from_string(t.at("state").get<std::string>());
      r.corner = point_from(t.at("corner"));
      r.heading = t.at("heading").get<double>();
      r.mixture_corner = point_from(t.at("mixture_corner"));
      r.best_model = model_from_string(t.at("best_model").get<std::string>());
      r.measured = t.at("measured").get<bool>();
      if (!t.at("detection").is_null()) r.detection = t.at("detection").get<std::size_t>();
      const json& slots = t.at("slots");
      if (slots.size() != 3) throw ParseError("track needs 3 slots");
      for (std::size_t i = 0; i < 3; ++i) {
        const json& s = slots.at(i);
        r.slots[i] = {model_from_string(s.at("model").get<std::string>()),
                      {s.at("x").get<double>(), s.at("y").get<double>()},
                      s.at("probability").get<double>()};
      }
      f.tracks.push_back(r);
    }
    return f;
  });
}

void write_results(const std::string& path, std::span<const FrameResult> results) {
  write_jsonl<FrameResult>(path, results, result_to_json);
}

std::vector<FrameResult> read_results(const std::string& path) {
  return read_jsonl<FrameResult>(path, result_from_json);
}

// ---- metrics ----

void write_report(const std::string& dir, const EvaluationReport& report) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());
  const std::filesystem::path base(dir);

  std::string heading = std::string(kHeadingCsvHeader) + "\n";
  std::string dist = std::string(kDistributionCsvHeader) + "\n";
  for (const char* method : kHeadingMethods) {
    const ErrorStats& s = report.heading.at(method);
    heading += std::string(method) + "," + fixed(s.real_mean) + "," + fixed(s.real_std) + "," +
               fixed(s.abs_mean) + "," + fixed(s.abs_std) + "," + std::to_string(s.count) + "\n";
    dist += method;
    for (double f : report.distribution.at(method)) dist += "," + fixed(f);
    dist += "," + std::to_string(s.count) + "\n";
  }
  write_file((base / "table2_heading.csv").string(), heading);
  write_file((base / "table3_distribution.csv").string(), dist);

  std::string traj = std::string(kTrajectoryCsvHeader) + "\n";
  for (const TrajectoryRow& r : report.trajectory) {
    traj += r.method + "," + r.state + "," + fixed(r.stats.x_mean) + "," + fixed(r.stats.x_std) +
            "," + fixed(r.stats.y_mean) + "," + fixed(r.stats.y_std) + "," +
            std::to_string(r.stats.count) + "\n";
  }
  write_file((base / "table4_trajectory.csv").string(), traj);

  std::string ids = std::string(kIdCsvHeader) + "\n";
  for (const VehicleConsistency& v : report.ids.vehicles) {
    ids += std::to_string(v.gt_id) + "," + std::to_string(v.observed_frames) + "," +
           std::to_string(v.best_track) + "," + std::to_string(v.covered_frames) + "," +
           (v.consistent ? "1" : "0") + "\n";
  }
  write_file((base / "id_consistency.csv").string(), ids);

  std::string summary = std::string(kSummaryCsvHeader) + "\n";
  summary += "id_consistency," + fixed(report.ids.score) + "\n";
  summary += "detections," + std::to_string(report.heading_series.size()) + "\n";
  summary += "trajectory_samples," + std::to_string(report.trajectory_series.size()) + "\n";
  summary += "best_selection_abs_mean_deg," + fixed(report.heading.at("best_selection").abs_mean) + "\n";
  summary += "best_selection_le5," + fixed(report.distribution.at("best_selection")[5]) + "\n";
  write_file((base / "summary.csv").string(), summary);

  std::string plot;
  for (const HeadingSample& s : report.heading_series) {
    json errors = json::object();
    for (std::size_t m = 0; m < kHeadingMethods.size(); ++m) errors[kHeadingMethods[m]] = s.errors[m];
    json j = {{"kind", "heading"},
              {"frame_id", s.frame_id},
              {"detection", s.detection},
              {"gt_id", s.gt_id},
              {"errors_deg", std::move(errors)}};
    plot += j.dump() + "\n";
  }
  for (const TrajectorySample& s : report.trajectory_series) {
    json errors = json::object();
    for (std::size_t m = 0; m < kTrajectoryMethods.size(); ++m) {
      errors[kTrajectoryMethods[m]] = json::array({s.errors[m][0], s.errors[m][1]});
    }
    json j = {{"kind", "trajectory"},
              {"frame_id", s.frame_id},
              {"timestamp", s.timestamp},
              {"track_id", s.track_id},
              {"gt_id", s.gt_id},
              {"state", s.moving ? "moving" : "stationary"},
              {"abs_error_m", std::move(errors)}};
    plot += j.dump() + "\n";
  }
  write_file((base / "plot_data.jsonl").string(), plot);
}

}  // namespace vtrack
