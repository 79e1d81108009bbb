#include "vtrack/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "vtrack/errors.hpp"

namespace vtrack {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
    throw ConfigError(key, "expected a number, got '" + value + "'");
  }
  return out;
}

long long parse_int(const std::string& key, const std::string& value) {
  long long out = 0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(key, "expected an integer, got '" + value + "'");
  }
  return out;
}

double positive(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  if (!(v > 0.0)) throw ConfigError(key, "must be positive");
  return v;
}

double non_negative(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  if (v < 0.0) throw ConfigError(key, "must be >= 0");
  return v;
}

std::size_t count(const std::string& key, const std::string& value, long long min) {
  const long long v = parse_int(key, value);
  if (v < min) throw ConfigError(key, "must be >= " + std::to_string(min));
  return static_cast<std::size_t>(v);
}

using Setter = std::function<void(const std::string& key, const std::string& value)>;

std::map<std::string, Setter> pipeline_setters(PipelineConfig& c) {
  auto& seg = c.segmentation;
  auto& tl = c.tlinkage;
  auto& rf = c.rectfit;
  auto& as = c.association;
  auto& tr = c.tracking;
  return {
      {"segmentation.d0", [&](auto& k, auto& v) { seg.d0 = non_negative(k, v); }},
      {"segmentation.k", [&](auto& k, auto& v) { seg.k = non_negative(k, v); }},
      {"segmentation.merge_dist", [&](auto& k, auto& v) { seg.merge_dist = non_negative(k, v); }},
      {"segmentation.min_points", [&](auto& k, auto& v) { seg.min_points = count(k, v, 1); }},
      {"tlinkage.m", [&](auto& k, auto& v) { tl.m = count(k, v, 1); }},
      {"tlinkage.tau", [&](auto& k, auto& v) { tl.tau = positive(k, v); }},
      {"tlinkage.min_cluster_size", [&](auto& k, auto& v) { tl.min_cluster_size = count(k, v, 1); }},
      {"tlinkage.seed", [&](auto& k, auto& v) { tl.seed = count(k, v, 0); }},
      {"tlinkage.trim_gap", [&](auto& k, auto& v) { tl.trim_gap = positive(k, v); }},
      {"tlinkage.trim_gap_k", [&](auto& k, auto& v) { tl.trim_gap_k = non_negative(k, v); }},
      {"rectfit.step_deg", [&](auto& k, auto& v) { rf.step_deg = positive(k, v); }},
      {"rectfit.min_width", [&](auto& k, auto& v) { rf.min_width = positive(k, v); }},
      {"rectfit.closeness_dmin", [&](auto& k, auto& v) { rf.closeness_dmin = positive(k, v); }},
      {"assoc.eps", [&](auto& k, auto& v) { as.eps = positive(k, v); }},
      {"assoc.heading_weight", [&](auto& k, auto& v) { as.heading_weight = non_negative(k, v); }},
      {"track.q_stationary", [&](auto& k, auto& v) { tr.q_stationary = non_negative(k, v); }},
      {"track.q_cv_velocity", [&](auto& k, auto& v) { tr.q_cv_velocity = non_negative(k, v); }},
      {"track.q_ca_acceleration",
       [&](auto& k, auto& v) { tr.q_ca_acceleration = non_negative(k, v); }},
      {"track.q_ca_heading", [&](auto& k, auto& v) { tr.q_ca_heading = non_negative(k, v); }},
      {"track.r_position", [&](auto& k, auto& v) { tr.r_position = positive(k, v); }},
      {"track.r_heading_deg", [&](auto& k, auto& v) { tr.r_heading_deg = positive(k, v); }},
      {"track.confirm_hits", [&](auto& k, auto& v) { tr.confirm_hits = static_cast<int>(count(k, v, 1)); }},
      {"track.max_misses", [&](auto& k, auto& v) { tr.max_misses = static_cast<int>(count(k, v, 1)); }},
      {"track.single_model",
       [&](auto& k, auto& v) {
         if (v == "none") {
           tr.single_model.reset();
           return;
         }
         try {
           tr.single_model = model_from_string(v);
         } catch (const ParseError&) {
           throw ConfigError(k, "expected none, stationary, cv or ca, got '" + v + "'");
         }
       }},
      {"track.p_floor",
       [&](auto& k, auto& v) {
         tr.p_floor = non_negative(k, v);
         if (tr.p_floor * 3.0 >= 1.0) throw ConfigError(k, "must be below 1/3");
       }},
  };
}

}  // namespace

KeyValues parse_key_values(std::string_view text, std::string_view source) {
  KeyValues kv;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos || trim(line.substr(0, eq)).empty()) {
      throw ParseError(std::string(source) + ":" + std::to_string(line_no) +
                       ": expected key=value");
    }
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (!seen.insert(key).second) throw ConfigError(key, "duplicate key");
    kv.entries.emplace_back(std::move(key), std::move(value));
  }
  return kv;
}

KeyValues read_key_values(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_key_values(buf.str(), path);
}

PipelineConfig pipeline_config_from(const KeyValues& kv) {
  PipelineConfig cfg;
  const auto setters = pipeline_setters(cfg);
  for (const auto& [key, value] : kv.entries) {
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(key, "unknown key");
    it->second(key, value);
  }
  return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  return pipeline_config_from(read_key_values(path));
}

namespace {

// Shortest text that reads back to the same double.
std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

std::string to_key_values(const PipelineConfig& c) {
  std::ostringstream out;
  out << "segmentation.d0=" << num(c.segmentation.d0) << "\n"
      << "segmentation.k=" << num(c.segmentation.k) << "\n"
      << "segmentation.merge_dist=" << num(c.segmentation.merge_dist) << "\n"
      << "segmentation.min_points=" << c.segmentation.min_points << "\n"
      << "tlinkage.m=" << c.tlinkage.m << "\n"
      << "tlinkage.tau=" << num(c.tlinkage.tau) << "\n"
      << "tlinkage.min_cluster_size=" << c.tlinkage.min_cluster_size << "\n"
      << "tlinkage.seed=" << c.tlinkage.seed << "\n"
      << "tlinkage.trim_gap=" << num(c.tlinkage.trim_gap) << "\n"
      << "tlinkage.trim_gap_k=" << num(c.tlinkage.trim_gap_k) << "\n"
      << "rectfit.step_deg=" << num(c.rectfit.step_deg) << "\n"
      << "rectfit.min_width=" << num(c.rectfit.min_width) << "\n"
      << "rectfit.closeness_dmin=" << num(c.rectfit.closeness_dmin) << "\n"
      << "assoc.eps=" << num(c.association.eps) << "\n"
      << "assoc.heading_weight=" << num(c.association.heading_weight) << "\n"
      << "track.q_stationary=" << num(c.tracking.q_stationary) << "\n"
      << "track.q_cv_velocity=" << num(c.tracking.q_cv_velocity) << "\n"
      << "track.q_ca_acceleration=" << num(c.tracking.q_ca_acceleration) << "\n"
      << "track.q_ca_heading=" << num(c.tracking.q_ca_heading) << "\n"
      << "track.r_position=" << num(c.tracking.r_position) << "\n"
      << "track.r_heading_deg=" << num(c.tracking.r_heading_deg) << "\n"
      << "track.confirm_hits=" << c.tracking.confirm_hits << "\n"
      << "track.max_misses=" << c.tracking.max_misses << "\n"
      << "track.p_floor=" << num(c.tracking.p_floor) << "\n";
  if (c.tracking.single_model) out << "track.single_model=" << to_string(*c.tracking.single_model) << "\n";
  return out.str();
}

ScenarioSpec scenario_from(const KeyValues& kv, std::uint64_t seed) {
  ScenarioSpec spec;
  // A preset, when given, is the base the remaining keys modify.
  for (const auto& [key, value] : kv.entries) {
    if (key != "preset") continue;
    if (value == "tableI") spec = tableI_scenario(seed);
    else if (value == "mixed") spec = mixed_scenario(seed);
    else if (value == "three") spec = three_vehicle_scenario(seed);
    else if (value == "single") spec = single_vehicle_scenario(seed);
    else throw ConfigError(key, "unknown preset '" + value + "'");
  }

  std::map<int, VehicleSpec> vehicles;
  std::vector<int> order;
  for (const auto& [key, value] : kv.entries) {
    if (key == "preset") continue;
    if (key == "duration") spec.duration = positive(key, value);
    else if (key == "scan_rate") spec.scan_rate = positive(key, value);
    else if (key == "sensor.resolution_deg") spec.sensor.resolution = deg2rad(positive(key, value));
    else if (key == "sensor.max_range") spec.sensor.max_range = positive(key, value);
    else if (key == "sensor.layers") spec.sensor.layers = static_cast<int>(count(key, value, 1));
    else if (key == "sensor.noise_sigma") spec.sensor.noise_sigma = non_negative(key, value);
    else if (key == "sensor.outlier_rate") spec.sensor.outlier_rate = non_negative(key, value);
    else if (key == "sensor.jitter_deg") spec.sensor.jitter = deg2rad(non_negative(key, value));
    else if (key.rfind("vehicle.", 0) == 0) {
      const auto dot = key.find('.', 8);
      if (dot == std::string::npos) throw ConfigError(key, "expected vehicle.<id>.<field>");
      const int id = static_cast<int>(parse_int(key, key.substr(8, dot - 8)));
      const std::string field = key.substr(dot + 1);
      if (!vehicles.count(id)) {
        order.push_back(id);
        vehicles[id].id = id;
      }
      VehicleSpec& v = vehicles[id];
      if (field == "length") v.length = positive(key, value);
      else if (field == "width") v.width = positive(key, value);
      else if (field == "motion") {
        try {
          v.motion = model_from_string(value);
        } catch (const Error&) {
          throw ConfigError(key, "unknown motion '" + value + "'");
        }
      }
      else if (field == "x") v.x = parse_double(key, value);
      else if (field == "y") v.y = parse_double(key, value);
      else if (field == "heading_deg") v.heading = deg2rad(parse_double(key, value));
      else if (field == "vx") v.vx = parse_double(key, value);
      else if (field == "vy") v.vy = parse_double(key, value);
      else if (field == "ax") v.ax = parse_double(key, value);
      else if (field == "ay") v.ay = parse_double(key, value);
      else if (field == "spawn") v.spawn = non_negative(key, value);
      else if (field == "despawn") v.despawn = positive(key, value);
      else throw ConfigError(key, "unknown key");
    } else {
      throw ConfigError(key, "unknown key");
    }
  }
  for (int id : order) spec.vehicles.push_back(vehicles[id]);
  spec.validate();
  return spec;
}

ScenarioSpec load_scenario(const std::string& path, std::uint64_t seed) {
  return scenario_from(read_key_values(path), seed);
}

}  // namespace vtrack
