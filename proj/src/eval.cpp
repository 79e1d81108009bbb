#include "vtrack/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "vtrack/errors.hpp"
#include "vtrack/stats.hpp"

namespace vtrack {

double wrap_deg_180(double deg) {
  double w = std::fmod(deg, 180.0);
  if (w <= -90.0) w += 180.0;
  if (w > 90.0) w -= 180.0;
  return w;
}

double heading_error_deg(double estimate, double truth) {
  double w = std::fmod(rad2deg(estimate - truth), 90.0);
  if (w <= -45.0) w += 90.0;
  if (w > 45.0) w -= 90.0;
  return w;
}

ErrorStats error_stats(std::span<const double> signed_errors) {
  ErrorStats s;
  s.count = signed_errors.size();
  if (s.count == 0) return s;
  std::vector<double> abs_errors(signed_errors.size());
  std::transform(signed_errors.begin(), signed_errors.end(), abs_errors.begin(),
                 [](double e) { return std::abs(e); });
  s.real_mean = mean_of(signed_errors);
  s.real_std = stddev_of(signed_errors);
  s.abs_mean = mean_of(abs_errors);
  s.abs_std = stddev_of(abs_errors);
  return s;
}

namespace {

const FrameTruth& truth_frame(const GroundTruth& gt, std::int64_t frame_id) {
  const FrameTruth* f = gt.find(frame_id);
  if (!f) {
    throw AlignmentError("frame " + std::to_string(frame_id) + " missing from ground truth");
  }
  return *f;
}

std::vector<HeadingSample> heading_samples(std::span<const FrameResult> results,
                                           const GroundTruth& gt) {
  std::vector<HeadingSample> out;
  for (const FrameResult& frame : results) {
    const FrameTruth& truth = truth_frame(gt, frame.frame_id);
    for (const DetectionRecord& d : frame.detections) {
      if (!d.gt_object || *d.gt_object < 0) continue;
      const VehicleTruth* v = truth.find(*d.gt_object);
      if (!v) {
        throw AlignmentError("frame " + std::to_string(frame.frame_id) + ": vehicle " +
                             std::to_string(*d.gt_object) + " missing from ground truth");
      }
      HeadingSample s{frame.frame_id, d.index, v->id, {}};
      for (const CandidateRecord& c : d.candidates) {
        s.errors[static_cast<std::size_t>(c.criterion)] = heading_error_deg(c.heading, v->pose.heading);
      }
      s.errors[4] = heading_error_deg(d.heading, v->pose.heading);
      out.push_back(s);
    }
  }
  return out;
}

std::map<std::string, std::vector<double>> split_by_method(std::span<const HeadingSample> samples) {
  std::map<std::string, std::vector<double>> out;
  for (std::size_t m = 0; m < kHeadingMethods.size(); ++m) {
    std::vector<double>& errs = out[kHeadingMethods[m]];
    for (const HeadingSample& s : samples) errs.push_back(s.errors[m]);
  }
  return out;
}

std::map<std::string, ErrorStats> stats_by_method(
    const std::map<std::string, std::vector<double>>& errors) {
  std::map<std::string, ErrorStats> out;
  for (const auto& [method, errs] : errors) out[method] = error_stats(errs);
  return out;
}

}  // namespace

std::map<std::string, std::vector<double>> heading_errors(std::span<const FrameResult> results,
                                                          const GroundTruth& gt) {
  return split_by_method(heading_samples(results, gt));
}

std::map<std::string, ErrorStats> heading_error_stats(std::span<const FrameResult> results,
                                                      const GroundTruth& gt) {
  return stats_by_method(heading_errors(results, gt));
}

std::array<double, 6> heading_error_distribution(std::span<const double> abs_errors) {
  std::array<double, 6> out{};
  if (abs_errors.empty()) return out;
  for (std::size_t i = 0; i < kDistributionThresholds.size(); ++i) {
    const double limit = i == 0 ? 1e-9 : kDistributionThresholds[i];
    const auto n = std::count_if(abs_errors.begin(), abs_errors.end(),
                                 [limit](double e) { return std::abs(e) <= limit; });
    out[i] = static_cast<double>(n) / static_cast<double>(abs_errors.size());
  }
  return out;
}

AxisStats axis_stats(std::span<const double> dx, std::span<const double> dy) {
  AxisStats s;
  s.count = dx.size();
  if (dx.empty()) return s;
  s.x_mean = mean_of(dx);
  s.x_std = stddev_of(dx);
  s.y_mean = mean_of(dy);
  s.y_std = stddev_of(dy);
  return s;
}

std::map<int, int> track_correspondence(std::span<const FrameResult> results) {
  std::map<int, std::map<int, std::size_t>> votes;
  for (const FrameResult& frame : results) {
    for (const TrackRecord& t : frame.tracks) {
      if (!t.detection || *t.detection >= frame.detections.size()) continue;
      const std::optional<int>& label = frame.detections[*t.detection].gt_object;
      if (label && *label >= 0) ++votes[t.id][*label];
    }
  }
  std::map<int, int> out;
  for (const auto& [track, counts] : votes) {
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    out[track] = best->first;
  }
  return out;
}

std::vector<TrajectorySample> trajectory_samples(std::span<const FrameResult> results,
                                                 const GroundTruth& gt) {
  const std::map<int, int> corr = track_correspondence(results);
  std::vector<TrajectorySample> out;
  for (const FrameResult& frame : results) {
    const FrameTruth& truth = truth_frame(gt, frame.frame_id);
    for (const TrackRecord& t : frame.tracks) {
      if (t.state != Lifecycle::Confirmed || !t.measured) continue;
      auto it = corr.find(t.id);
      if (it == corr.end()) continue;
      const VehicleTruth* v = truth.find(it->second);
      if (!v) continue;
      TrajectorySample s;
      s.frame_id = frame.frame_id;
      s.timestamp = frame.timestamp;
      s.track_id = t.id;
      s.gt_id = v->id;
      s.moving = v->moving();
      const std::array<Point2, 3> estimates = {t.slots[1].position, t.corner, t.mixture_corner};
      for (std::size_t m = 0; m < estimates.size(); ++m) {
        const Point2 e = estimates[m];
        // The tracker follows one physical corner; compare with the closest.
        const Point2* best = &v->corners[0];
        for (const Point2& c : v->corners) {
          if (distance(c, e) < distance(*best, e)) best = &c;
        }
        s.errors[m] = {std::abs(e.x - best->x), std::abs(e.y - best->y)};
      }
      out.push_back(s);
    }
  }
  return out;
}

std::vector<TrajectoryRow> trajectory_error_stats(std::span<const TrajectorySample> samples) {
  std::vector<TrajectoryRow> rows;
  for (std::size_t m = 0; m < kTrajectoryMethods.size(); ++m) {
    for (const char* state : {"stationary", "moving", "all"}) {
      std::vector<double> dx, dy;
      for (const TrajectorySample& s : samples) {
        const std::string_view st = state;
        if (st == "stationary" && s.moving) continue;
        if (st == "moving" && !s.moving) continue;
        dx.push_back(s.errors[m][0]);
        dy.push_back(s.errors[m][1]);
      }
      rows.push_back({kTrajectoryMethods[m], state, axis_stats(dx, dy)});
    }
  }
  return rows;
}

std::vector<TrajectoryRow> trajectory_error_stats(std::span<const FrameResult> results,
                                                  const GroundTruth& gt) {
  return trajectory_error_stats(trajectory_samples(results, gt));
}

IdConsistency id_consistency(std::span<const FrameResult> results, const GroundTruth& gt) {
  std::map<int, std::size_t> observed;
  std::map<int, std::map<int, std::size_t>> covered;
  for (const FrameResult& frame : results) {
    const FrameTruth& truth = truth_frame(gt, frame.frame_id);
    std::set<int> seen;
    std::set<std::pair<int, int>> pairs;
    for (const DetectionRecord& d : frame.detections) {
      if (!d.gt_object || *d.gt_object < 0) continue;
      if (!truth.find(*d.gt_object)) {
        throw AlignmentError("frame " + std::to_string(frame.frame_id) + ": vehicle " +
                             std::to_string(*d.gt_object) + " missing from ground truth");
      }
      seen.insert(*d.gt_object);
    }
    for (const TrackRecord& t : frame.tracks) {
      if (!t.detection || *t.detection >= frame.detections.size()) continue;
      const std::optional<int>& label = frame.detections[*t.detection].gt_object;
      if (label && *label >= 0) pairs.insert({*label, t.id});
    }
    for (int id : seen) ++observed[id];
    for (auto [vehicle, track] : pairs) ++covered[vehicle][track];
  }
  IdConsistency out;
  std::size_t consistent = 0;
  for (const auto& [id, frames] : observed) {
    VehicleConsistency v;
    v.gt_id = id;
    v.observed_frames = frames;
    for (const auto& [track, n] : covered[id]) {
      if (n > v.covered_frames) {
        v.covered_frames = n;
        v.best_track = track;
      }
    }
    v.consistent = static_cast<double>(v.covered_frames) >= 0.9 * static_cast<double>(frames);
    consistent += v.consistent ? 1 : 0;
    out.vehicles.push_back(v);
  }
  if (!out.vehicles.empty()) {
    out.score = static_cast<double>(consistent) / static_cast<double>(out.vehicles.size());
  }
  return out;
}

EvaluationReport evaluate(std::span<const FrameResult> results, const GroundTruth& gt) {
  EvaluationReport r;
  r.heading_series = heading_samples(results, gt);
  const auto by_method = split_by_method(r.heading_series);
  r.heading = stats_by_method(by_method);
  for (const auto& [method, errs] : by_method) {
    r.distribution[method] = heading_error_distribution(errs);
  }
  r.trajectory_series = trajectory_samples(results, gt);
  r.trajectory = trajectory_error_stats(r.trajectory_series);
  r.ids = id_consistency(results, gt);
  return r;
}

}  // namespace vtrack
