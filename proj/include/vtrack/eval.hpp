#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vtrack/pipeline.hpp"
#include "vtrack/sim.hpp"

namespace vtrack {

/// Heading-error methods in table order.
inline constexpr std::array<const char*, 5> kHeadingMethods = {
    "area", "closeness", "variance", "tlinkage", "best_selection"};
/// Trajectory methods in table order.
inline constexpr std::array<const char*, 3> kTrajectoryMethods = {"single_cv", "mma",
                                                                  "mma_mixture"};
inline constexpr std::array<double, 6> kDistributionThresholds = {0, 1, 2, 3, 4, 5};

/// deg wrapped to (-90, 90].
double wrap_deg_180(double deg);
/// Signed error in degrees between rectangle headings, resolved modulo 90
/// degrees to the representative in (-45, 45].
double heading_error_deg(double estimate, double truth);

struct ErrorStats {
  double real_mean = 0.0, real_std = 0.0;
  double abs_mean = 0.0, abs_std = 0.0;
  std::size_t count = 0;
};
/// Population statistics of signed errors and of their absolute values.
ErrorStats error_stats(std::span<const double> signed_errors);

/// Signed heading errors (degrees) per method over every detection aligned
/// with a labelled vehicle. Throws AlignmentError when a frame or label is
/// missing from the ground truth.
std::map<std::string, std::vector<double>> heading_errors(std::span<const FrameResult> results,
                                                          const GroundTruth& gt);
std::map<std::string, ErrorStats> heading_error_stats(std::span<const FrameResult> results,
                                                      const GroundTruth& gt);

/// Fraction of |errors| at or below each of kDistributionThresholds. The
/// zero bucket uses a 1e-9 degree tolerance. All zero for empty input.
std::array<double, 6> heading_error_distribution(std::span<const double> abs_errors);

struct AxisStats {
  double x_mean = 0.0, x_std = 0.0;
  double y_mean = 0.0, y_std = 0.0;
  std::size_t count = 0;
};
AxisStats axis_stats(std::span<const double> dx, std::span<const double> dy);

/// Majority ground-truth vehicle of each track over the detections it
/// consumed. Tracks that only ever saw clutter are absent.
std::map<int, int> track_correspondence(std::span<const FrameResult> results);

struct TrajectorySample {
  std::int64_t frame_id = 0;
  double timestamp = 0.0;
  int track_id = 0;
  int gt_id = 0;
  bool moving = false;
  std::array<std::array<double, 2>, 3> errors{};  // per kTrajectoryMethods: |dx|, |dy|
};

/// Per-frame corner errors of confirmed, measured tracks. Each estimate is
/// compared with the nearest corner of its corresponding vehicle.
std::vector<TrajectorySample> trajectory_samples(std::span<const FrameResult> results,
                                                 const GroundTruth& gt);

struct TrajectoryRow {
  std::string method;
  std::string state;  // stationary | moving | all
  AxisStats stats;
};
std::vector<TrajectoryRow> trajectory_error_stats(std::span<const FrameResult> results,
                                                  const GroundTruth& gt);
std::vector<TrajectoryRow> trajectory_error_stats(std::span<const TrajectorySample> samples);

struct VehicleConsistency {
  int gt_id = 0;
  std::size_t observed_frames = 0;
  int best_track = -1;
  std::size_t covered_frames = 0;
  bool consistent = false;
};
struct IdConsistency {
  double score = 1.0;
  std::vector<VehicleConsistency> vehicles;
};
/// A vehicle is consistent when one track id is attached to its detections
/// in at least 90% of the frames in which it was detected.
IdConsistency id_consistency(std::span<const FrameResult> results, const GroundTruth& gt);

struct HeadingSample {
  std::int64_t frame_id = 0;
  std::size_t detection = 0;
  int gt_id = 0;
  std::array<double, 5> errors{};  // signed, per kHeadingMethods
};

struct EvaluationReport {
  std::map<std::string, ErrorStats> heading;
  std::map<std::string, std::array<double, 6>> distribution;
  std::vector<TrajectoryRow> trajectory;
  IdConsistency ids;
  std::vector<HeadingSample> heading_series;
  std::vector<TrajectorySample> trajectory_series;
};

EvaluationReport evaluate(std::span<const FrameResult> results, const GroundTruth& gt);

}  // namespace vtrack
