#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "vtrack/geometry.hpp"

namespace vtrack {

struct ScanPoint {
  Point2 position;
  int layer = 0;       // 0..3
  double range = 0.0;  // metres, > 0
  double bearing = 0.0;
};

/// One time-stamped frame of multi-layer range returns. `labels`, when
/// present, holds the generating object id per point (-1 for clutter).
struct Scan {
  std::int64_t frame_id = 0;
  double timestamp = 0.0;
  std::vector<ScanPoint> points;
  std::vector<int> labels;

  bool has_labels() const { return !labels.empty(); }
  /// Throws InvalidSpec when an invariant is broken (sort order, range,
  /// finiteness, label count).
  void validate() const;
  /// Sorts points (and labels) by (layer, bearing).
  void sort_points();
};

struct Segment {
  std::vector<std::size_t> point_indices;
};

struct SegmentationConfig {
  double d0 = 0.5;          // metres
  double k = 0.02;          // per metre of range
  double merge_dist = 0.5;  // metres
  std::size_t min_points = 5;
};

/// Range-adaptive breakpoint segmentation per layer followed by cross-layer
/// merging. Consecutive same-layer points join when their gap is below
/// d0 + k * range; segments of different layers join when their closest
/// points are within merge_dist. Segments smaller than min_points are
/// dropped. Output segments hold ascending indices and are ordered by their
/// first index.
std::vector<Segment> segment_scan(const Scan& scan, const SegmentationConfig& cfg);

}  // namespace vtrack
