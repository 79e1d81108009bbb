#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vtrack/association.hpp"
#include "vtrack/rectfit.hpp"
#include "vtrack/segmentation.hpp"
#include "vtrack/tlinkage.hpp"
#include "vtrack/tracking.hpp"

namespace vtrack {

struct PipelineConfig {
  SegmentationConfig segmentation;
  TLinkageConfig tlinkage;
  RectFitConfig rectfit;
  AssociationConfig association;
  TrackingConfig tracking;
};

struct CandidateRecord {
  CriterionKind criterion = CriterionKind::TLinkage;
  double heading = 0.0;
  double cost = 0.0;
};

struct DetectionRecord {
  std::size_t index = 0;
  std::array<Point2, 4> corners{};
  double heading = 0.0;
  CriterionKind criterion = CriterionKind::TLinkage;
  double cost = 0.0;
  int nearest_corner = 0;
  std::vector<CandidateRecord> candidates;
  bool degenerate = false;
  std::size_t num_points = 0;
  /// Majority label of the segment's points; -1 for clutter, empty when the
  /// scan carried no labels.
  std::optional<int> gt_object;

  OrientedRect rect() const;
};

struct SlotRecord {
  ModelKind model = ModelKind::Stationary;
  Point2 position;
  double probability = 0.0;
};

struct TrackRecord {
  int id = 0;
  Lifecycle state = Lifecycle::Tentative;
  Point2 corner;
  double heading = 0.0;
  Point2 mixture_corner;
  std::array<SlotRecord, 3> slots{};
  ModelKind best_model = ModelKind::Stationary;
  bool measured = false;
  /// Detection that updated or created the track this frame.
  std::optional<std::size_t> detection;
};

struct AssignmentRecord {
  int track_id = 0;
  std::size_t detection = 0;
};

struct FrameResult {
  std::int64_t frame_id = 0;
  double timestamp = 0.0;
  std::vector<DetectionRecord> detections;
  std::vector<AssignmentRecord> assignments;
  std::vector<TrackRecord> tracks;
};

/// Segments, clusters and fits one scan. Segments that cannot be fitted are
/// dropped.
std::vector<DetectionRecord> detect(const Scan& scan, const PipelineConfig& cfg);

/// Stateful frame-by-frame tracker.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig cfg);

  /// Runs one frame. Throws DegenerateInput when the timestamp does not
  /// advance; the tracker state is left untouched in that case.
  FrameResult process(const Scan& scan);

  const std::vector<Track>& tracks() const { return tracks_; }
  const PipelineConfig& config() const { return cfg_; }

 private:
  PipelineConfig cfg_;
  std::vector<Track> tracks_;
  int next_id_ = 1;
  std::optional<double> last_time_;
};

struct RunStats {
  std::size_t frames = 0;
  std::size_t skipped = 0;
  std::vector<std::string> diagnostics;  // one per skipped frame
};

/// Runs every scan in order, skipping frames that raise a library error.
std::vector<FrameResult> run_pipeline(std::span<const Scan> scans, const PipelineConfig& cfg,
                                      RunStats* stats = nullptr);

}  // namespace vtrack
