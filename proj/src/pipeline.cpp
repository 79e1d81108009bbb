#include "vtrack/pipeline.hpp"

#include <algorithm>
#include <map>

#include "vtrack/errors.hpp"
#include "vtrack/random.hpp"

namespace vtrack {

OrientedRect DetectionRecord::rect() const {
  OrientedRect r;
  r.heading = heading;
  r.corners = corners;
  r.nearest_corner_index = nearest_corner;
  return r;
}

namespace {

std::optional<int> majority_label(const Scan& scan, std::span<const std::size_t> indices) {
  if (!scan.has_labels()) return std::nullopt;
  std::map<int, std::size_t> votes;
  for (std::size_t i : indices) ++votes[scan.labels[i]];
  // Ties resolve to the smallest label.
  auto best = votes.begin();
  for (auto it = votes.begin(); it != votes.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

DetectionRecord to_record(const FitResult& fit) {
  DetectionRecord d;
  d.corners = fit.rect.corners;
  d.heading = fit.rect.heading;
  d.criterion = fit.criterion;
  d.cost = fit.selection_cost;
  d.nearest_corner = fit.rect.nearest_corner_index;
  d.degenerate = fit.degenerate;
  for (const FitCandidate& c : fit.candidates) {
    d.candidates.push_back({c.criterion, c.rect.heading, c.cost});
  }
  return d;
}

TrackRecord to_record(const Track& track) {
  TrackRecord r;
  r.id = track.id;
  r.state = track.lifecycle;
  const TrackPoint& last = track.history.back();
  r.corner = last.corner;
  r.heading = last.heading;
  r.mixture_corner = last.mixture_corner;
  for (std::size_t i = 0; i < 3; ++i) {
    r.slots[i] = {track.slots[i].model, last.slot_corners[i], last.probabilities[i]};
  }
  r.best_model = last.best_model;
  r.measured = last.measured;
  return r;
}

}  // namespace

std::vector<DetectionRecord> detect(const Scan& scan, const PipelineConfig& cfg) {
  std::vector<DetectionRecord> out;
  const std::vector<Segment> segments = segment_scan(scan, cfg.segmentation);
  std::vector<Point2> positions;
  positions.reserve(scan.points.size());
  for (const ScanPoint& p : scan.points) positions.push_back(p.position);

  for (std::size_t s = 0; s < segments.size(); ++s) {
    const Segment& seg = segments[s];
    const std::vector<Point2> pts = gather(positions, seg.point_indices);
    try {
      const std::uint64_t seed =
          mix_seed(mix_seed(cfg.tlinkage.seed, static_cast<std::uint64_t>(scan.frame_id)), s);
      const HypothesisSet hyps =
          sample_hypotheses(pts, default_hypothesis_count(pts.size(), cfg.tlinkage.m), seed,
                            cfg.tlinkage.tau);
      const ClusterSet clusters =
          trim_clusters(tlinkage_cluster(pts, hyps, cfg.tlinkage), pts, cfg.tlinkage);
      std::vector<std::size_t> inliers;
      for (const Cluster& c : clusters.clusters) {
        inliers.insert(inliers.end(), c.indices.begin(), c.indices.end());
      }
      std::sort(inliers.begin(), inliers.end());
      const std::vector<Point2> inlier_pts = gather(pts, inliers);
      const std::vector<Point2> dominant = gather(pts, clusters.dominant().indices);
      DetectionRecord d = to_record(best_selection(inlier_pts, dominant, cfg.rectfit));
      d.index = out.size();
      d.num_points = pts.size();
      d.gt_object = majority_label(scan, seg.point_indices);
      out.push_back(std::move(d));
    } catch (const DegenerateInput&) {
      // Too few distinct points for a line: not a vehicle candidate.
    } catch (const NoCluster&) {
    }
  }
  return out;
}

Pipeline::Pipeline(PipelineConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.association.position_noise =
      Eigen::Matrix2d::Identity() * cfg_.tracking.r_position * cfg_.tracking.r_position;
}

FrameResult Pipeline::process(const Scan& scan) {
  const double t = scan.timestamp;
  if (last_time_ && !(t > *last_time_)) {
    throw DegenerateInput("frame " + std::to_string(scan.frame_id) +
                          ": timestamp does not advance");
  }
  FrameResult result;
  result.frame_id = scan.frame_id;
  result.timestamp = t;
  result.detections = detect(scan, cfg_);

  std::vector<OrientedRect> rects;
  rects.reserve(result.detections.size());
  for (const DetectionRecord& d : result.detections) rects.push_back(d.rect());

  std::vector<TrackPrediction> predictions;
  predictions.reserve(tracks_.size());
  for (const Track& track : tracks_) {
    predictions.push_back(predict_for_association(track, t, cfg_.tracking));
  }
  const ScoreMatrix scores = build_score_matrix(predictions, rects, cfg_.association);
  const Assignment assignment = associate(scores, tracks_.size(), rects.size());

  std::vector<std::optional<std::size_t>> matched(tracks_.size());
  for (auto [ti, di] : assignment.pairs) matched[ti] = di;

  std::vector<Track> next;
  next.reserve(tracks_.size() + assignment.unmatched_detections.size());
  std::vector<std::optional<std::size_t>> attached;
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    Track track = tracks_[i];
    const double dt = t - track.last_time;
    if (matched[i]) {
      const OrientedRect& rect = rects[*matched[i]];
      const Measurement z = corner_switch_compensate(track, rect);
      track = mma_step(std::move(track), z, dt, cfg_.tracking);
      track.anchor.reference_heading = z.theta;
      observe_extent(track, rect);
      track = lifecycle_step(std::move(track), true, cfg_.tracking);
      result.assignments.push_back({track.id, *matched[i]});
    } else {
      track = lifecycle_step(std::move(track), false, cfg_.tracking, dt);
    }
    attached.push_back(matched[i]);
    next.push_back(std::move(track));
  }
  for (std::size_t di : assignment.unmatched_detections) {
    Track track = init_track(next_id_++, rects[di], t, cfg_.tracking);
    next.push_back(lifecycle_step(std::move(track), true, cfg_.tracking));
    attached.push_back(di);
  }

  tracks_.clear();
  for (std::size_t i = 0; i < next.size(); ++i) {
    TrackRecord rec = to_record(next[i]);
    rec.detection = attached[i];
    result.tracks.push_back(rec);
    if (next[i].lifecycle != Lifecycle::Dead) tracks_.push_back(std::move(next[i]));
  }
  // Histories are not needed by the tracker itself; keep them short.
  for (Track& track : tracks_) {
    if (track.history.size() > 1) track.history.erase(track.history.begin(), track.history.end() - 1);
  }
  last_time_ = t;
  return result;
}

std::vector<FrameResult> run_pipeline(std::span<const Scan> scans, const PipelineConfig& cfg,
                                      RunStats* stats) {
  Pipeline pipeline(cfg);
  std::vector<FrameResult> out;
  out.reserve(scans.size());
  RunStats local;
  for (const Scan& scan : scans) {
    ++local.frames;
    try {
      out.push_back(pipeline.process(scan));
    } catch (const Error& e) {
      ++local.skipped;
      local.diagnostics.push_back("frame " + std::to_string(scan.frame_id) + ": " + e.code() +
                                  ": " + e.what());
    }
  }
  if (stats) *stats = std::move(local);
  return out;
}

}  // namespace vtrack
