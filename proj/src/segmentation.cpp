#include "vtrack/segmentation.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "vtrack/errors.hpp"

namespace vtrack {

void Scan::validate() const {
  if (has_labels() && labels.size() != points.size()) {
    throw InvalidSpec("scan " + std::to_string(frame_id) +
                      ": label count does not match point count");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const ScanPoint& p = points[i];
    if (!p.position.finite() || !std::isfinite(p.bearing)) {
      throw InvalidSpec("scan " + std::to_string(frame_id) + ": non-finite point");
    }
    if (!(p.range > 0.0)) {
      throw InvalidSpec("scan " + std::to_string(frame_id) + ": non-positive range");
    }
    if (i > 0) {
      const ScanPoint& q = points[i - 1];
      if (p.layer < q.layer || (p.layer == q.layer && p.bearing < q.bearing)) {
        throw InvalidSpec("scan " + std::to_string(frame_id) +
                          ": points not sorted by (layer, bearing)");
      }
    }
  }
}

void Scan::sort_points() {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const ScanPoint& p = points[a];
    const ScanPoint& q = points[b];
    return p.layer != q.layer ? p.layer < q.layer : p.bearing < q.bearing;
  });
  std::vector<ScanPoint> sorted;
  sorted.reserve(points.size());
  std::vector<int> sorted_labels;
  for (std::size_t i : order) {
    sorted.push_back(points[i]);
    if (has_labels()) sorted_labels.push_back(labels[i]);
  }
  points = std::move(sorted);
  labels = std::move(sorted_labels);
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  std::size_t find(std::size_t i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

struct Run {
  int layer = 0;
  std::vector<std::size_t> members;
  double min_x, min_y, max_x, max_y;
};

double box_gap(const Run& a, const Run& b) {
  const double dx = std::max({0.0, a.min_x - b.max_x, b.min_x - a.max_x});
  const double dy = std::max({0.0, a.min_y - b.max_y, b.min_y - a.max_y});
  return std::hypot(dx, dy);
}

}  // namespace

std::vector<Segment> segment_scan(const Scan& scan, const SegmentationConfig& cfg) {
  const auto& pts = scan.points;
  const std::size_t n = pts.size();
  if (n == 0) return {};

  // Work on (layer, bearing) order regardless of how the caller stored it.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pts[a].layer != pts[b].layer ? pts[a].layer < pts[b].layer
                                        : pts[a].bearing < pts[b].bearing;
  });

  DisjointSets sets(n);
  auto joinable = [&](std::size_t a, std::size_t b) {
    const double threshold = cfg.d0 + cfg.k * std::min(pts[a].range, pts[b].range);
    return distance(pts[a].position, pts[b].position) < threshold;
  };

  std::size_t begin = 0;
  while (begin < n) {
    std::size_t end = begin;
    while (end < n && pts[order[end]].layer == pts[order[begin]].layer) ++end;
    for (std::size_t i = begin + 1; i < end; ++i) {
      if (joinable(order[i - 1], order[i])) sets.unite(order[i - 1], order[i]);
    }
    // A full sweep closes on itself at the +/-pi seam.
    if (end - begin > 2 && joinable(order[end - 1], order[begin])) {
      sets.unite(order[end - 1], order[begin]);
    }
    begin = end;
  }

  // Per-layer runs, then cross-layer merging.
  std::vector<Run> runs;
  {
    std::vector<std::size_t> run_of(n, std::numeric_limits<std::size_t>::max());
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t root = sets.find(i);
      if (run_of[root] == std::numeric_limits<std::size_t>::max()) {
        run_of[root] = runs.size();
        const Point2 p = pts[i].position;
        runs.push_back({pts[i].layer, {}, p.x, p.y, p.x, p.y});
      }
      Run& r = runs[run_of[root]];
      r.members.push_back(i);
      const Point2 p = pts[i].position;
      r.min_x = std::min(r.min_x, p.x);
      r.min_y = std::min(r.min_y, p.y);
      r.max_x = std::max(r.max_x, p.x);
      r.max_y = std::max(r.max_y, p.y);
    }
  }
  for (std::size_t a = 0; a < runs.size(); ++a) {
    for (std::size_t b = a + 1; b < runs.size(); ++b) {
      if (runs[a].layer == runs[b].layer) continue;
      if (box_gap(runs[a], runs[b]) >= cfg.merge_dist) continue;
      const std::size_t ra = sets.find(runs[a].members.front());
      const std::size_t rb = sets.find(runs[b].members.front());
      if (ra == rb) continue;
      bool close = false;
      for (std::size_t i : runs[a].members) {
        for (std::size_t j : runs[b].members) {
          if (distance(pts[i].position, pts[j].position) < cfg.merge_dist) {
            close = true;
            break;
          }
        }
        if (close) break;
      }
      if (close) sets.unite(ra, rb);
    }
  }

  std::vector<Segment> segments;
  std::vector<std::size_t> segment_of(n, std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = sets.find(i);
    if (segment_of[root] == std::numeric_limits<std::size_t>::max()) {
      segment_of[root] = segments.size();
      segments.emplace_back();
    }
    segments[segment_of[root]].point_indices.push_back(i);
  }
  std::erase_if(segments, [&](const Segment& s) {
    return s.point_indices.size() < cfg.min_points;
  });
  return segments;
}

}  // namespace vtrack
