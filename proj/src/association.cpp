#include "vtrack/association.hpp"

#include <algorithm>
#include <limits>

#include "vtrack/errors.hpp"

namespace vtrack {

std::vector<std::size_t> solve_assignment(const ScoreMatrix& s) {
  const std::size_t n = s.n;
  if (n == 0) return {};
  for (double c : s.entries) {
    if (!std::isfinite(c)) throw DegenerateInput("hungarian: non-finite cost");
  }
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based shortest augmenting path formulation; column 0 is a virtual root.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t row = 1; row <= n; ++row) {
    match[0] = row;
    std::size_t col0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[col0] = 1;
      const std::size_t r = match[col0];
      double delta = inf;
      std::size_t col1 = 0;
      for (std::size_t c = 1; c <= n; ++c) {
        if (used[c]) continue;
        const double reduced = s.at(r - 1, c - 1) - u[r] - v[c];
        if (reduced < minv[c]) {
          minv[c] = reduced;
          way[c] = col0;
        }
        if (minv[c] < delta) {
          delta = minv[c];
          col1 = c;
        }
      }
      for (std::size_t c = 0; c <= n; ++c) {
        if (used[c]) {
          u[match[c]] += delta;
          v[c] -= delta;
        } else {
          minv[c] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t c = 1; c <= n; ++c) row_to_col[match[c] - 1] = c - 1;
  return row_to_col;
}

Assignment hungarian(const ScoreMatrix& s) { return associate(s, s.n, s.n); }

Assignment associate(const ScoreMatrix& s, std::size_t num_tracks,
                     std::size_t num_detections) {
  Assignment a;
  const std::vector<std::size_t> row_to_col = solve_assignment(s);
  std::vector<char> det_matched(num_detections, 0);
  for (std::size_t r = 0; r < row_to_col.size(); ++r) {
    const std::size_t c = row_to_col[r];
    a.total_cost += s.at(r, c);
    if (r >= num_tracks) continue;
    if (c < num_detections && s.at(r, c) < s.sentinel) {
      a.pairs.emplace_back(r, c);
      det_matched[c] = 1;
    } else {
      a.unmatched_tracks.push_back(r);
    }
  }
  for (std::size_t c = 0; c < num_detections; ++c) {
    if (!det_matched[c]) a.unmatched_detections.push_back(c);
  }
  return a;
}

double gate_statistic(const Eigen::VectorXd& mean, const Eigen::MatrixXd& covariance,
                      const Eigen::MatrixXd& observation, const Eigen::VectorXd& z,
                      const Eigen::MatrixXd& noise) {
  const Eigen::VectorXd r = z - observation * mean;
  const Eigen::MatrixXd b = observation * covariance * observation.transpose() + noise;
  const Eigen::LLT<Eigen::MatrixXd> llt(b);
  if (llt.info() != Eigen::Success) {
    throw SingularGate("gate: innovation covariance is not positive definite");
  }
  return r.dot(llt.solve(r));
}

bool gate(const Eigen::VectorXd& mean, const Eigen::MatrixXd& covariance,
          const Eigen::MatrixXd& observation, const Eigen::VectorXd& z,
          const Eigen::MatrixXd& noise, double eps) {
  return gate_statistic(mean, covariance, observation, z, noise) < eps;
}

Point2 measured_corner(const TrackPrediction& track, const OrientedRect& rect) {
  return track.anchor ? compensated_corner(rect, *track.anchor, track.extent) : rect.nearest_corner();
}

ScoreMatrix build_score_matrix(std::span<const TrackPrediction> tracks,
                               std::span<const OrientedRect> detections,
                               const AssociationConfig& cfg) {
  ScoreMatrix s(std::max(tracks.size(), detections.size()), kSentinelCost);
  const Eigen::Matrix2d identity = Eigen::Matrix2d::Identity();
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    const TrackPrediction& track = tracks[t];
    for (std::size_t d = 0; d < detections.size(); ++d) {
      const Point2 z = measured_corner(track, detections[d]);
      const Eigen::Vector2d zv(z.x, z.y);
      bool admitted = false;
      for (const PositionGate& g : track.gates) {
        if (gate(g.mean, g.covariance, identity, zv, cfg.position_noise, cfg.eps)) {
          admitted = true;
          break;
        }
      }
      if (!admitted) continue;
      double cost = distance(track.corner, z);
      if (cfg.heading_weight > 0.0) {
        const double dh = std::abs(wrap_angle(4.0 * (detections[d].heading - track.heading))) / 4.0;
        cost += cfg.heading_weight * dh;
      }
      s.at(t, d) = std::min(cost, kSentinelCost);
    }
  }
  return s;
}

}  // namespace vtrack
