#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vtrack/geometry.hpp"

namespace vtrack {

inline constexpr double kSentinelCost = 1e6;

/// Square cost matrix, row-major. Rows are tracks, columns detections.
struct ScoreMatrix {
  std::size_t n = 0;
  std::vector<double> entries;
  double sentinel = kSentinelCost;

  explicit ScoreMatrix(std::size_t dim = 0, double fill = kSentinelCost)
      : n(dim), entries(dim * dim, fill) {}

  double& at(std::size_t row, std::size_t col) { return entries[row * n + col]; }
  double at(std::size_t row, std::size_t col) const { return entries[row * n + col]; }
};

struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (track, detection)
  std::vector<std::size_t> unmatched_tracks;
  std::vector<std::size_t> unmatched_detections;
  /// Cost of the full perfect matching found by the solver.
  double total_cost = 0.0;
};

/// Minimum-cost perfect matching (Kuhn-Munkres with potentials, O(n^3)).
/// Returns row_to_col.
std::vector<std::size_t> solve_assignment(const ScoreMatrix& s);

/// Solves `s` and reports matched pairs; pairs at or above the sentinel cost
/// are reported as unmatched.
Assignment hungarian(const ScoreMatrix& s);

/// Same as hungarian() for a matrix padded from num_tracks x num_detections;
/// padding rows and columns never appear in the result.
Assignment associate(const ScoreMatrix& s, std::size_t num_tracks, std::size_t num_detections);

/// (z - Hx)^T B^{-1} (z - Hx) with B = H P H^T + R. Throws SingularGate when B
/// is not positive definite.
double gate_statistic(const Eigen::VectorXd& mean, const Eigen::MatrixXd& covariance,
                      const Eigen::MatrixXd& observation, const Eigen::VectorXd& z,
                      const Eigen::MatrixXd& noise);

/// gate_statistic(...) < eps.
bool gate(const Eigen::VectorXd& mean, const Eigen::MatrixXd& covariance,
          const Eigen::MatrixXd& observation, const Eigen::VectorXd& z,
          const Eigen::MatrixXd& noise, double eps);

/// Predicted position of one filter hypothesis of a track.
struct PositionGate {
  Eigen::Vector2d mean;
  Eigen::Matrix2d covariance;
};

struct TrackPrediction {
  Point2 corner;  // predicted tracked corner
  double heading = 0.0;
  /// The detection passes the gate when any of these accepts it.
  std::vector<PositionGate> gates;
  /// Corner identity being followed; detections are read at this corner.
  std::optional<CornerAnchor> anchor;
  /// Size the track has observed; see compensated_corner().
  std::array<double, 2> extent{};
};

struct AssociationConfig {
  double eps = 9.21;
  double heading_weight = 0.0;  // metres per radian
  Eigen::Matrix2d position_noise = Eigen::Matrix2d::Identity() * 0.05 * 0.05;
};

/// Corner of `rect` compared against the track: the anchored corner when the
/// track follows one, otherwise the nearest corner.
Point2 measured_corner(const TrackPrediction& track, const OrientedRect& rect);

/// Corner-distance costs, gated, padded to max(tracks, detections) with the
/// sentinel.
ScoreMatrix build_score_matrix(std::span<const TrackPrediction> tracks,
                               std::span<const OrientedRect> detections,
                               const AssociationConfig& cfg);

}  // namespace vtrack
