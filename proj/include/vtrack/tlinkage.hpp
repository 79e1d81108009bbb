#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vtrack/geometry.hpp"

namespace vtrack {

/// Randomly sampled line models and the inlier threshold they are scored with.
struct HypothesisSet {
  std::vector<Line2> lines;
  double tau = 0.15;

  std::size_t size() const { return lines.size(); }
};

/// Soft inlier score of one point (or cluster) against every hypothesis.
struct PreferenceVector {
  std::vector<double> values;
};

struct Cluster {
  std::vector<std::size_t> indices;  // ascending
  PreferenceVector preference;
};

struct ClusterSet {
  std::vector<Cluster> clusters;             // ordered by first index
  std::vector<std::size_t> outlier_indices;  // ascending
  std::optional<std::size_t> dominant_index;

  const Cluster& dominant() const;
};

struct TLinkageConfig {
  std::size_t m = 200;  // upper bound on hypotheses per segment
  double tau = 0.15;
  std::size_t min_cluster_size = 3;
  std::uint64_t seed = 1;
  // Contiguity trim: a gap along the cluster line wider than
  // trim_gap + trim_gap_k * range splits it; only the largest run is kept.
  double trim_gap = 0.25;
  double trim_gap_k = 0.01;
};

/// min(m_max, n(n-1)/2).
std::size_t default_hypothesis_count(std::size_t n, std::size_t m_max);

/// m lines through random point pairs. Pairs are drawn without replacement
/// until every non-coincident pair has been used, after which they repeat.
/// Throws DegenerateInput when fewer than two distinct points exist.
HypothesisSet sample_hypotheses(std::span<const Point2> points, std::size_t m,
                                std::uint64_t seed, double tau = 0.15);

/// exp(-d/tau) when d < tau, else 0, for every hypothesis.
PreferenceVector preference(Point2 point, const HypothesisSet& hyps);

/// 1 - <p,q> / (|p|^2 + |q|^2 - <p,q>). Throws UndefinedDistance when both
/// vectors are zero.
double tanimoto(const PreferenceVector& p, const PreferenceVector& q);

/// Agglomerative T-linkage: merges the closest pair (Tanimoto) until every
/// remaining pair is orthogonal. Merged preference is the element-wise
/// minimum. Clusters below min_cluster_size become outliers.
ClusterSet tlinkage_cluster(std::span<const Point2> points, const HypothesisSet& hyps,
                            const TLinkageConfig& cfg);

/// Cuts every cluster at gaps along its TLS line wider than
/// trim_gap + trim_gap_k * (distance of the gap midpoint from the origin) and
/// keeps the largest run. Dropped points and clusters that fall below
/// min_cluster_size become outliers; the dominant cluster is re-chosen.
ClusterSet trim_clusters(const ClusterSet& cs, std::span<const Point2> points,
                         const TLinkageConfig& cfg);

/// TLS heading of the dominant cluster, in [0, pi). Throws NoCluster.
double dominant_heading(const ClusterSet& cs, std::span<const Point2> points);

/// Gathers the points of one cluster.
std::vector<Point2> gather(std::span<const Point2> points,
                           std::span<const std::size_t> indices);

}  // namespace vtrack
