#include "vtrack/tlinkage.hpp"

#include <algorithm>
#include <limits>
#include <unordered_set>

#include "vtrack/errors.hpp"
#include "vtrack/random.hpp"

namespace vtrack {

const Cluster& ClusterSet::dominant() const {
  if (!dominant_index) throw NoCluster("every point was classified as an outlier");
  return clusters[*dominant_index];
}

namespace {

// Largest cluster; ties go to the smaller TLS residual variance.
void choose_dominant(ClusterSet& cs, std::span<const Point2> points) {
  cs.dominant_index.reset();
  double best_var = 0.0;
  for (std::size_t c = 0; c < cs.clusters.size(); ++c) {
    const std::vector<Point2> pts = gather(points, cs.clusters[c].indices);
    const double var = tls_residual_variance(pts);
    if (!cs.dominant_index) {
      cs.dominant_index = c;
      best_var = var;
      continue;
    }
    const std::size_t size = cs.clusters[c].indices.size();
    const std::size_t best_size = cs.clusters[*cs.dominant_index].indices.size();
    if (size > best_size || (size == best_size && var < best_var)) {
      cs.dominant_index = c;
      best_var = var;
    }
  }
}

}  // namespace

std::size_t default_hypothesis_count(std::size_t n, std::size_t m_max) {
  const std::size_t pairs = n < 2 ? 0 : n * (n - 1) / 2;
  return std::max<std::size_t>(1, std::min(m_max, pairs));
}

namespace {

std::pair<std::size_t, std::size_t> decode_pair(std::uint64_t k) {
  // k enumerates pairs (i, j), i < j, row-major by j: k = j(j-1)/2 + i.
  auto j = static_cast<std::size_t>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(k))) / 2.0);
  while (static_cast<std::uint64_t>(j) * (j - 1) / 2 > k) --j;
  while (static_cast<std::uint64_t>(j + 1) * j / 2 <= k) ++j;
  const std::size_t i = static_cast<std::size_t>(k - static_cast<std::uint64_t>(j) * (j - 1) / 2);
  return {i, j};
}

}  // namespace

HypothesisSet sample_hypotheses(std::span<const Point2> points, std::size_t m,
                                std::uint64_t seed, double tau) {
  const std::size_t n = points.size();
  if (n < 2) throw DegenerateInput("sample_hypotheses: need at least two points");
  if (m == 0) throw DegenerateInput("sample_hypotheses: m must be positive");
  if (!(tau > 0.0)) throw DegenerateInput("sample_hypotheses: tau must be positive");

  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  Rng rng(seed);
  HypothesisSet hyps;
  hyps.tau = tau;
  hyps.lines.reserve(m);

  auto try_pair = [&](std::uint64_t k) {
    const auto [i, j] = decode_pair(k);
    if (distance(points[i], points[j]) <= 1e-12) return false;
    hyps.lines.push_back(line_through(points[i], points[j]));
    return true;
  };

  if (total <= 4 * static_cast<std::uint64_t>(m)) {
    // Dense regime: random permutation of every pair.
    std::vector<std::uint64_t> order(total);
    for (std::uint64_t k = 0; k < total; ++k) order[k] = k;
    for (std::uint64_t k = total; k > 1; --k) {
      std::swap(order[k - 1], order[rng.below(k)]);
    }
    std::vector<std::uint64_t> valid;
    for (std::uint64_t k : order) {
      if (hyps.lines.size() == m) break;
      if (try_pair(k)) valid.push_back(k);
    }
    if (hyps.lines.empty()) throw DegenerateInput("sample_hypotheses: all points coincide");
    for (std::size_t r = 0; hyps.lines.size() < m; ++r) {
      try_pair(valid[r % valid.size()]);
    }
    return hyps;
  }

  std::unordered_set<std::uint64_t> seen;
  std::uint64_t rejected = 0;
  while (hyps.lines.size() < m) {
    const std::uint64_t k = rng.below(total);
    if (!seen.insert(k).second) continue;
    if (!try_pair(k) && ++rejected == total) {
      throw DegenerateInput("sample_hypotheses: all points coincide");
    }
  }
  return hyps;
}

PreferenceVector preference(Point2 point, const HypothesisSet& hyps) {
  PreferenceVector pv;
  pv.values.resize(hyps.lines.size(), 0.0);
  for (std::size_t i = 0; i < hyps.lines.size(); ++i) {
    const double d = point_line_distance(point, hyps.lines[i]);
    if (d < hyps.tau) pv.values[i] = std::exp(-d / hyps.tau);
  }
  return pv;
}

double tanimoto(const PreferenceVector& p, const PreferenceVector& q) {
  if (p.values.size() != q.values.size()) {
    throw DegenerateInput("tanimoto: preference vectors differ in length");
  }
  double pq = 0.0, pp = 0.0, qq = 0.0;
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    pq += p.values[i] * q.values[i];
    pp += p.values[i] * p.values[i];
    qq += q.values[i] * q.values[i];
  }
  if (pp == 0.0 && qq == 0.0) {
    throw UndefinedDistance("tanimoto: both preference vectors are zero");
  }
  return std::clamp(1.0 - pq / (pp + qq - pq), 0.0, 1.0);
}

namespace {

constexpr double kOrthogonal = 1.0 - 1e-9;

// Working state of one agglomerative run. Preferences are stored densely
// with a per-cluster support list, since merging only shrinks supports.
class Agglomeration {
 public:
  Agglomeration(std::span<const Point2> points, const HypothesisSet& hyps)
      : n_(points.size()), m_(hyps.size()), pref_(n_ * m_, 0.0), norm2_(n_, 0.0),
        support_(n_), members_(n_), active_(n_, 1),
        nn_dist_(n_), nn_(n_), stale_(n_, 0) {
    for (std::size_t i = 0; i < n_; ++i) {
      double* row = &pref_[i * m_];
      for (std::size_t h = 0; h < m_; ++h) {
        const double d = point_line_distance(points[i], hyps.lines[h]);
        if (d < hyps.tau) {
          row[h] = std::exp(-d / hyps.tau);
          support_[i].push_back(static_cast<std::uint32_t>(h));
          norm2_[i] += row[h] * row[h];
        }
      }
      members_[i].push_back(i);
    }
  }

  void run() {
    for (std::size_t a = 0; a < n_; ++a) refresh_neighbour(a);
    for (;;) {
      // Stale entries are lower bounds, so the first fresh minimum is exact.
      std::size_t best = n_;
      for (std::size_t i = 0; i < n_; ++i) {
        if (active_[i] && nn_dist_[i] < kOrthogonal &&
            (best == n_ || nn_dist_[i] < nn_dist_[best])) {
          best = i;
        }
      }
      if (best == n_) break;
      if (stale_[best]) {
        refresh_neighbour(best);
        continue;
      }
      const std::size_t keep = best, drop = nn_[best];
      merge(keep, drop);
      refresh_neighbour(keep);
      for (std::size_t k = 0; k < drop; ++k) {
        if (!active_[k] || k == keep) continue;
        if (k < keep) {
          const double d = distance(k, keep);
          if (d < nn_dist_[k] || (d == nn_dist_[k] && keep < nn_[k])) {
            nn_dist_[k] = d;
            nn_[k] = keep;
            continue;
          }
        }
        if (nn_[k] == keep || nn_[k] == drop) stale_[k] = 1;
      }
    }
  }

  ClusterSet collect(std::span<const Point2> points, std::size_t min_size) const {
    ClusterSet cs;
    for (std::size_t i = 0; i < n_; ++i) {
      if (!active_[i]) continue;
      std::vector<std::size_t> idx = members_[i];
      std::sort(idx.begin(), idx.end());
      if (idx.size() < min_size) {
        cs.outlier_indices.insert(cs.outlier_indices.end(), idx.begin(), idx.end());
        continue;
      }
      Cluster c;
      c.indices = std::move(idx);
      c.preference.values.assign(pref_.begin() + static_cast<std::ptrdiff_t>(i * m_),
                                 pref_.begin() + static_cast<std::ptrdiff_t>((i + 1) * m_));
      cs.clusters.push_back(std::move(c));
    }
    std::sort(cs.outlier_indices.begin(), cs.outlier_indices.end());
    std::sort(cs.clusters.begin(), cs.clusters.end(), [](const Cluster& x, const Cluster& y) {
      return x.indices.front() < y.indices.front();
    });

    choose_dominant(cs, points);
    return cs;
  }

 private:
  // 1 for orthogonal pairs, including two empty preference sets.
  double distance(std::size_t a, std::size_t b) const {
    const std::size_t s = support_[a].size() <= support_[b].size() ? a : b;
    const std::size_t o = s == a ? b : a;
    const double* ps = &pref_[s * m_];
    const double* po = &pref_[o * m_];
    double dot = 0.0;
    for (std::uint32_t h : support_[s]) dot += ps[h] * po[h];
    if (dot == 0.0) return 1.0;
    return std::clamp(1.0 - dot / (norm2_[a] + norm2_[b] - dot), 0.0, 1.0);
  }

  // Closest active cluster with a larger index; ties go to the smaller index.
  void refresh_neighbour(std::size_t a) {
    nn_dist_[a] = std::numeric_limits<double>::infinity();
    nn_[a] = n_;
    stale_[a] = 0;
    if (norm2_[a] == 0.0) return;
    for (std::size_t b = a + 1; b < n_; ++b) {
      if (!active_[b]) continue;
      const double d = distance(a, b);
      if (d < nn_dist_[a]) {
        nn_dist_[a] = d;
        nn_[a] = b;
      }
    }
  }

  void merge(std::size_t keep, std::size_t drop) {
    double* pk = &pref_[keep * m_];
    const double* pd = &pref_[drop * m_];
    std::vector<std::uint32_t> support;
    double norm2 = 0.0;
    for (std::uint32_t h : support_[keep]) {
      pk[h] = std::min(pk[h], pd[h]);
      if (pk[h] > 0.0) {
        support.push_back(h);
        norm2 += pk[h] * pk[h];
      }
    }
    support_[keep] = std::move(support);
    norm2_[keep] = norm2;
    members_[keep].insert(members_[keep].end(), members_[drop].begin(), members_[drop].end());
    active_[drop] = 0;
  }

  std::size_t n_, m_;
  std::vector<double> pref_;
  std::vector<double> norm2_;
  std::vector<std::vector<std::uint32_t>> support_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<char> active_;
  std::vector<double> nn_dist_;
  std::vector<std::size_t> nn_;
  std::vector<char> stale_;
};

}  // namespace

ClusterSet tlinkage_cluster(std::span<const Point2> points, const HypothesisSet& hyps,
                            const TLinkageConfig& cfg) {
  if (points.empty()) return {};
  Agglomeration agg(points, hyps);
  agg.run();
  return agg.collect(points, cfg.min_cluster_size);
}

ClusterSet trim_clusters(const ClusterSet& cs, std::span<const Point2> points,
                         const TLinkageConfig& cfg) {
  ClusterSet out;
  out.outlier_indices = cs.outlier_indices;
  for (const Cluster& c : cs.clusters) {
    const std::vector<Point2> pts = gather(points, c.indices);
    const Point2 dir = unit(fit_line_tls(pts).heading());
    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(c.indices.size());
    for (std::size_t i : c.indices) order.push_back({points[i].dot(dir), i});
    std::sort(order.begin(), order.end());

    std::size_t best_begin = 0, best_end = 0, begin = 0;
    for (std::size_t k = 1; k <= order.size(); ++k) {
      bool cut = k == order.size();
      if (!cut) {
        const Point2 mid = 0.5 * (points[order[k - 1].second] + points[order[k].second]);
        cut = order[k].first - order[k - 1].first > cfg.trim_gap + cfg.trim_gap_k * mid.norm();
      }
      if (!cut) continue;
      if (k - begin > best_end - best_begin) {
        best_begin = begin;
        best_end = k;
      }
      begin = k;
    }

    Cluster kept;
    kept.preference = c.preference;
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (k >= best_begin && k < best_end) {
        kept.indices.push_back(order[k].second);
      } else {
        out.outlier_indices.push_back(order[k].second);
      }
    }
    std::sort(kept.indices.begin(), kept.indices.end());
    if (kept.indices.size() < cfg.min_cluster_size) {
      out.outlier_indices.insert(out.outlier_indices.end(), kept.indices.begin(),
                                 kept.indices.end());
    } else {
      out.clusters.push_back(std::move(kept));
    }
  }
  std::sort(out.outlier_indices.begin(), out.outlier_indices.end());
  std::sort(out.clusters.begin(), out.clusters.end(), [](const Cluster& x, const Cluster& y) {
    return x.indices.front() < y.indices.front();
  });
  choose_dominant(out, points);
  return out;
}

double dominant_heading(const ClusterSet& cs, std::span<const Point2> points) {
  const std::vector<Point2> pts = gather(points, cs.dominant().indices);
  return fit_line_tls(pts).heading();
}

std::vector<Point2> gather(std::span<const Point2> points,
                           std::span<const std::size_t> indices) {
  std::vector<Point2> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(points[i]);
  return out;
}

}  // namespace vtrack
