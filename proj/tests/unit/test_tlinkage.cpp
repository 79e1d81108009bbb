#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <vector>

#include "vtrack/errors.hpp"
#include "vtrack/random.hpp"
#include "vtrack/tlinkage.hpp"

using namespace vtrack;

namespace {

HypothesisSet all_pairs(const std::vector<Point2>& pts, double tau = 0.15) {
  return sample_hypotheses(pts, default_hypothesis_count(pts.size(), 1000000), 1, tau);
}

std::set<std::vector<std::size_t>> cluster_sets(const ClusterSet& cs) {
  std::set<std::vector<std::size_t>> out;
  for (const Cluster& c : cs.clusters) out.insert(c.indices);
  return out;
}

void check_partition(const ClusterSet& cs, std::size_t n) {
  std::vector<int> seen(n, 0);
  for (const Cluster& c : cs.clusters) {
    CHECK(std::is_sorted(c.indices.begin(), c.indices.end()));
    for (std::size_t i : c.indices) ++seen[i];
  }
  for (std::size_t i : cs.outlier_indices) ++seen[i];
  for (int s : seen) CHECK(s == 1);
}

}  // namespace

TEST_CASE("hypothesis sampling") {
  SUBCASE("two points give the line through them") {
    const std::vector<Point2> pts{{1, 1}, {3, 2}};
    const HypothesisSet h = sample_hypotheses(pts, 1, 9);
    REQUIRE(h.size() == 1);
    CHECK(point_line_distance(pts[0], h.lines[0]) < 1e-12);
    CHECK(point_line_distance(pts[1], h.lines[0]) < 1e-12);
  }
  SUBCASE("fixed seed repeats") {
    Rng rng(3);
    std::vector<Point2> pts;
    for (int i = 0; i < 30; ++i) pts.push_back({rng.uniform(0, 5), rng.uniform(0, 5)});
    const HypothesisSet a = sample_hypotheses(pts, 50, 77);
    const HypothesisSet b = sample_hypotheses(pts, 50, 77);
    REQUIRE(a.size() == 50);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a.lines[i].a == b.lines[i].a);
      CHECK(a.lines[i].b == b.lines[i].b);
      CHECK(a.lines[i].c == b.lines[i].c);
    }
  }
  SUBCASE("collinear points give one line up to sign") {
    const std::vector<Point2> pts{{0, 0}, {1, 1}, {2, 2}};
    const HypothesisSet h = sample_hypotheses(pts, 3, 4);
    for (const Line2& l : h.lines) {
      CHECK(std::abs(std::abs(l.a) - std::abs(h.lines[0].a)) < 1e-12);
      CHECK(std::abs(std::abs(l.b) - std::abs(h.lines[0].b)) < 1e-12);
      CHECK(std::abs(l.c) < 1e-12);
    }
  }
  SUBCASE("coincident points are rejected") {
    const std::vector<Point2> pts{{2, 2}, {2, 2}, {2, 2}};
    CHECK_THROWS_AS(sample_hypotheses(pts, 5, 1), DegenerateInput);
  }
  SUBCASE("hypothesis count rule") {
    CHECK(default_hypothesis_count(10, 200) == 45);
    CHECK(default_hypothesis_count(100, 200) == 200);
  }
}

TEST_CASE("preference function values") {
  HypothesisSet h;
  h.tau = 0.2;
  h.lines = {Line2::from_coefficients(0, 1, 0)};  // x-axis
  CHECK(preference({3, 0}, h).values[0] == doctest::Approx(1.0));
  CHECK(preference({3, 0.2}, h).values[0] == 0.0);
  CHECK(preference({3, 0.1}, h).values[0] == doctest::Approx(std::exp(-0.5)));
  CHECK(preference({3, 0.1}, h).values[0] == doctest::Approx(0.60653).epsilon(1e-5));
  CHECK(preference({3, 5}, h).values[0] == 0.0);
}

TEST_CASE("tanimoto distance by hand") {
  const PreferenceVector p{{1, 0}}, q{{1, 1}}, r{{0, 1}}, zero{{0, 0}};
  CHECK(tanimoto(p, p) == 0.0);
  CHECK(tanimoto(p, r) == 1.0);
  CHECK(tanimoto(p, q) == doctest::Approx(0.5));
  CHECK(tanimoto(p, zero) == 1.0);
  CHECK_THROWS_AS(tanimoto(zero, zero), UndefinedDistance);
}

TEST_CASE("tanimoto metric laws on random preference vectors") {
  Rng rng(31);
  for (int trial = 0; trial < 10000; ++trial) {
    PreferenceVector p, q;
    const std::size_t m = 1 + rng.below(12);
    for (std::size_t i = 0; i < m; ++i) {
      p.values.push_back(rng.uniform() < 0.3 ? 0.0 : rng.uniform());
      q.values.push_back(rng.uniform() < 0.3 ? 0.0 : rng.uniform());
    }
    if (std::all_of(p.values.begin(), p.values.end(), [](double v) { return v == 0.0; })) {
      p.values[0] = 0.5;
    }
    const double d = tanimoto(p, q);
    CHECK(std::abs(tanimoto(p, p)) <= 1e-12);
    CHECK(std::abs(d - tanimoto(q, p)) <= 1e-12);
    CHECK(d >= -1e-12);
    CHECK(d <= 1.0 + 1e-12);
  }
}

TEST_CASE("points on one line form one cluster") {
  std::vector<Point2> pts;
  for (int i = 0; i < 20; ++i) pts.push_back({0.3 * i, 1.0 + 0.15 * i});
  const HypothesisSet h = sample_hypotheses(pts, 20, 5);
  const ClusterSet cs = tlinkage_cluster(pts, h, TLinkageConfig{});
  CHECK(cs.clusters.size() == 1);
  CHECK(cs.outlier_indices.empty());
  check_partition(cs, pts.size());
}

TEST_CASE("a noiseless L splits into its two sides") {
  std::vector<Point2> pts;
  std::vector<std::size_t> side_a, side_b;
  for (int i = 1; i <= 20; ++i) {
    side_a.push_back(pts.size());
    pts.push_back({0.2 * i, 0.0});
  }
  for (int i = 1; i <= 20; ++i) {
    side_b.push_back(pts.size());
    pts.push_back({0.0, 0.1 * i});
  }
  const ClusterSet cs = tlinkage_cluster(pts, all_pairs(pts), TLinkageConfig{});
  CHECK(cluster_sets(cs) == std::set<std::vector<std::size_t>>{side_a, side_b});
  check_partition(cs, pts.size());
}

TEST_CASE("isolated points far from the line become outliers") {
  std::vector<Point2> pts;
  for (int i = 0; i < 20; ++i) pts.push_back({0.2 * i, 0.0});
  pts.push_back({1.0, 2.0});
  pts.push_back({2.5, -3.0});
  pts.push_back({-2.0, 4.0});
  const ClusterSet cs = tlinkage_cluster(pts, all_pairs(pts), TLinkageConfig{});
  REQUIRE(cs.clusters.size() == 1);
  CHECK(cs.clusters[0].indices.size() == 20);
  CHECK(cs.outlier_indices == std::vector<std::size_t>{20, 21, 22});
}

TEST_CASE("dominant heading") {
  SUBCASE("x-axis and y-axis") {
    std::vector<Point2> xs, ys;
    for (int i = 0; i < 10; ++i) {
      xs.push_back({0.2 * i, 3.0});
      ys.push_back({-1.0, 0.2 * i});
    }
    CHECK(dominant_heading(tlinkage_cluster(xs, all_pairs(xs), {}), xs) ==
          doctest::Approx(0.0).epsilon(1e-9));
    CHECK(dominant_heading(tlinkage_cluster(ys, all_pairs(ys), {}), ys) ==
          doctest::Approx(kPi / 2));
  }
  SUBCASE("longer side of an L decides") {
    std::vector<Point2> pts;
    const double a = deg2rad(30), b = deg2rad(120);
    const Point2 corner{5, 2};
    for (int i = 1; i <= 30; ++i) pts.push_back(corner + (0.15 * i) * unit(a));
    for (int i = 1; i <= 10; ++i) pts.push_back(corner + (0.15 * i) * unit(b));
    const ClusterSet cs = tlinkage_cluster(pts, all_pairs(pts), {});
    CHECK(std::abs(rad2deg(dominant_heading(cs, pts)) - 30.0) <= 1.0);
  }
  SUBCASE("no cluster") {
    const std::vector<Point2> pts{{0, 0}, {5, 5}};
    const ClusterSet cs = tlinkage_cluster(pts, all_pairs(pts), {});
    CHECK(cs.clusters.empty());
    CHECK_THROWS_AS(dominant_heading(cs, pts), NoCluster);
  }
}

TEST_CASE("merged preference never exceeds a member's preference") {
  Rng rng(32);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Point2> pts;
    for (int i = 0; i < 25; ++i) pts.push_back({rng.uniform(0, 4), rng.normal(0.0, 0.03)});
    for (int i = 0; i < 15; ++i) pts.push_back({rng.normal(0.0, 0.03), rng.uniform(0, 2)});
    const HypothesisSet h = sample_hypotheses(pts, 100, trial);
    const ClusterSet cs = tlinkage_cluster(pts, h, {});
    check_partition(cs, pts.size());
    for (const Cluster& c : cs.clusters) {
      for (std::size_t i : c.indices) {
        const PreferenceVector own = preference(pts[i], h);
        for (std::size_t k = 0; k < h.size(); ++k) {
          CHECK(c.preference.values[k] <= own.values[k] + 1e-15);
        }
      }
    }
  }
}

TEST_CASE("cluster contents do not depend on point order") {
  Rng rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Point2> pts;
    for (int i = 0; i < 30; ++i) pts.push_back({rng.uniform(0, 4), rng.normal(0.0, 0.03)});
    for (int i = 0; i < 12; ++i) pts.push_back({rng.normal(0.0, 0.03), rng.uniform(0, 2)});
    for (int i = 0; i < 4; ++i) pts.push_back({rng.uniform(-3, 6), rng.uniform(-3, 6)});
    const HypothesisSet h = sample_hypotheses(pts, 150, trial + 100);

    std::vector<std::size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    std::vector<Point2> shuffled;
    for (std::size_t i : perm) shuffled.push_back(pts[i]);

    const ClusterSet a = tlinkage_cluster(pts, h, {});
    const ClusterSet b = tlinkage_cluster(shuffled, h, {});
    std::set<std::set<std::size_t>> sa, sb;
    for (const Cluster& c : a.clusters) sa.insert({c.indices.begin(), c.indices.end()});
    for (const Cluster& c : b.clusters) {
      std::set<std::size_t> back;
      for (std::size_t i : c.indices) back.insert(perm[i]);
      sb.insert(back);
    }
    CHECK(sa == sb);
  }
}

TEST_CASE("dominant cluster is the largest") {
  Rng rng(34);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Point2> pts;
    const int na = 5 + static_cast<int>(rng.below(20)), nb = 5 + static_cast<int>(rng.below(20));
    for (int i = 0; i < na; ++i) pts.push_back({0.2 * (i + 1), rng.normal(0.0, 0.02)});
    for (int i = 0; i < nb; ++i) pts.push_back({rng.normal(0.0, 0.02), 0.2 * (i + 1)});
    const ClusterSet cs = tlinkage_cluster(pts, sample_hypotheses(pts, 200, trial), {});
    REQUIRE(cs.dominant_index);
    for (const Cluster& c : cs.clusters) {
      CHECK(c.indices.size() <= cs.dominant().indices.size());
    }
  }
}

TEST_CASE("trimming keeps the largest contiguous run of a cluster") {
  std::vector<Point2> pts;
  for (int i = 0; i < 20; ++i) pts.push_back({5.0 + 0.1 * i, 1.0});
  pts.push_back({7.5, 1.0});  // 0.6 m past the end, on the same line
  pts.push_back({7.6, 1.0});
  pts.push_back({7.7, 1.0});
  ClusterSet cs;
  Cluster c;
  c.indices.resize(pts.size());
  std::iota(c.indices.begin(), c.indices.end(), 0);
  cs.clusters.push_back(c);
  cs.dominant_index = 0;

  TLinkageConfig cfg;
  const ClusterSet trimmed = trim_clusters(cs, pts, cfg);
  REQUIRE(trimmed.clusters.size() == 1);
  CHECK(trimmed.dominant().indices.size() == 20);
  CHECK(trimmed.outlier_indices == std::vector<std::size_t>{20, 21, 22});
  check_partition(trimmed, pts.size());

  cfg.min_cluster_size = 21;
  const ClusterSet none = trim_clusters(cs, pts, cfg);
  CHECK(none.clusters.empty());
  CHECK(none.outlier_indices.size() == pts.size());

  cfg.min_cluster_size = 3;
  cfg.trim_gap = 1.0;
  CHECK(trim_clusters(cs, pts, cfg).clusters[0].indices.size() == pts.size());
}
