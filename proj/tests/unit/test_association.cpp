#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "vtrack/association.hpp"
#include "vtrack/errors.hpp"
#include "vtrack/random.hpp"

using namespace vtrack;

namespace {

ScoreMatrix from_rows(const std::vector<std::vector<double>>& rows) {
  ScoreMatrix s(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows.size(); ++c) s.at(r, c) = rows[r][c];
  }
  return s;
}

double cost_of(const ScoreMatrix& s, const std::vector<std::size_t>& row_to_col) {
  double total = 0.0;
  for (std::size_t r = 0; r < row_to_col.size(); ++r) total += s.at(r, row_to_col[r]);
  return total;
}

double brute_force(const ScoreMatrix& s) {
  std::vector<std::size_t> perm(s.n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    best = std::min(best, cost_of(s, perm));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

bool is_permutation_of_n(const std::vector<std::size_t>& v, std::size_t n) {
  std::vector<std::size_t> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (sorted[i] != i) return false;
  }
  return v.size() == n;
}

TrackPrediction prediction_at(Point2 corner, double spread = 1.0) {
  TrackPrediction t;
  t.corner = corner;
  t.gates.push_back({Eigen::Vector2d(corner.x, corner.y), Eigen::Matrix2d::Identity() * spread});
  return t;
}

OrientedRect box_at(Point2 near_corner) {
  // Nearest corner at `near_corner` for boxes in the first quadrant.
  return OrientedRect::from_bounds(0.0, near_corner.x, near_corner.x + 4.5, near_corner.y,
                                   near_corner.y + 1.8);
}

}  // namespace

TEST_CASE("assignment examples") {
  const ScoreMatrix one = from_rows({{0}});
  CHECK(solve_assignment(one) == std::vector<std::size_t>{0});

  const ScoreMatrix two = from_rows({{4, 1}, {2, 3}});
  const auto a = solve_assignment(two);
  CHECK(a == std::vector<std::size_t>{1, 0});
  CHECK(cost_of(two, a) == doctest::Approx(3.0));

  CHECK(solve_assignment(ScoreMatrix(0)).empty());
}

TEST_CASE("assignment matches a brute-force search") {
  Rng rng(51);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(6);
    ScoreMatrix s(n);
    for (double& c : s.entries) {
      // Mix integer ties with continuous values.
      c = trial % 2 ? static_cast<double>(rng.below(5)) : rng.uniform(0, 100);
    }
    const auto a = solve_assignment(s);
    REQUIRE(is_permutation_of_n(a, n));
    CHECK(cost_of(s, a) == doctest::Approx(brute_force(s)));
  }
}

TEST_CASE("a constant shift does not change the assignment cost ordering") {
  Rng rng(52);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(5);
    ScoreMatrix s(n), shifted(n);
    const double shift = rng.uniform(-50, 50);
    for (std::size_t i = 0; i < s.entries.size(); ++i) {
      s.entries[i] = rng.uniform(0, 10);
      shifted.entries[i] = s.entries[i] + shift;
    }
    const double base = cost_of(s, solve_assignment(s));
    // The shifted optimum, read back on the original matrix, is still optimal.
    CHECK(cost_of(s, solve_assignment(shifted)) == doctest::Approx(base));
  }
}

TEST_CASE("non-finite costs are rejected") {
  ScoreMatrix s(2, 1.0);
  s.at(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(solve_assignment(s), DegenerateInput);
}

TEST_CASE("sentinel pairs are reported unmatched") {
  ScoreMatrix s(2, kSentinelCost);
  s.at(0, 0) = 1.0;
  const Assignment a = hungarian(s);
  REQUIRE(a.pairs.size() == 1);
  CHECK(a.pairs[0] == std::pair<std::size_t, std::size_t>{0, 0});
  CHECK(a.unmatched_tracks == std::vector<std::size_t>{1});
  CHECK(a.unmatched_detections == std::vector<std::size_t>{1});
}

TEST_CASE("padding rows and columns never surface") {
  // Two tracks, one detection, padded to 2 x 2.
  ScoreMatrix s(2, kSentinelCost);
  s.at(0, 0) = 5.0;
  s.at(1, 0) = 2.0;
  const Assignment a = associate(s, 2, 1);
  REQUIRE(a.pairs.size() == 1);
  CHECK(a.pairs[0] == std::pair<std::size_t, std::size_t>{1, 0});
  CHECK(a.unmatched_tracks == std::vector<std::size_t>{0});
  CHECK(a.unmatched_detections.empty());
}

TEST_CASE("gate statistic by hand") {
  const Eigen::Vector2d mean(0, 0);
  const Eigen::Matrix2d p = Eigen::Vector2d(4, 1).asDiagonal();
  const Eigen::Matrix2d h = Eigen::Matrix2d::Identity();
  const Eigen::Matrix2d r = Eigen::Matrix2d::Zero();
  const Eigen::Vector2d z(2, 0);
  CHECK(gate_statistic(mean, p, h, z, r) == doctest::Approx(1.0));
  CHECK(gate(mean, p, h, z, r, 1.5));
  // The boundary itself is outside.
  CHECK_FALSE(gate(mean, p, h, z, r, 1.0));
  CHECK(gate_statistic(mean, p, h, Eigen::Vector2d(0, 3), r) == doctest::Approx(9.0));
}

TEST_CASE("gate with a partial observation matrix") {
  Eigen::VectorXd mean(4);
  mean << 1, 2, 10, 10;
  const Eigen::MatrixXd p = Eigen::MatrixXd::Identity(4, 4);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, 4);
  h(0, 0) = 1;
  h(1, 1) = 1;
  const Eigen::Matrix2d r = Eigen::Matrix2d::Identity();
  // B = 2I; residual (2, 0) gives 4 / 2.
  CHECK(gate_statistic(mean, p, h, Eigen::Vector2d(3, 2), r) == doctest::Approx(2.0));
}

TEST_CASE("a singular innovation covariance is reported") {
  const Eigen::Vector2d mean(0, 0);
  const Eigen::Matrix2d zero = Eigen::Matrix2d::Zero();
  CHECK_THROWS_AS(
      gate_statistic(mean, zero, Eigen::Matrix2d::Identity(), Eigen::Vector2d(1, 0), zero),
      SingularGate);
}

TEST_CASE("score matrix holds corner distances and pads with the sentinel") {
  const std::vector<TrackPrediction> tracks{prediction_at({10, 2}), prediction_at({20, 5})};
  const std::vector<OrientedRect> dets{box_at({10.3, 2.4}), box_at({20, 5.1}), box_at({40, 40})};
  AssociationConfig cfg;
  const ScoreMatrix s = build_score_matrix(tracks, dets, cfg);
  REQUIRE(s.n == 3);
  CHECK(s.at(0, 0) == doctest::Approx(0.5));
  CHECK(s.at(1, 1) == doctest::Approx(0.1));
  // Out of each other's gates.
  CHECK(s.at(0, 1) == kSentinelCost);
  CHECK(s.at(1, 0) == kSentinelCost);
  // The far detection is gated out; the padding row is all sentinel.
  CHECK(s.at(0, 2) == kSentinelCost);
  for (std::size_t c = 0; c < 3; ++c) CHECK(s.at(2, c) == kSentinelCost);

  const Assignment a = associate(s, tracks.size(), dets.size());
  CHECK(a.pairs.size() == 2);
  CHECK(a.unmatched_detections == std::vector<std::size_t>{2});
}

TEST_CASE("a gated-out pair is never matched") {
  Rng rng(53);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<TrackPrediction> tracks;
    std::vector<OrientedRect> dets;
    const std::size_t nt = 1 + rng.below(4), nd = 1 + rng.below(4);
    for (std::size_t i = 0; i < nt; ++i) {
      tracks.push_back(prediction_at({rng.uniform(5, 15), rng.uniform(0, 10)}, rng.uniform(0.1, 4)));
    }
    for (std::size_t i = 0; i < nd; ++i) dets.push_back(box_at({rng.uniform(5, 15), rng.uniform(0, 10)}));
    AssociationConfig cfg;
    const ScoreMatrix s = build_score_matrix(tracks, dets, cfg);
    for (auto [t, d] : associate(s, nt, nd).pairs) {
      const Point2 z = dets[d].nearest_corner();
      bool inside = false;
      for (const PositionGate& g : tracks[t].gates) {
        inside = inside || gate(g.mean, g.covariance, Eigen::Matrix2d::Identity(),
                                Eigen::Vector2d(z.x, z.y), cfg.position_noise, cfg.eps);
      }
      CHECK(inside);
    }
  }
}

TEST_CASE("permuting detections permutes the matches") {
  Rng rng(54);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<TrackPrediction> tracks;
    std::vector<OrientedRect> dets;
    for (int i = 0; i < 4; ++i) {
      const Point2 c{6.0 + 8.0 * i, rng.uniform(0, 3)};
      tracks.push_back(prediction_at(c));
      dets.push_back(box_at(c + Point2{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)}));
    }
    std::vector<std::size_t> order{0, 1, 2, 3};
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    std::vector<OrientedRect> shuffled;
    for (std::size_t i : order) shuffled.push_back(dets[i]);
    AssociationConfig cfg;
    const auto a = associate(build_score_matrix(tracks, dets, cfg), 4, 4);
    const auto b = associate(build_score_matrix(tracks, shuffled, cfg), 4, 4);
    REQUIRE(a.pairs.size() == b.pairs.size());
    for (std::size_t k = 0; k < a.pairs.size(); ++k) {
      CHECK(a.pairs[k].first == b.pairs[k].first);
      CHECK(a.pairs[k].second == order[b.pairs[k].second]);
    }
  }
}

TEST_CASE("anchored tracks read the detection at the anchored corner") {
  TrackPrediction t = prediction_at({-9.5, 2});
  t.anchor = CornerAnchor{0.0, -1, -1};
  t.extent = {4.5, 1.8};
  const OrientedRect seen = OrientedRect::from_bounds(0.0, -9.5, -5, 2, 3.8);
  const Point2 z = measured_corner(t, seen);
  CHECK(z.x == doctest::Approx(-9.5));
  CHECK(z.y == doctest::Approx(2.0));
  t.anchor.reset();
  CHECK(measured_corner(t, seen) == seen.nearest_corner());
}
