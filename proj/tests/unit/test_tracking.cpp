#include <doctest.h>

#include <vector>

#include <Eigen/Dense>

#include "vtrack/errors.hpp"
#include "vtrack/random.hpp"
#include "vtrack/tracking.hpp"

using namespace vtrack;

namespace {

FilterSlot slot_with(ModelKind model, std::initializer_list<double> mean) {
  FilterSlot s = initial_slot(model, Measurement{}, 1.0);
  Eigen::Index i = 0;
  for (double v : mean) s.mean(i++) = v;
  return s;
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().minCoeff();
}

// Feeds `frames` measurements of a corner moving as x(t), y(t) and returns the
// track. Measurements carry Gaussian noise of `sigma`.
template <class Motion>
Track run_track(Motion motion, int frames, double dt, double sigma, std::uint64_t seed,
                const TrackingConfig& cfg = TrackingConfig{}) {
  Rng rng(seed);
  const Point2 p0 = motion(0.0);
  Track track = init_track(1, OrientedRect::from_bounds(0.0, p0.x, p0.x + 4.5, p0.y, p0.y + 1.8), 0.0, cfg);
  for (int k = 1; k < frames; ++k) {
    const Point2 p = motion(k * dt);
    const Measurement z{p.x + rng.normal(0, sigma), p.y + rng.normal(0, sigma), 0.0};
    track = mma_step(std::move(track), z, dt, cfg);
  }
  return track;
}

}  // namespace

TEST_CASE("model names round-trip") {
  for (ModelKind m : kAllModels) CHECK(model_from_string(to_string(m)) == m);
  CHECK_THROWS(model_from_string("bogus"));
}

TEST_CASE("prediction examples") {
  const TrackingConfig cfg;
  const FilterSlot cv = predict(slot_with(ModelKind::ConstVelocity, {0, 0, 1, 2}), 0.1, cfg);
  CHECK(cv.mean(0) == doctest::Approx(0.1));
  CHECK(cv.mean(1) == doctest::Approx(0.2));
  CHECK(cv.mean(2) == doctest::Approx(1.0));
  CHECK(cv.mean(3) == doctest::Approx(2.0));

  const FilterSlot ca = predict(slot_with(ModelKind::ConstAcceleration, {0, 0, 0, 0, 1, 0, 0.3, 0}), 1.0, cfg);
  CHECK(ca.mean(0) == doctest::Approx(0.5));
  CHECK(ca.mean(2) == doctest::Approx(1.0));
  CHECK(ca.mean(4) == doctest::Approx(1.0));
  CHECK(ca.mean(6) == doctest::Approx(0.3));

  const FilterSlot st = predict(slot_with(ModelKind::Stationary, {3, 4, 0.2}), 5.0, cfg);
  CHECK(st.mean(0) == 3.0);
  CHECK(st.mean(1) == 4.0);

  CHECK_THROWS_AS(predict(cv, 0.0, cfg), DegenerateInput);
  CHECK_THROWS_AS(predict(cv, -0.1, cfg), DegenerateInput);
}

TEST_CASE("process noise by hand") {
  TrackingConfig cfg;
  cfg.q_cv_velocity = 0.1;
  const Eigen::MatrixXd q = process_noise(ModelKind::ConstVelocity, cfg, 1.0);
  // q * g g^T with g = (1/2, 1) on each axis.
  CHECK(q(0, 0) == doctest::Approx(0.025));
  CHECK(q(0, 2) == doctest::Approx(0.05));
  CHECK(q(2, 2) == doctest::Approx(0.1));
  CHECK(q(1, 1) == doctest::Approx(0.025));
  CHECK(q(0, 1) == 0.0);

  cfg.q_stationary = 1e-4;
  const Eigen::MatrixXd qs = process_noise(ModelKind::Stationary, cfg, 0.1);
  CHECK(qs.isApprox(Eigen::MatrixXd::Identity(3, 3) * 1e-4));

  Rng rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    const double dt = rng.uniform(0.01, 2.0);
    for (ModelKind m : kAllModels) {
      const Eigen::MatrixXd p = process_noise(m, cfg, dt);
      CHECK((p - p.transpose()).norm() < 1e-15);
      CHECK(min_eigenvalue(p) > -1e-15);
    }
  }
}

TEST_CASE("scalar correction lands halfway") {
  Eigen::VectorXd mean(1), z(1);
  mean << 0.0;
  z << 1.0;
  const Eigen::MatrixXd one = Eigen::MatrixXd::Identity(1, 1);
  const KalmanCorrection c = kalman_update(mean, one, one, one, z);
  CHECK(c.mean(0) == doctest::Approx(0.5));
  CHECK(c.covariance(0, 0) == doctest::Approx(0.5));
  CHECK(c.residual(0) == doctest::Approx(1.0));
  CHECK(c.innovation(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("angle residuals are wrapped") {
  Eigen::VectorXd mean(1), z(1);
  mean << kPi - 0.1;
  z << -kPi + 0.1;
  const Eigen::MatrixXd one = Eigen::MatrixXd::Identity(1, 1);
  const KalmanCorrection c = kalman_update(mean, one, one, one, z, 0);
  CHECK(c.residual(0) == doctest::Approx(0.2));
}

TEST_CASE("a singular innovation is reported") {
  Eigen::VectorXd mean(1), z(1);
  mean << 0.0;
  z << 1.0;
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(1, 1);
  CHECK_THROWS_AS(kalman_update(mean, zero, Eigen::MatrixXd::Identity(1, 1), zero, z),
                  SingularInnovation);
}

TEST_CASE("gaussian density examples") {
  CHECK(gaussian_density(Eigen::Vector2d(0, 0), Eigen::Matrix2d::Identity()) ==
        doctest::Approx(1.0 / (2.0 * kPi)));
  CHECK(gaussian_density(Eigen::Vector2d(1, 0), Eigen::Matrix2d::Identity()) ==
        doctest::Approx(std::exp(-0.5) / (2.0 * kPi)));
  const Eigen::Matrix2d s = Eigen::Vector2d(4, 1).asDiagonal();
  CHECK(gaussian_density(Eigen::Vector2d(0, 0), s) == doctest::Approx(1.0 / (4.0 * kPi)));
}

TEST_CASE("model probabilities") {
  SUBCASE("Bayes rule by hand") {
    const auto p = mma_probabilities({1.0 / 3, 1.0 / 3, 1.0 / 3}, {0.0, std::log(2.0), 0.0}, 0.001);
    CHECK(p[0] == doctest::Approx(0.25));
    CHECK(p[1] == doctest::Approx(0.5));
    CHECK(p[2] == doctest::Approx(0.25));
  }
  SUBCASE("a hopeless model keeps the floor") {
    const auto p = mma_probabilities({0.5, 0.3, 0.2}, {0.0, -5000.0, 0.0}, 0.001);
    CHECK(p[1] == doctest::Approx(0.001));
    CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0));
  }
  SUBCASE("underflow keeps the prior") {
    const double ninf = -std::numeric_limits<double>::infinity();
    const auto p = mma_probabilities({0.5, 0.3, 0.2}, {ninf, ninf, ninf}, 0.001);
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.3));
    CHECK(p[2] == doctest::Approx(0.2));
  }
  SUBCASE("random inputs") {
    Rng rng(62);
    for (int trial = 0; trial < 1000; ++trial) {
      std::array<double, 3> prior{rng.uniform(0.001, 1), rng.uniform(0.001, 1), rng.uniform(0.001, 1)};
      const double total = prior[0] + prior[1] + prior[2];
      for (double& v : prior) v /= total;
      const std::array<double, 3> ll{rng.uniform(-800, 10), rng.uniform(-800, 10), rng.uniform(-800, 10)};
      const double floor = 0.001;
      const auto p = mma_probabilities(prior, ll, floor);
      CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0).epsilon(1e-12));
      for (double v : p) CHECK(v >= floor - 1e-15);
      // A common factor on every likelihood changes nothing.
      const double shift = rng.uniform(-300, 300);
      const auto q = mma_probabilities(prior, {ll[0] + shift, ll[1] + shift, ll[2] + shift}, floor);
      for (int i = 0; i < 3; ++i) CHECK(q[i] == doctest::Approx(p[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("lifecycle transitions") {
  TrackingConfig cfg;
  cfg.confirm_hits = 3;
  cfg.max_misses = 2;
  Track t = init_track(7, OrientedRect::from_bounds(0.0, 5, 9.5, 2, 3.8), 0.0, cfg);
  CHECK(t.lifecycle == Lifecycle::Tentative);
  t = lifecycle_step(t, true, cfg);
  t = lifecycle_step(t, true, cfg);
  CHECK(t.lifecycle == Lifecycle::Tentative);
  t = lifecycle_step(t, true, cfg);
  CHECK(t.lifecycle == Lifecycle::Confirmed);

  // A hit between misses resets the count.
  t = lifecycle_step(t, false, cfg, 0.1);
  CHECK(t.misses == 1);
  t = lifecycle_step(t, true, cfg);
  CHECK(t.misses == 0);
  t = lifecycle_step(t, false, cfg, 0.1);
  CHECK(t.lifecycle == Lifecycle::Confirmed);
  t = lifecycle_step(t, false, cfg, 0.1);
  CHECK(t.lifecycle == Lifecycle::Dead);
  t = lifecycle_step(t, true, cfg);
  CHECK(t.lifecycle == Lifecycle::Dead);
}

TEST_CASE("coasting advances time and the history") {
  const TrackingConfig cfg;
  Track t = init_track(1, OrientedRect::from_bounds(0.0, 5, 9.5, 2, 3.8), 1.0, cfg);
  t.slots[1].mean(2) = 2.0;  // CV moving along x
  t = lifecycle_step(t, false, cfg, 0.5);
  CHECK(t.last_time == doctest::Approx(1.5));
  REQUIRE(t.history.size() == 2);
  CHECK_FALSE(t.history.back().measured);
  CHECK(t.slots[1].mean(0) == doctest::Approx(6.0));
}

TEST_CASE("corner switch compensation on a track") {
  const TrackingConfig cfg;
  const Track t = init_track(1, OrientedRect::from_bounds(0.0, 5, 9.5, 2, 3.8), 0.0, cfg);
  // The vehicle has driven past: the front-left corner is now nearest.
  const OrientedRect later = OrientedRect::from_bounds(0.0, -9.5, -5, 2, 3.8);
  const Measurement z = corner_switch_compensate(t, later);
  CHECK(z.x == doctest::Approx(-9.5));
  CHECK(z.y == doctest::Approx(2.0));
  // Without a corner change the nearest corner is measured unchanged.
  const Measurement same = corner_switch_compensate(t, OrientedRect::from_bounds(0.0, 6, 10.5, 2, 3.8));
  CHECK(same.x == doctest::Approx(6.0));
  CHECK(same.y == doctest::Approx(2.0));
}

TEST_CASE("covariances stay symmetric and positive semi-definite") {
  const TrackingConfig cfg;
  Rng rng(63);
  Track track = init_track(1, OrientedRect::from_bounds(0.3, 5, 9.5, 2, 3.8), 0.0, cfg);
  for (int cycle = 0; cycle < 1000; ++cycle) {
    const double dt = rng.uniform(0.02, 0.3);
    if (rng.uniform() < 0.2) {
      track = lifecycle_step(track, false, cfg, dt);
      track.misses = 0;
    } else {
      const Measurement z{rng.uniform(-30, 30), rng.uniform(-30, 30), rng.uniform(-kPi, kPi)};
      track = mma_step(std::move(track), z, dt, cfg);
    }
    track.history.clear();
    for (const FilterSlot& s : track.slots) {
      CHECK((s.covariance - s.covariance.transpose()).norm() < 1e-12 * (1.0 + s.covariance.norm()));
      CHECK(min_eigenvalue(s.covariance) > -1e-9 * (1.0 + s.covariance.norm()));
    }
    CHECK(track.probability_sum() == doctest::Approx(1.0));
  }
}

TEST_CASE("a constant-velocity corner is identified as CV") {
  const Track t = run_track([](double s) { return Point2{10.0 + 5.0 * s, 3.0 - 1.0 * s}; }, 50, 0.1,
                            0.02, 64);
  CHECK(t.slots[t.best_slot()].model == ModelKind::ConstVelocity);
  const VehicleState st = t.slots[1].state();
  CHECK(st.vx == doctest::Approx(5.0).epsilon(0.05));
  CHECK(st.vy == doctest::Approx(-1.0).epsilon(0.25));
}

TEST_CASE("a parked corner is identified as stationary and converges") {
  const Track t = run_track([](double) { return Point2{12.0, -4.0}; }, 50, 0.1, 0.02, 65);
  CHECK(t.slots[t.best_slot()].model == ModelKind::Stationary);
  CHECK(distance(t.corner(), {12.0, -4.0}) < 0.02);
}

TEST_CASE("an accelerating corner is identified as CA") {
  const Track t = run_track([](double s) { return Point2{5.0 + 2.0 * s + 1.5 * s * s, 1.0}; }, 50,
                            0.1, 0.0, 66);
  CHECK(t.slots[t.best_slot()].model == ModelKind::ConstAcceleration);
  CHECK(t.slots[2].state().ax == doctest::Approx(3.0).epsilon(0.1));
}

TEST_CASE("association predictions carry one gate per slot") {
  const TrackingConfig cfg;
  Track t = init_track(1, OrientedRect::from_bounds(0.0, 5, 9.5, 2, 3.8), 0.0, cfg);
  t.slots[1].mean(2) = 10.0;
  t.slots[1].probability = 0.8;
  t.slots[0].probability = t.slots[2].probability = 0.1;
  const TrackPrediction p = predict_for_association(t, 0.5, cfg);
  REQUIRE(p.gates.size() == 3);
  CHECK(p.corner.x == doctest::Approx(10.0));
  CHECK(p.gates[0].mean.x() == doctest::Approx(5.0));
  // Prediction widens the gate.
  CHECK(p.gates[1].covariance(0, 0) > t.slots[1].covariance(0, 0));
  REQUIRE(p.anchor.has_value());
  CHECK(p.extent[0] == doctest::Approx(4.5));
}

TEST_CASE("a single-model bank keeps its weights and gates") {
  TrackingConfig cfg;
  cfg.single_model = ModelKind::ConstVelocity;
  Track t = init_track(1, OrientedRect::from_bounds(0.0, 5, 9.5, 2, 3.8), 0.0, cfg);
  for (int k = 1; k <= 10; ++k) t = mma_step(std::move(t), Measurement{5.0, 2.0, 0.0}, 0.1, cfg);
  CHECK(t.slots[1].probability == 1.0);
  CHECK(t.slots[0].probability == 0.0);
  CHECK(t.slots[2].probability == 0.0);
  CHECK(t.best_slot() == 1);
  const TrackPrediction p = predict_for_association(t, 1.1, cfg);
  REQUIRE(p.gates.size() == 1);
  CHECK(p.gates[0].mean.x() == doctest::Approx(t.slots[1].mean(0)).epsilon(0.01));
}
