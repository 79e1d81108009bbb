#include "vtrack/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vtrack/errors.hpp"

namespace vtrack {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Stationary: return "stationary";
    case ModelKind::ConstVelocity: return "cv";
    case ModelKind::ConstAcceleration: return "ca";
  }
  return "unknown";
}

ModelKind model_from_string(std::string_view name) {
  for (ModelKind k : kAllModels) {
    if (to_string(k) == name) return k;
  }
  throw ParseError("unknown motion model '" + std::string(name) + "'");
}

std::string_view to_string(Lifecycle state) {
  switch (state) {
    case Lifecycle::Tentative: return "tentative";
    case Lifecycle::Confirmed: return "confirmed";
    case Lifecycle::Dead: return "dead";
  }
  return "unknown";
}

namespace {

int state_dim(ModelKind model) {
  switch (model) {
    case ModelKind::Stationary: return 3;
    case ModelKind::ConstVelocity: return 4;
    case ModelKind::ConstAcceleration: return 8;
  }
  return 0;
}

// Index of theta in the model state, or -1.
int theta_index(ModelKind model) {
  switch (model) {
    case ModelKind::Stationary: return 2;
    case ModelKind::ConstVelocity: return -1;
    case ModelKind::ConstAcceleration: return 6;
  }
  return -1;
}

void symmetrize(Eigen::MatrixXd& m) { m = 0.5 * (m + m.transpose()); }

}  // namespace

VehicleState FilterSlot::state() const {
  VehicleState s;
  s.x = mean(0);
  s.y = mean(1);
  switch (model) {
    case ModelKind::Stationary:
      s.theta = mean(2);
      break;
    case ModelKind::ConstVelocity:
      s.vx = mean(2);
      s.vy = mean(3);
      break;
    case ModelKind::ConstAcceleration:
      s.vx = mean(2);
      s.vy = mean(3);
      s.ax = mean(4);
      s.ay = mean(5);
      s.theta = mean(6);
      s.delta = mean(7);
      break;
  }
  return s;
}

std::size_t Track::best_slot() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < slots.size(); ++i) {
    if (slots[i].probability > slots[best].probability) best = i;
  }
  return best;
}

std::array<double, 2> Track::extent() const {
  std::array<double, 2> out{};
  for (std::size_t axis = 0; axis < 2; ++axis) {
    std::vector<double> s = extent_samples[axis];
    if (s.empty()) continue;
    const auto q = s.begin() + static_cast<std::ptrdiff_t>((3 * (s.size() - 1)) / 4);
    std::nth_element(s.begin(), q, s.end());
    out[axis] = *q;
  }
  return out;
}

double Track::probability_sum() const {
  double s = 0.0;
  for (const FilterSlot& slot : slots) s += slot.probability;
  return s;
}

Eigen::MatrixXd transition_matrix(ModelKind model, double dt) {
  const int n = state_dim(model);
  Eigen::MatrixXd f = Eigen::MatrixXd::Identity(n, n);
  if (model == ModelKind::ConstVelocity) {
    f(0, 2) = dt;
    f(1, 3) = dt;
  } else if (model == ModelKind::ConstAcceleration) {
    f(0, 2) = dt;
    f(1, 3) = dt;
    f(0, 4) = 0.5 * dt * dt;
    f(1, 5) = 0.5 * dt * dt;
    f(2, 4) = dt;
    f(3, 5) = dt;
  }
  return f;
}

Eigen::MatrixXd process_noise(ModelKind model, const TrackingConfig& cfg, double dt) {
  const int n = state_dim(model);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  if (model == ModelKind::Stationary) {
    q.diagonal().setConstant(cfg.q_stationary);
    return q;
  }
  // Piecewise-constant white noise on the highest derivative, entering the
  // lower states through the gain g.
  const bool ca = model == ModelKind::ConstAcceleration;
  const double var = ca ? cfg.q_ca_acceleration : cfg.q_cv_velocity;
  const std::vector<double> g =
      ca ? std::vector<double>{dt * dt * dt / 6.0, 0.5 * dt * dt, dt}
         : std::vector<double>{0.5 * dt * dt, dt};
  for (int axis = 0; axis < 2; ++axis) {
    for (std::size_t r = 0; r < g.size(); ++r) {
      for (std::size_t c = 0; c < g.size(); ++c) {
        q(axis + 2 * static_cast<int>(r), axis + 2 * static_cast<int>(c)) = var * g[r] * g[c];
      }
    }
  }
  if (ca) q(6, 6) = q(7, 7) = cfg.q_ca_heading;
  return q;
}

Eigen::MatrixXd observation_matrix(ModelKind model) {
  const int n = state_dim(model);
  const int th = theta_index(model);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(th >= 0 ? 3 : 2, n);
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  if (th >= 0) h(2, th) = 1.0;
  return h;
}

Eigen::MatrixXd measurement_noise(ModelKind model, const TrackingConfig& cfg) {
  const double rp = cfg.r_position * cfg.r_position;
  if (theta_index(model) < 0) return Eigen::Vector2d(rp, rp).asDiagonal();
  const double rt = deg2rad(cfg.r_heading_deg);
  return Eigen::Vector3d(rp, rp, rt * rt).asDiagonal();
}

Eigen::VectorXd measurement_vector(ModelKind model, const Measurement& z) {
  if (theta_index(model) < 0) return Eigen::Vector2d(z.x, z.y);
  return Eigen::Vector3d(z.x, z.y, z.theta);
}

FilterSlot initial_slot(ModelKind model, const Measurement& z, double probability) {
  static const double kFullPrior[8] = {1.0, 1.0, 4.0, 4.0, 1.0, 1.0, 0.1, 0.1};
  FilterSlot slot;
  slot.model = model;
  slot.probability = probability;
  const int n = state_dim(model);
  slot.mean = Eigen::VectorXd::Zero(n);
  slot.mean(0) = z.x;
  slot.mean(1) = z.y;
  Eigen::VectorXd diag(n);
  switch (model) {
    case ModelKind::Stationary:
      slot.mean(2) = z.theta;
      diag << kFullPrior[0], kFullPrior[1], kFullPrior[6];
      break;
    case ModelKind::ConstVelocity:
      diag << kFullPrior[0], kFullPrior[1], kFullPrior[2], kFullPrior[3];
      break;
    case ModelKind::ConstAcceleration:
      slot.mean(6) = z.theta;
      for (int i = 0; i < 8; ++i) diag(i) = kFullPrior[i];
      break;
  }
  slot.covariance = diag.asDiagonal();
  return slot;
}

FilterSlot predict(const FilterSlot& slot, double dt, const TrackingConfig& cfg) {
  if (!(dt > 0.0)) throw DegenerateInput("predict: dt must be positive");
  const Eigen::MatrixXd f = transition_matrix(slot.model, dt);
  FilterSlot out = slot;
  out.mean = f * slot.mean;
  out.covariance = f * slot.covariance * f.transpose() + process_noise(slot.model, cfg, dt);
  symmetrize(out.covariance);
  return out;
}

KalmanCorrection kalman_update(const Eigen::VectorXd& mean, const Eigen::MatrixXd& covariance,
                               const Eigen::MatrixXd& observation, const Eigen::MatrixXd& noise,
                               const Eigen::VectorXd& z, int angle_row) {
  KalmanCorrection out;
  out.residual = z - observation * mean;
  if (angle_row >= 0) out.residual(angle_row) = wrap_angle(out.residual(angle_row));
  out.innovation = observation * covariance * observation.transpose() + noise;
  symmetrize(out.innovation);
  const Eigen::LLT<Eigen::MatrixXd> llt(out.innovation);
  if (llt.info() != Eigen::Success) {
    throw SingularInnovation("update: innovation covariance is not positive definite");
  }
  // K = P H^T S^-1, computed as (S^-1 H P)^T.
  const Eigen::MatrixXd gain = llt.solve(observation * covariance).transpose();
  out.mean = mean + gain * out.residual;
  const Eigen::MatrixXd ikh =
      Eigen::MatrixXd::Identity(mean.size(), mean.size()) - gain * observation;
  out.covariance = ikh * covariance * ikh.transpose() + gain * noise * gain.transpose();
  symmetrize(out.covariance);
  return out;
}

SlotUpdate update(const FilterSlot& slot, const Measurement& z, const TrackingConfig& cfg) {
  const bool has_theta = theta_index(slot.model) >= 0;
  KalmanCorrection c = kalman_update(slot.mean, slot.covariance, observation_matrix(slot.model),
                                     measurement_noise(slot.model, cfg),
                                     measurement_vector(slot.model, z), has_theta ? 2 : -1);
  SlotUpdate out;
  out.slot = slot;
  out.slot.mean = std::move(c.mean);
  out.slot.covariance = std::move(c.covariance);
  out.residual = std::move(c.residual);
  out.innovation = std::move(c.innovation);
  return out;
}

double log_gaussian_density(const Eigen::VectorXd& r, const Eigen::MatrixXd& s) {
  const Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) {
    throw SingularInnovation("density: covariance is not positive definite");
  }
  const Eigen::MatrixXd l = llt.matrixL();
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  const double maha = r.dot(llt.solve(r));
  const double m = static_cast<double>(r.size());
  return -0.5 * (m * std::log(2.0 * kPi) + log_det + maha);
}

double gaussian_density(const Eigen::VectorXd& r, const Eigen::MatrixXd& s) {
  return std::exp(log_gaussian_density(r, s));
}

std::array<double, 3> mma_probabilities(const std::array<double, 3>& prior,
                                        const std::array<double, 3>& log_likelihoods,
                                        double p_floor) {
  std::array<double, 3> logp{};
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 3; ++i) {
    logp[i] = prior[i] > 0.0 ? std::log(prior[i]) + log_likelihoods[i]
                             : -std::numeric_limits<double>::infinity();
    top = std::max(top, logp[i]);
  }
  std::array<double, 3> p = prior;
  if (std::isfinite(top)) {
    double sum = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      p[i] = std::exp(logp[i] - top);
      sum += p[i];
    }
    for (double& v : p) v /= sum;
  }

  // Floor, then rescale the unfloored entries so the total stays one.
  std::array<bool, 3> floored{};
  for (int pass = 0; pass < 3; ++pass) {
    double free_mass = 0.0;
    int n_floored = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      if (!floored[i] && p[i] < p_floor) floored[i] = true;
      if (floored[i]) {
        ++n_floored;
      } else {
        free_mass += p[i];
      }
    }
    const double target = 1.0 - n_floored * p_floor;
    bool changed = false;
    for (std::size_t i = 0; i < 3; ++i) {
      if (floored[i]) {
        p[i] = p_floor;
      } else if (free_mass > 0.0) {
        p[i] *= target / free_mass;
        changed = changed || p[i] < p_floor;
      }
    }
    if (!changed) break;
  }
  return p;
}

namespace {

TrackPoint snapshot(const Track& track, double timestamp, bool measured) {
  TrackPoint tp;
  tp.timestamp = timestamp;
  const std::size_t best = track.best_slot();
  tp.best_model = track.slots[best].model;
  tp.corner = track.slots[best].position();
  tp.heading = track.heading;
  for (std::size_t i = 0; i < 3; ++i) {
    const FilterSlot& s = track.slots[i];
    tp.slot_corners[i] = s.position();
    tp.probabilities[i] = s.probability;
    tp.mixture_corner = tp.mixture_corner + s.probability * s.position();
  }
  tp.measured = measured;
  return tp;
}

}  // namespace

Track init_track(int id, const OrientedRect& rect, double timestamp, const TrackingConfig& cfg) {
  Track track;
  track.id = id;
  track.anchor = anchor_of_corner(rect, rect.nearest_corner_index, rect.heading);
  track.heading = track.anchor.reference_heading;
  const Point2 c = rect.nearest_corner();
  const Measurement z{c.x, c.y, track.heading};
  for (std::size_t i = 0; i < 3; ++i) {
    double p = 1.0 / 3.0;
    if (cfg.single_model) p = kAllModels[i] == *cfg.single_model ? 1.0 : 0.0;
    track.slots[i] = initial_slot(kAllModels[i], z, p);
  }
  observe_extent(track, rect);
  track.last_time = timestamp;
  track.history.push_back(snapshot(track, timestamp, true));
  return track;
}

Track mma_step(Track track, const Measurement& z, double dt, const TrackingConfig& cfg) {
  std::array<double, 3> prior{}, loglik{};
  std::array<FilterSlot, 3> corrected;
  for (std::size_t i = 0; i < 3; ++i) {
    const FilterSlot predicted = predict(track.slots[i], dt, cfg);
    SlotUpdate u = update(predicted, z, cfg);
    prior[i] = track.slots[i].probability;
    loglik[i] = log_gaussian_density(u.residual.head<2>(), u.innovation.topLeftCorner<2, 2>());
    corrected[i] = std::move(u.slot);
  }
  const std::array<double, 3> post =
      cfg.single_model ? prior : mma_probabilities(prior, loglik, cfg.p_floor);
  for (std::size_t i = 0; i < 3; ++i) {
    corrected[i].probability = post[i];
    track.slots[i] = std::move(corrected[i]);
  }
  const FilterSlot& best = track.slots[track.best_slot()];
  const int th = theta_index(best.model);
  track.heading = th >= 0 ? best.mean(th) : z.theta;
  track.last_time += dt;
  track.history.push_back(snapshot(track, track.last_time, true));
  return track;
}

Track lifecycle_step(Track track, bool matched, const TrackingConfig& cfg, double dt) {
  if (track.lifecycle == Lifecycle::Dead) return track;
  if (matched) {
    ++track.hits;
    track.misses = 0;
    if (track.lifecycle == Lifecycle::Tentative && track.hits >= cfg.confirm_hits) {
      track.lifecycle = Lifecycle::Confirmed;
    }
    return track;
  }
  ++track.misses;
  if (dt > 0.0) {
    for (FilterSlot& slot : track.slots) slot = predict(slot, dt, cfg);
    track.last_time += dt;
    track.history.push_back(snapshot(track, track.last_time, false));
  }
  if (track.misses >= cfg.max_misses) track.lifecycle = Lifecycle::Dead;
  return track;
}

void observe_extent(Track& track, const OrientedRect& rect) {
  constexpr std::size_t kMaxSamples = 256;
  const std::array<double, 2> e = extent_along(rect, track.anchor.reference_heading);
  for (std::size_t axis = 0; axis < 2; ++axis) {
    std::vector<double>& samples = track.extent_samples[axis];
    if (samples.size() == kMaxSamples) samples.erase(samples.begin());
    samples.push_back(e[axis]);
  }
}

Measurement corner_switch_compensate(const Track& track, const OrientedRect& rect) {
  const Point2 c = compensated_corner(rect, track.anchor, track.extent());
  return {c.x, c.y, aligned_heading(rect, track.anchor.reference_heading)};
}

TrackPrediction predict_for_association(const Track& track, double t, const TrackingConfig& cfg) {
  TrackPrediction p;
  p.heading = track.heading;
  p.anchor = track.anchor;
  p.extent = track.extent();
  const double dt = t - track.last_time;
  std::array<FilterSlot, 3> slots = track.slots;
  if (dt > 0.0) {
    for (FilterSlot& s : slots) s = predict(s, dt, cfg);
  }
  for (const FilterSlot& s : slots) {
    if (cfg.single_model && s.model != *cfg.single_model) continue;
    p.gates.push_back({s.mean.head<2>(), s.covariance.topLeftCorner<2, 2>()});
  }
  p.corner = slots[track.best_slot()].position();
  return p;
}

}  // namespace vtrack
