#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "vtrack/association.hpp"
#include "vtrack/geometry.hpp"

namespace vtrack {

enum class ModelKind { Stationary, ConstVelocity, ConstAcceleration };

inline constexpr std::array<ModelKind, 3> kAllModels = {
    ModelKind::Stationary, ModelKind::ConstVelocity, ModelKind::ConstAcceleration};

std::string_view to_string(ModelKind kind);
ModelKind model_from_string(std::string_view name);

/// Full kinematic state (x, y, vx, vy, ax, ay, theta, delta). Slots carry a
/// model-specific subset; the rest reads as zero. delta is propagated but
/// never observed.
struct VehicleState {
  double x = 0, y = 0, vx = 0, vy = 0, ax = 0, ay = 0, theta = 0, delta = 0;
};

struct FilterSlot {
  ModelKind model = ModelKind::Stationary;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  double probability = 1.0 / 3.0;

  VehicleState state() const;
  Point2 position() const { return {mean(0), mean(1)}; }
};

/// Nearest-corner observation.
struct Measurement {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

struct TrackingConfig {
  double q_stationary = 1e-4;       // per step, all stationary states
  double q_cv_velocity = 0.1;       // CV velocity noise, as white acceleration (m^2/s^4)
  double q_ca_acceleration = 0.5;   // CA acceleration noise, as white jerk (m^2/s^6)
  double q_ca_heading = 1e-4;       // per step, CA theta and delta
  double r_position = 0.05;         // metres (std)
  double r_heading_deg = 2.0;       // degrees (std)
  int confirm_hits = 3;
  int max_misses = 5;
  double p_floor = 0.001;
  /// Runs the bank as one fixed model: that slot keeps probability 1 and
  /// alone gates detections. Used as the single-model baseline.
  std::optional<ModelKind> single_model;
};

enum class Lifecycle { Tentative, Confirmed, Dead };
std::string_view to_string(Lifecycle state);

struct TrackPoint {
  double timestamp = 0.0;
  Point2 corner;          // highest-probability slot
  double heading = 0.0;
  Point2 mixture_corner;  // probability-weighted slot positions
  std::array<Point2, 3> slot_corners{};
  std::array<double, 3> probabilities{};
  ModelKind best_model = ModelKind::Stationary;
  bool measured = false;
};

struct Track {
  int id = 0;
  std::array<FilterSlot, 3> slots;
  Lifecycle lifecycle = Lifecycle::Tentative;
  int hits = 0;
  int misses = 0;
  double last_time = 0.0;
  CornerAnchor anchor;
  double heading = 0.0;  // last fused heading, continuous
  /// Recent rectangle sizes along and across the reference heading.
  std::array<std::vector<double>, 2> extent_samples;
  std::vector<TrackPoint> history;

  std::size_t best_slot() const;
  /// Upper quartile of the recent sizes on each axis. Partial views shorten
  /// edges and stray points lengthen them; the quartile resists both.
  std::array<double, 2> extent() const;
  Point2 corner() const { return slots[best_slot()].position(); }
  double probability_sum() const;
};

/// State transition of `model` over dt (identity for Stationary).
Eigen::MatrixXd transition_matrix(ModelKind model, double dt);
/// Stationary and the CA heading states take their q per step. CV and CA
/// draw one white-noise value per step on velocity (CV) or acceleration (CA)
/// and carry it into the lower states with the kinematic gain, so CV noise
/// is q * [dt^2/2, dt]^T [dt^2/2, dt] per axis.
Eigen::MatrixXd process_noise(ModelKind model, const TrackingConfig& cfg, double dt);
Eigen::MatrixXd observation_matrix(ModelKind model);
Eigen::MatrixXd measurement_noise(ModelKind model, const TrackingConfig& cfg);
/// Measurement restricted to the components `model` observes.
Eigen::VectorXd measurement_vector(ModelKind model, const Measurement& z);

/// Slot initialised from a first detection: zero rates, diagonal prior
/// (1, 1, 4, 4, 1, 1, 0.1, 0.1) restricted to the model's states.
FilterSlot initial_slot(ModelKind model, const Measurement& z, double probability);

/// mean <- F mean, covariance <- F P F^T + Q. Throws DegenerateInput for dt <= 0.
FilterSlot predict(const FilterSlot& slot, double dt, const TrackingConfig& cfg);

struct KalmanCorrection {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  Eigen::VectorXd residual;    // pre-fit residual z - H x
  Eigen::MatrixXd innovation;  // H P H^T + R
};

/// Standard (Joseph form) KF correction. `angle_row`, when >= 0, is the
/// measurement row holding an angle; its residual is wrapped to (-pi, pi].
/// Throws SingularInnovation.
KalmanCorrection kalman_update(const Eigen::VectorXd& mean, const Eigen::MatrixXd& covariance,
                               const Eigen::MatrixXd& observation, const Eigen::MatrixXd& noise,
                               const Eigen::VectorXd& z, int angle_row = -1);

struct SlotUpdate {
  FilterSlot slot;
  Eigen::VectorXd residual;
  Eigen::MatrixXd innovation;
};

SlotUpdate update(const FilterSlot& slot, const Measurement& z, const TrackingConfig& cfg);

/// Multivariate normal density of r under covariance S (and its log).
double gaussian_density(const Eigen::VectorXd& r, const Eigen::MatrixXd& s);
double log_gaussian_density(const Eigen::VectorXd& r, const Eigen::MatrixXd& s);

/// p_n <- f_n p_n / sum_j f_j p_j from log-likelihoods, then floored at
/// p_floor with the remainder renormalised. Priors are kept when every
/// product underflows.
std::array<double, 3> mma_probabilities(const std::array<double, 3>& prior,
                                        const std::array<double, 3>& log_likelihoods,
                                        double p_floor);

/// Creates a tentative track following the nearest corner of `rect`.
Track init_track(int id, const OrientedRect& rect, double timestamp, const TrackingConfig& cfg);

/// Predict, score, reweight and correct every slot with measurement z.
/// Slot likelihoods are evaluated on the position components, which all
/// three models observe.
Track mma_step(Track track, const Measurement& z, double dt, const TrackingConfig& cfg);

/// Hit/miss bookkeeping. Unmatched tracks coast by dt (when dt > 0).
Track lifecycle_step(Track track, bool matched, const TrackingConfig& cfg, double dt = 0.0);

/// Measurement of the corner the track follows, taken from `rect`. When the
/// nearest corner of `rect` is a different physical corner, the measurement
/// is shifted along the rectangle axes onto the followed corner, by the
/// track's extent estimate.
Measurement corner_switch_compensate(const Track& track, const OrientedRect& rect);

/// Records the size of `rect` in track.extent_samples.
void observe_extent(Track& track, const OrientedRect& rect);

/// Per-slot predictions at time t packaged for association.
TrackPrediction predict_for_association(const Track& track, double t, const TrackingConfig& cfg);

}  // namespace vtrack
