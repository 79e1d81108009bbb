#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include "vtrack/geometry.hpp"
#include "vtrack/segmentation.hpp"
#include "vtrack/tracking.hpp"

namespace vtrack {

struct SensorSpec {
  double resolution = deg2rad(0.25);  // radians between rays
  double max_range = 50.0;
  int layers = 4;
  double noise_sigma = 0.05;
  double outlier_rate = 0.02;
  double jitter = deg2rad(0.1);  // per-ray bearing jitter (std), radians
};

struct VehicleSpec {
  int id = 0;
  double length = 4.5;
  double width = 1.8;
  ModelKind motion = ModelKind::Stationary;
  double x = 0.0, y = 0.0, heading = 0.0;  // pose at spawn time
  double vx = 0.0, vy = 0.0;
  double ax = 0.0, ay = 0.0;
  double spawn = 0.0;
  double despawn = std::numeric_limits<double>::infinity();
};

struct ScenarioSpec {
  double duration = 10.0;
  double scan_rate = 12.5;
  SensorSpec sensor;
  std::vector<VehicleSpec> vehicles;

  std::size_t frame_count() const;
  /// Throws InvalidSpec naming the offending field.
  void validate() const;
};

struct Pose {
  double x = 0.0, y = 0.0, heading = 0.0;
};

enum class ViewType { LShape, Side, Rear, None };
std::string_view to_string(ViewType view);
ViewType view_from_string(std::string_view name);

struct VehicleTruth {
  int id = 0;
  Pose pose;
  double length = 0.0, width = 0.0;
  std::array<Point2, 4> corners{};  // CCW, corner 0 = rear right
  int nearest_corner_index = 0;
  int num_points = 0;  // returns labelled with this id
  ViewType view = ViewType::None;
  ModelKind motion = ModelKind::Stationary;

  Point2 nearest_corner() const { return corners[nearest_corner_index]; }
  bool moving() const { return motion != ModelKind::Stationary; }
};

struct FrameTruth {
  std::int64_t frame_id = 0;
  double timestamp = 0.0;
  std::vector<VehicleTruth> vehicles;

  const VehicleTruth* find(int id) const;
};

struct GroundTruth {
  std::vector<FrameTruth> frames;

  const FrameTruth* find(std::int64_t frame_id) const;
};

struct SimOutput {
  std::vector<Scan> scans;
  GroundTruth truth;
};

/// Closed-form pose of a vehicle at absolute time t.
Pose pose_at(const VehicleSpec& v, double t);
std::array<Point2, 4> footprint(const Pose& pose, double length, double width);

/// Ray-casts every frame of the scenario. Deterministic per seed; frames are
/// independent of each other.
SimOutput simulate(const ScenarioSpec& spec, std::uint64_t seed);

struct ViewHistogram {
  std::size_t lshape = 0, side = 0, rear = 0;
  std::size_t total() const { return lshape + side + rear; }
};
ViewHistogram view_histogram(const GroundTruth& truth);

/// Desk-scale stand-in for the labelled dataset: six vehicles over 137
/// frames at 12.5 Hz, mostly L-shape views with one rear-only follower and
/// one side-on drive-by. Geometry is jittered by the seed.
ScenarioSpec tableI_scenario(std::uint64_t seed);
SimOutput corpus_tableI(std::uint64_t seed);

/// Three parked and three moving vehicles with clear lines of sight.
ScenarioSpec mixed_scenario(std::uint64_t seed);

/// Three vehicles on non-crossing paths, one of them driving past the sensor.
ScenarioSpec three_vehicle_scenario(std::uint64_t seed);

/// A single vehicle driving by.
ScenarioSpec single_vehicle_scenario(std::uint64_t seed);

}  // namespace vtrack
