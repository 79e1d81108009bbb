#include "vtrack/sim.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "vtrack/errors.hpp"
#include "vtrack/random.hpp"

namespace vtrack {

std::string_view to_string(ViewType view) {
  switch (view) {
    case ViewType::LShape: return "lshape";
    case ViewType::Side: return "side";
    case ViewType::Rear: return "rear";
    case ViewType::None: return "none";
  }
  return "none";
}

ViewType view_from_string(std::string_view name) {
  for (ViewType v : {ViewType::LShape, ViewType::Side, ViewType::Rear, ViewType::None}) {
    if (to_string(v) == name) return v;
  }
  throw ParseError("unknown view type '" + std::string(name) + "'");
}

const VehicleTruth* FrameTruth::find(int id) const {
  for (const VehicleTruth& v : vehicles) {
    if (v.id == id) return &v;
  }
  return nullptr;
}

const FrameTruth* GroundTruth::find(std::int64_t frame_id) const {
  // Frames are stored in id order by the simulator and the reader.
  auto it = std::lower_bound(frames.begin(), frames.end(), frame_id,
                             [](const FrameTruth& f, std::int64_t id) { return f.frame_id < id; });
  if (it != frames.end() && it->frame_id == frame_id) return &*it;
  for (const FrameTruth& f : frames) {
    if (f.frame_id == frame_id) return &f;
  }
  return nullptr;
}

std::size_t ScenarioSpec::frame_count() const {
  return static_cast<std::size_t>(std::floor(duration * scan_rate + 1e-9));
}

void ScenarioSpec::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw InvalidSpec("'" + key + "' " + why);
  };
  if (!(duration > 0.0) || !std::isfinite(duration)) fail("duration", "must be positive");
  if (!(scan_rate > 0.0) || !std::isfinite(scan_rate)) fail("scan_rate", "must be positive");
  if (!(sensor.resolution > 0.0)) fail("sensor.resolution_deg", "must be positive");
  if (!(sensor.max_range > 0.0)) fail("sensor.max_range", "must be positive");
  if (sensor.layers < 1 || sensor.layers > 4) fail("sensor.layers", "must be in 1..4");
  if (!(sensor.noise_sigma >= 0.0)) fail("sensor.noise_sigma", "must be >= 0");
  if (!(sensor.outlier_rate >= 0.0 && sensor.outlier_rate < 1.0)) {
    fail("sensor.outlier_rate", "must lie in [0, 1)");
  }
  if (!(sensor.jitter >= 0.0)) fail("sensor.jitter_deg", "must be >= 0");
  std::set<int> ids;
  for (const VehicleSpec& v : vehicles) {
    const std::string prefix = "vehicle." + std::to_string(v.id) + ".";
    if (!ids.insert(v.id).second) fail(prefix + "id", "is duplicated");
    if (!(v.length > 0.0)) fail(prefix + "length", "must be positive");
    if (!(v.width > 0.0)) fail(prefix + "width", "must be positive");
    if (!(v.despawn > v.spawn)) fail(prefix + "despawn", "must be after spawn");
    for (double f : {v.x, v.y, v.heading, v.vx, v.vy, v.ax, v.ay, v.spawn}) {
      if (!std::isfinite(f)) fail(prefix + "pose", "must be finite");
    }
  }
}

Pose pose_at(const VehicleSpec& v, double t) {
  const double tau = t - v.spawn;
  switch (v.motion) {
    case ModelKind::Stationary:
      return {v.x, v.y, v.heading};
    case ModelKind::ConstVelocity:
      return {v.x + v.vx * tau, v.y + v.vy * tau, v.heading};
    case ModelKind::ConstAcceleration: {
      const double vx = v.vx + v.ax * tau;
      const double vy = v.vy + v.ay * tau;
      double heading = v.heading;
      // The body turns with the velocity vector once both are well defined.
      if (std::hypot(v.vx, v.vy) >= 0.5 && std::hypot(vx, vy) >= 0.5) {
        heading += wrap_angle(std::atan2(vy, vx) - std::atan2(v.vy, v.vx));
      }
      return {v.x + v.vx * tau + 0.5 * v.ax * tau * tau,
              v.y + v.vy * tau + 0.5 * v.ay * tau * tau, heading};
    }
  }
  return {v.x, v.y, v.heading};
}

std::array<Point2, 4> footprint(const Pose& pose, double length, double width) {
  const Point2 c{pose.x, pose.y};
  const double hl = 0.5 * length, hw = 0.5 * width;
  return {c + rotate({-hl, -hw}, pose.heading), c + rotate({hl, -hw}, pose.heading),
          c + rotate({hl, hw}, pose.heading), c + rotate({-hl, hw}, pose.heading)};
}

namespace {

double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }

struct ActiveVehicle {
  const VehicleSpec* spec;
  std::array<Point2, 4> corners;
  double center_bearing;
  double half_angle;  // angular radius of the circumcircle; pi when enclosing
  std::array<int, 4> edge_hits{};
  int hits = 0;
};

struct Hit {
  double range;
  int vehicle = -1;
  int edge = -1;
};

Hit cast_ray(double bearing, std::vector<ActiveVehicle>& vehicles, double max_range) {
  const Point2 dir = unit(bearing);
  Hit best{std::numeric_limits<double>::infinity()};
  for (std::size_t vi = 0; vi < vehicles.size(); ++vi) {
    const ActiveVehicle& v = vehicles[vi];
    if (std::abs(wrap_angle(bearing - v.center_bearing)) > v.half_angle) continue;
    for (int e = 0; e < 4; ++e) {
      const Point2 p = v.corners[e];
      const Point2 edge = v.corners[(e + 1) % 4] - p;
      const double denom = cross(dir, edge);
      if (std::abs(denom) < 1e-15) continue;
      const double t = cross(p, edge) / denom;
      const double s = cross(p, dir) / denom;
      if (t > 0.0 && s >= 0.0 && s <= 1.0 && t < best.range) {
        best = {t, static_cast<int>(vi), e};
      }
    }
  }
  if (best.range > max_range) return {best.range, -1, -1};
  return best;
}

ViewType classify_view(const ActiveVehicle& v) {
  // An edge counts as observed with enough returns to support a line.
  int seen = 0, seen_edge = -1;
  for (int e = 0; e < 4; ++e) {
    if (v.edge_hits[e] >= 4 && v.edge_hits[e] >= 0.05 * v.hits) {
      ++seen;
      seen_edge = e;
    }
  }
  if (seen >= 2) return ViewType::LShape;
  if (seen == 0) return ViewType::None;
  // Edges 0 and 2 are the long sides of the footprint.
  return seen_edge % 2 == 0 ? ViewType::Side : ViewType::Rear;
}

}  // namespace

SimOutput simulate(const ScenarioSpec& spec, std::uint64_t seed) {
  spec.validate();
  SimOutput out;
  const std::size_t frames = spec.frame_count();
  const auto rays = static_cast<std::size_t>(std::llround(2.0 * kPi / spec.sensor.resolution));
  const double step = 2.0 * kPi / static_cast<double>(rays);

  for (std::size_t f = 0; f < frames; ++f) {
    const double t = static_cast<double>(f) / spec.scan_rate;
    Rng rng(mix_seed(seed, f));

    std::vector<ActiveVehicle> active;
    for (const VehicleSpec& v : spec.vehicles) {
      if (t < v.spawn || t >= v.despawn) continue;
      const Pose pose = pose_at(v, t);
      ActiveVehicle a{&v, footprint(pose, v.length, v.width), std::atan2(pose.y, pose.x), kPi};
      const double dist = std::hypot(pose.x, pose.y);
      const double radius = 0.5 * std::hypot(v.length, v.width);
      if (dist > radius + 1e-9) a.half_angle = std::asin(radius / dist) + 1e-6;
      active.push_back(a);
    }

    Scan scan;
    scan.frame_id = static_cast<std::int64_t>(f);
    scan.timestamp = t;
    for (int layer = 0; layer < spec.sensor.layers; ++layer) {
      for (std::size_t k = 0; k < rays; ++k) {
        const double bearing = wrap_angle(-kPi + (static_cast<double>(k) + 0.5) * step +
                                          spec.sensor.jitter * rng.normal());
        const Hit hit = cast_ray(bearing, active, spec.sensor.max_range);
        if (hit.vehicle < 0) continue;
        ActiveVehicle& v = active[static_cast<std::size_t>(hit.vehicle)];
        ++v.edge_hits[static_cast<std::size_t>(hit.edge)];
        ++v.hits;
        double range = hit.range + spec.sensor.noise_sigma * rng.normal();
        int label = v.spec->id;
        if (rng.uniform() < spec.sensor.outlier_rate) {
          range = (1.0 - rng.uniform()) * spec.sensor.max_range;
          label = -1;
        }
        range = std::max(range, 1e-3);
        scan.points.push_back({range * unit(bearing), layer, range, bearing});
        scan.labels.push_back(label);
      }
    }
    scan.sort_points();

    FrameTruth truth;
    truth.frame_id = scan.frame_id;
    truth.timestamp = t;
    for (const ActiveVehicle& a : active) {
      VehicleTruth vt;
      vt.id = a.spec->id;
      vt.pose = pose_at(*a.spec, t);
      vt.length = a.spec->length;
      vt.width = a.spec->width;
      vt.corners = a.corners;
      vt.motion = a.spec->motion;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < 4; ++i) {
        if (a.corners[i].norm() < best) {
          best = a.corners[i].norm();
          vt.nearest_corner_index = i;
        }
      }
      vt.num_points = static_cast<int>(std::count(scan.labels.begin(), scan.labels.end(), vt.id));
      vt.view = classify_view(a);
      truth.vehicles.push_back(vt);
    }
    out.scans.push_back(std::move(scan));
    out.truth.frames.push_back(std::move(truth));
  }
  return out;
}

ViewHistogram view_histogram(const GroundTruth& truth) {
  ViewHistogram h;
  for (const FrameTruth& f : truth.frames) {
    for (const VehicleTruth& v : f.vehicles) {
      switch (v.view) {
        case ViewType::LShape: ++h.lshape; break;
        case ViewType::Side: ++h.side; break;
        case ViewType::Rear: ++h.rear; break;
        case ViewType::None: break;
      }
    }
  }
  return h;
}

namespace {

VehicleSpec moving(int id, ModelKind motion, double x, double y, double heading, double speed,
                   double accel = 0.0) {
  VehicleSpec v;
  v.id = id;
  v.motion = motion;
  v.x = x;
  v.y = y;
  v.heading = heading;
  v.vx = speed * std::cos(heading);
  v.vy = speed * std::sin(heading);
  v.ax = accel * std::cos(heading);
  v.ay = accel * std::sin(heading);
  return v;
}

VehicleSpec parked(int id, double x, double y, double heading) {
  VehicleSpec v;
  v.id = id;
  v.motion = ModelKind::Stationary;
  v.x = x;
  v.y = y;
  v.heading = heading;
  return v;
}

void jitter_size(VehicleSpec& v, Rng& rng) {
  v.length = 4.5 + rng.uniform(-0.3, 0.3);
  v.width = 1.8 + rng.uniform(-0.1, 0.1);
}

}  // namespace

ScenarioSpec tableI_scenario(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x7AB1E1));
  ScenarioSpec s;
  s.scan_rate = 12.5;
  s.duration = 137.0 / 12.5;

  // Follower straight ahead in the sensor's lane: rear-only view.
  VehicleSpec lead = moving(1, ModelKind::ConstVelocity, 12.0 + rng.uniform(-1, 1),
                            rng.uniform(-0.3, 0.3), rng.uniform(-0.04, 0.04), 0.5);
  lead.despawn = 1.6;
  // Drive-by in the left lane: side-only while abreast of the sensor.
  VehicleSpec pass = moving(2, ModelKind::ConstVelocity, -30.0, 3.7 + rng.uniform(-0.3, 0.3),
                            rng.uniform(-0.015, 0.015), 6.0 + rng.uniform(-0.5, 0.5));
  VehicleSpec park_front =
      parked(3, 9.0 + rng.uniform(-1, 1), -8.5 + rng.uniform(-0.5, 0.5), rng.uniform(-0.35, 0.35));
  park_front.spawn = 2.0;
  VehicleSpec park_rear =
      parked(4, -9.0 + rng.uniform(-1, 1), -7.5 + rng.uniform(-0.5, 0.5), rng.uniform(-0.35, 0.35));
  park_rear.despawn = 6.0;
  VehicleSpec oncoming = moving(5, ModelKind::ConstVelocity, 30.0 + rng.uniform(-2, 2),
                                -5.5 + rng.uniform(-0.3, 0.3), kPi + rng.uniform(-0.03, 0.03), 1.0);
  VehicleSpec merging = moving(6, ModelKind::ConstAcceleration, -35.0,
                               -3.7 + rng.uniform(-0.3, 0.3), rng.uniform(-0.03, 0.03), 2.0, 0.5);
  merging.spawn = 5.0;

  for (VehicleSpec* v : {&lead, &pass, &park_front, &park_rear, &oncoming, &merging}) {
    jitter_size(*v, rng);
    s.vehicles.push_back(*v);
  }
  return s;
}

SimOutput corpus_tableI(std::uint64_t seed) { return simulate(tableI_scenario(seed), seed); }

ScenarioSpec mixed_scenario(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x313ED));
  ScenarioSpec s;
  s.scan_rate = 12.5;
  s.duration = 10.0;
  auto u = [&](double lo, double hi) { return rng.uniform(lo, hi); };
  s.vehicles = {
      parked(1, 10.0 + u(-1, 1), -8.0 + u(-0.5, 0.5), u(-0.35, 0.35)),
      parked(2, -8.0 + u(-1, 1), -10.0 + u(-0.5, 0.5), u(-0.35, 0.35)),
      parked(3, -3.0 + u(-1, 1), 10.0 + u(-0.5, 0.5), u(-0.35, 0.35)),
      moving(4, ModelKind::ConstVelocity, 6.0 + u(-1, 1), 4.0 + u(-0.3, 0.3), u(-0.03, 0.03),
             3.0 + u(-0.5, 0.5)),
      moving(5, ModelKind::ConstVelocity, -12.0 + u(-1, 1), -4.0 + u(-0.3, 0.3),
             kPi + u(-0.03, 0.03), 2.5 + u(-0.5, 0.5)),
      moving(6, ModelKind::ConstAcceleration, -10.0 + u(-1, 1), 5.0 + u(-0.3, 0.3),
             kPi + u(-0.03, 0.03), 1.5, 0.4),
  };
  for (VehicleSpec& v : s.vehicles) jitter_size(v, rng);
  return s;
}

ScenarioSpec three_vehicle_scenario(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x3EE));
  ScenarioSpec s;
  s.scan_rate = 12.5;
  s.duration = 10.0;
  auto u = [&](double lo, double hi) { return rng.uniform(lo, hi); };
  s.vehicles = {
      moving(1, ModelKind::ConstVelocity, -25.0 + u(-2, 2), 4.0 + u(-0.3, 0.3), u(-0.02, 0.02),
             5.0 + u(-0.5, 0.5)),
      parked(2, 9.0 + u(-1, 1), -8.0 + u(-0.5, 0.5), u(-0.35, 0.35)),
      moving(3, ModelKind::ConstVelocity, -8.0 + u(-1, 1), -4.0 + u(-0.3, 0.3),
             kPi + u(-0.03, 0.03), 2.5 + u(-0.5, 0.5)),
  };
  for (VehicleSpec& v : s.vehicles) jitter_size(v, rng);
  return s;
}

ScenarioSpec single_vehicle_scenario(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x51));
  ScenarioSpec s;
  s.scan_rate = 12.5;
  s.duration = 8.0;
  VehicleSpec v = moving(1, ModelKind::ConstVelocity, -20.0 + rng.uniform(-1, 1),
                         4.0 + rng.uniform(-0.3, 0.3), rng.uniform(-0.02, 0.02), 5.0);
  jitter_size(v, rng);
  s.vehicles.push_back(v);
  return s;
}

}  // namespace vtrack
