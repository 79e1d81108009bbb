#include "vtrack/geometry.hpp"

#include <algorithm>
#include <limits>
#include <tuple>
#include <utility>

#include "vtrack/errors.hpp"

namespace vtrack {

double canonical_heading(double angle) {
  double h = std::fmod(angle, kPi);
  if (h < 0.0) h += kPi;
  if (h >= kPi) h -= kPi;
  return h;
}

double wrap_angle(double angle) {
  double w = std::remainder(angle, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

Line2 Line2::from_coefficients(double a, double b, double c) {
  const double n = std::hypot(a, b);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw DegenerateInput("line normal has zero length");
  }
  return {a / n, b / n, c / n};
}

Line2 Line2::from_point_heading(Point2 p, double heading) {
  const double a = -std::sin(heading);
  const double b = std::cos(heading);
  return {a, b, -(a * p.x + b * p.y)};
}

double Line2::heading() const { return canonical_heading(std::atan2(-a, b)); }

Line2 line_through(Point2 p, Point2 q) {
  const Point2 d = q - p;
  if (d.norm() <= 1e-12) {
    throw DegenerateInput("line_through: points coincide");
  }
  return Line2::from_point_heading(p, std::atan2(d.y, d.x));
}

double point_line_distance(Point2 p, const Line2& l) {
  return std::abs(l.signed_distance(p));
}

namespace {

struct Scatter {
  Point2 centroid;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
};

Scatter scatter_of(std::span<const Point2> points) {
  Scatter s;
  const double n = static_cast<double>(points.size());
  for (const Point2& p : points) {
    s.centroid.x += p.x;
    s.centroid.y += p.y;
  }
  s.centroid = (1.0 / n) * s.centroid;
  for (const Point2& p : points) {
    const Point2 d = p - s.centroid;
    s.sxx += d.x * d.x;
    s.syy += d.y * d.y;
    s.sxy += d.x * d.y;
  }
  return s;
}

}  // namespace

Line2 fit_line_tls(std::span<const Point2> points) {
  if (points.size() < 2) {
    throw DegenerateInput("fit_line_tls: need at least two points");
  }
  const Scatter s = scatter_of(points);
  if (s.sxx + s.syy <= 1e-24) {
    throw DegenerateInput("fit_line_tls: all points coincide");
  }
  // Major axis of the 2x2 scatter matrix.
  const double phi = 0.5 * std::atan2(2.0 * s.sxy, s.sxx - s.syy);
  return Line2::from_point_heading(s.centroid, phi);
}

double tls_residual_variance(std::span<const Point2> points) {
  if (points.size() < 2) return 0.0;
  const Scatter s = scatter_of(points);
  if (s.sxx + s.syy <= 1e-24) return 0.0;
  // Smallest eigenvalue of the scatter matrix divided by n.
  const double tr = s.sxx + s.syy;
  const double det = s.sxx * s.syy - s.sxy * s.sxy;
  const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
  return std::max(0.0, 0.5 * tr - disc) / static_cast<double>(points.size());
}

OrientedRect OrientedRect::from_bounds(double heading, double u_min, double u_max,
                                       double v_min, double v_max) {
  const double h = canonical_heading(heading);
  const long turns = std::lround((heading - h) / kPi);
  if (turns % 2 != 0) {
    std::tie(u_min, u_max) = std::pair{-u_max, -u_min};
    std::tie(v_min, v_max) = std::pair{-v_max, -v_min};
  }
  const Point2 eu = unit(h);
  const Point2 ev{-eu.y, eu.x};
  OrientedRect r;
  r.heading = h;
  r.corners = {u_min * eu + v_min * ev, u_max * eu + v_min * ev,
               u_max * eu + v_max * ev, u_min * eu + v_max * ev};
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    const double d = r.corners[i].norm();
    if (d < best) {
      best = d;
      r.nearest_corner_index = i;
    }
  }
  return r;
}

Point2 OrientedRect::center() const {
  return 0.5 * (corners[0] + corners[2]);
}

double OrientedRect::signed_area() const {
  double twice = 0.0;
  for (int i = 0; i < 4; ++i) {
    const Point2 a = corners[i], b = corners[(i + 1) % 4];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

double aligned_heading(const OrientedRect& rect, double reference) {
  double best = rect.heading;
  double best_gap = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 4; ++k) {
    const double candidate = rect.heading + k * 0.5 * kPi;
    const double gap = std::abs(wrap_angle(candidate - reference));
    if (gap < best_gap) {
      best_gap = gap;
      best = reference + wrap_angle(candidate - reference);
    }
  }
  return best;
}

CornerAnchor anchor_of_corner(const OrientedRect& rect, int corner_index,
                              double reference) {
  const double h = aligned_heading(rect, reference);
  const Point2 d = rect.corners[corner_index] - rect.center();
  const Point2 eu = unit(h);
  const Point2 ev{-eu.y, eu.x};
  return {h, d.dot(eu) >= 0.0 ? 1 : -1, d.dot(ev) >= 0.0 ? 1 : -1};
}

Point2 corner_at_anchor(const OrientedRect& rect, const CornerAnchor& anchor) {
  const double h = aligned_heading(rect, anchor.reference_heading);
  const Point2 c = rect.center();
  const Point2 eu = unit(h);
  const Point2 ev{-eu.y, eu.x};
  double half_u = 0.0, half_v = 0.0;
  for (const Point2& corner : rect.corners) {
    half_u = std::max(half_u, std::abs((corner - c).dot(eu)));
    half_v = std::max(half_v, std::abs((corner - c).dot(ev)));
  }
  return c + (anchor.forward * half_u) * eu + (anchor.left * half_v) * ev;
}

std::array<double, 2> extent_along(const OrientedRect& rect, double reference) {
  const Point2 eu = unit(aligned_heading(rect, reference));
  const Point2 ev{-eu.y, eu.x};
  const Point2 a = rect.corners[1] - rect.corners[0];
  const Point2 b = rect.corners[2] - rect.corners[1];
  return {std::abs(a.dot(eu)) + std::abs(b.dot(eu)), std::abs(a.dot(ev)) + std::abs(b.dot(ev))};
}

Point2 compensated_corner(const OrientedRect& rect, const CornerAnchor& anchor,
                          std::array<double, 2> extent) {
  const double h = aligned_heading(rect, anchor.reference_heading);
  const CornerAnchor nearest = anchor_of_corner(rect, rect.nearest_corner_index, anchor.reference_heading);
  if (nearest.forward == anchor.forward && nearest.left == anchor.left) return rect.nearest_corner();
  const std::array<double, 2> e = extent_along(rect, anchor.reference_heading);
  const Point2 eu = unit(h);
  const Point2 ev{-eu.y, eu.x};
  const double du = 0.5 * (anchor.forward - nearest.forward) * (extent[0] > 0.0 ? extent[0] : e[0]);
  const double dv = 0.5 * (anchor.left - nearest.left) * (extent[1] > 0.0 ? extent[1] : e[1]);
  return rect.nearest_corner() + du * eu + dv * ev;
}

}  // namespace vtrack
