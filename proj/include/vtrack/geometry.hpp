#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>

namespace vtrack {

inline constexpr double kPi = std::numbers::pi;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend bool operator==(Point2, Point2) = default;

  double dot(Point2 o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline double distance(Point2 a, Point2 b) { return (a - b).norm(); }

/// Rotates `p` about the origin by `angle` radians.
inline Point2 rotate(Point2 p, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

inline Point2 unit(double angle) { return {std::cos(angle), std::sin(angle)}; }

/// Maps any angle onto [0, pi); lines and rectangle axes carry no sign.
double canonical_heading(double angle);

/// Maps any angle onto (-pi, pi].
double wrap_angle(double angle);

/// Homogeneous line a*x + b*y + c = 0 with a^2 + b^2 = 1.
struct Line2 {
  double a = 0.0;
  double b = 1.0;
  double c = 0.0;

  /// Normalizes arbitrary coefficients. Throws DegenerateInput if a = b = 0.
  static Line2 from_coefficients(double a, double b, double c);
  /// Line through `p` with direction angle `heading`.
  static Line2 from_point_heading(Point2 p, double heading);

  double signed_distance(Point2 p) const { return a * p.x + b * p.y + c; }
  /// Direction of the line in [0, pi).
  double heading() const;
};

Line2 line_through(Point2 p, Point2 q);
double point_line_distance(Point2 p, const Line2& l);

/// Total-least-squares line (minimum summed squared perpendicular distance).
Line2 fit_line_tls(std::span<const Point2> points);

/// Population variance of perpendicular residuals to the TLS line; 0 for
/// fewer than two distinct points.
double tls_residual_variance(std::span<const Point2> points);

/// Rectangle with corners in counter-clockwise order. Corner 0 is the
/// (min, min) corner of the frame spanned by (cos h, sin h), (-sin h, cos h).
struct OrientedRect {
  double heading = 0.0;
  std::array<Point2, 4> corners{};
  int nearest_corner_index = 0;
  double criterion_score = 0.0;

  /// Builds a rectangle from bounds along the heading axis (u) and its left
  /// normal (v). The nearest corner is selected relative to the origin.
  static OrientedRect from_bounds(double heading, double u_min, double u_max,
                                  double v_min, double v_max);

  Point2 center() const;
  Point2 nearest_corner() const { return corners[nearest_corner_index]; }
  /// Extent along the heading axis.
  double length() const { return distance(corners[0], corners[1]); }
  /// Extent across the heading axis.
  double width() const { return distance(corners[1], corners[2]); }
  double signed_area() const;
};

/// Identifies one rectangle corner by its side of the centre along a
/// reference direction (`forward`) and its left normal (`left`). Used to keep
/// following the same physical corner of a vehicle from frame to frame.
struct CornerAnchor {
  double reference_heading = 0.0;  // full direction, radians
  int forward = 1;                 // +1 / -1
  int left = 1;                    // +1 / -1

  friend bool operator==(const CornerAnchor&, const CornerAnchor&) = default;
};

/// Rectangle axis direction (heading + k*pi/2) closest to `reference`.
double aligned_heading(const OrientedRect& rect, double reference);

/// Anchor of corner `corner_index` with the axes aligned to `reference`.
CornerAnchor anchor_of_corner(const OrientedRect& rect, int corner_index,
                              double reference);

/// Position of the anchored corner in `rect` after aligning the rectangle
/// axes with the anchor's reference heading.
Point2 corner_at_anchor(const OrientedRect& rect, const CornerAnchor& anchor);

/// Rectangle size measured along and across `reference`.
std::array<double, 2> extent_along(const OrientedRect& rect, double reference);

/// The anchored corner reached from the nearest corner of `rect` by moving
/// along the aligned axes by `extent` (size along and across the anchor's
/// reference heading). A non-positive extent entry falls back to the
/// rectangle's own size on that axis.
Point2 compensated_corner(const OrientedRect& rect, const CornerAnchor& anchor,
                          std::array<double, 2> extent);

}  // namespace vtrack
