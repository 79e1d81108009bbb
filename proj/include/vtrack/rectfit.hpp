#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "vtrack/geometry.hpp"

namespace vtrack {

enum class CriterionKind { Area, Closeness, Variance, TLinkage };

inline constexpr CriterionKind kAllCriteria[] = {CriterionKind::Area, CriterionKind::Closeness,
                                                 CriterionKind::Variance,
                                                 CriterionKind::TLinkage};

std::string_view to_string(CriterionKind kind);
/// Inverse of to_string; throws ParseError on unknown names.
CriterionKind criterion_from_string(std::string_view name);

struct RectFitConfig {
  double step_deg = 1.0;
  double min_width = 0.1;       // metres
  double closeness_dmin = 0.01;  // metres
};

struct FitCandidate {
  CriterionKind criterion = CriterionKind::TLinkage;
  OrientedRect rect;
  double cost = 0.0;  // residual-variance selection cost
};

struct FitResult {
  OrientedRect rect;
  CriterionKind criterion = CriterionKind::TLinkage;
  double selection_cost = 0.0;
  /// All four candidates in kAllCriteria order.
  std::vector<FitCandidate> candidates;
  /// Set when the points were collinear and search candidates fell back to
  /// the dominant-heading rectangle.
  bool degenerate = false;
};

/// Heading search over [0, pi/2) scoring each rectangle by `criterion`
/// (Area, Closeness or Variance). The winning score is stored in
/// criterion_score. Throws DegenerateInput for fewer than three points or
/// collinear input.
OrientedRect search_fit(std::span<const Point2> points, CriterionKind criterion,
                        double step, double closeness_dmin = 0.01);

/// Tightest rectangle with the given heading containing every point.
OrientedRect rect_from_heading(std::span<const Point2> points, double heading);

/// Grows a thin rectangle to `min_width` on each axis by pushing the edge
/// farther from the sensor outward.
OrientedRect enforce_min_width(const OrientedRect& rect, double min_width);

/// Population variance of |residual| between the dominant points and the
/// rectangle edge line parallel to the dominant heading nearest to them.
double selection_cost(const OrientedRect& rect, std::span<const Point2> dominant_points);

/// Four candidates (three searches plus the dominant-heading rectangle),
/// returns the one with the lowest selection cost; ties favour TLinkage.
FitResult best_selection(std::span<const Point2> points,
                         std::span<const Point2> dominant_points, const RectFitConfig& cfg);

}  // namespace vtrack
