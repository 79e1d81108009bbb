#include "vtrack/rectfit.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "vtrack/errors.hpp"
#include "vtrack/stats.hpp"

namespace vtrack {

std::string_view to_string(CriterionKind kind) {
  switch (kind) {
    case CriterionKind::Area: return "area";
    case CriterionKind::Closeness: return "closeness";
    case CriterionKind::Variance: return "variance";
    case CriterionKind::TLinkage: return "tlinkage";
  }
  return "unknown";
}

CriterionKind criterion_from_string(std::string_view name) {
  for (CriterionKind k : kAllCriteria) {
    if (to_string(k) == name) return k;
  }
  throw ParseError("unknown criterion '" + std::string(name) + "'");
}

namespace {

struct Bounds {
  double u_min = std::numeric_limits<double>::infinity();
  double u_max = -std::numeric_limits<double>::infinity();
  double v_min = std::numeric_limits<double>::infinity();
  double v_max = -std::numeric_limits<double>::infinity();
};

bool collinear(std::span<const Point2> points) {
  double extent = 0.0;
  for (const Point2& p : points) extent = std::max(extent, distance(p, points.front()));
  if (extent <= 1e-12) return true;
  return std::sqrt(tls_residual_variance(points)) <= 1e-9 * std::max(1.0, extent);
}

// Score of one heading; larger is better.
double score_heading(const std::vector<double>& u, const std::vector<double>& v,
                     const Bounds& b, CriterionKind criterion, double dmin,
                     std::vector<double>& e1, std::vector<double>& e2) {
  switch (criterion) {
    case CriterionKind::Area:
      return -(b.u_max - b.u_min) * (b.v_max - b.v_min);
    case CriterionKind::Closeness: {
      double sum = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double du = std::min(b.u_max - u[i], u[i] - b.u_min);
        const double dv = std::min(b.v_max - v[i], v[i] - b.v_min);
        sum += 1.0 / std::max(std::min(du, dv), dmin);
      }
      return sum;
    }
    case CriterionKind::Variance: {
      e1.clear();
      e2.clear();
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double du = std::min(b.u_max - u[i], u[i] - b.u_min);
        const double dv = std::min(b.v_max - v[i], v[i] - b.v_min);
        if (du < dv) {
          e1.push_back(du);
        } else {
          e2.push_back(dv);
        }
      }
      return -(variance_of(e1) + variance_of(e2));
    }
    case CriterionKind::TLinkage:
      break;
  }
  throw DegenerateInput("search_fit: TLinkage is not a search criterion");
}

}  // namespace

OrientedRect search_fit(std::span<const Point2> points, CriterionKind criterion,
                        double step, double closeness_dmin) {
  if (criterion == CriterionKind::TLinkage) {
    throw DegenerateInput("search_fit: TLinkage is not a search criterion");
  }
  if (!(step > 0.0) || step > 0.5 * kPi) {
    throw DegenerateInput("search_fit: step must lie in (0, pi/2]");
  }
  if (points.size() < 3 || collinear(points)) {
    throw DegenerateInput("search_fit: need three or more non-collinear points");
  }

  std::vector<double> u(points.size()), v(points.size()), e1, e2;
  double best_score = -std::numeric_limits<double>::infinity();
  double best_theta = 0.0;
  Bounds best_bounds;
  for (int k = 0;; ++k) {
    const double theta = k * step;
    if (theta >= 0.5 * kPi - 1e-12) break;
    const double c = std::cos(theta), s = std::sin(theta);
    Bounds b;
    for (std::size_t i = 0; i < points.size(); ++i) {
      u[i] = c * points[i].x + s * points[i].y;
      v[i] = -s * points[i].x + c * points[i].y;
      b.u_min = std::min(b.u_min, u[i]);
      b.u_max = std::max(b.u_max, u[i]);
      b.v_min = std::min(b.v_min, v[i]);
      b.v_max = std::max(b.v_max, v[i]);
    }
    const double score = score_heading(u, v, b, criterion, closeness_dmin, e1, e2);
    if (score > best_score) {
      best_score = score;
      best_theta = theta;
      best_bounds = b;
    }
  }
  OrientedRect rect = OrientedRect::from_bounds(best_theta, best_bounds.u_min, best_bounds.u_max,
                                                best_bounds.v_min, best_bounds.v_max);
  rect.criterion_score = criterion == CriterionKind::Area ? -best_score : best_score;
  return rect;
}

OrientedRect rect_from_heading(std::span<const Point2> points, double heading) {
  if (points.empty()) throw DegenerateInput("rect_from_heading: no points");
  const double h = canonical_heading(heading);
  const Point2 eu = unit(h);
  const Point2 ev{-eu.y, eu.x};
  Bounds b;
  for (const Point2& p : points) {
    b.u_min = std::min(b.u_min, p.dot(eu));
    b.u_max = std::max(b.u_max, p.dot(eu));
    b.v_min = std::min(b.v_min, p.dot(ev));
    b.v_max = std::max(b.v_max, p.dot(ev));
  }
  return OrientedRect::from_bounds(h, b.u_min, b.u_max, b.v_min, b.v_max);
}

OrientedRect enforce_min_width(const OrientedRect& rect, double min_width) {
  const Point2 eu = unit(rect.heading);
  const Point2 ev{-eu.y, eu.x};
  double u_min = rect.corners[0].dot(eu), u_max = rect.corners[1].dot(eu);
  double v_min = rect.corners[0].dot(ev), v_max = rect.corners[3].dot(ev);
  auto widen = [min_width](double& lo, double& hi) {
    if (hi - lo >= min_width) return;
    // The sensor sits at coordinate 0 on both axes; grow away from it.
    if (lo + hi >= 0.0) {
      hi = lo + min_width;
    } else {
      lo = hi - min_width;
    }
  };
  widen(u_min, u_max);
  widen(v_min, v_max);
  OrientedRect out = OrientedRect::from_bounds(rect.heading, u_min, u_max, v_min, v_max);
  out.criterion_score = rect.criterion_score;
  return out;
}

double selection_cost(const OrientedRect& rect, std::span<const Point2> dominant_points) {
  if (dominant_points.size() < 2) {
    throw DegenerateInput("selection_cost: need at least two dominant points");
  }
  const double dominant = fit_line_tls(dominant_points).heading();
  // Pick the rectangle axis parallel (mod pi) to the dominant heading.
  const double gap = std::abs(wrap_angle(2.0 * (rect.heading - dominant))) / 2.0;
  const bool along_heading = gap <= 0.25 * kPi;
  const std::array<std::pair<int, int>, 2> edges =
      along_heading ? std::array<std::pair<int, int>, 2>{{{0, 1}, {3, 2}}}
                    : std::array<std::pair<int, int>, 2>{{{0, 3}, {1, 2}}};

  double best_mean = std::numeric_limits<double>::infinity();
  std::vector<double> best_residuals, residuals(dominant_points.size());
  for (const auto& [a, b] : edges) {
    const Point2 pa = rect.corners[a];
    const Point2 pb = rect.corners[b];
    const double edge_heading =
        distance(pa, pb) > 1e-12 ? std::atan2(pb.y - pa.y, pb.x - pa.x)
                                 : rect.heading + (along_heading ? 0.0 : 0.5 * kPi);
    const Line2 line = Line2::from_point_heading(pa, edge_heading);
    for (std::size_t i = 0; i < dominant_points.size(); ++i) {
      residuals[i] = point_line_distance(dominant_points[i], line);
    }
    const double mean = mean_of(residuals);
    if (mean < best_mean) {
      best_mean = mean;
      best_residuals = residuals;
    }
  }
  return variance_of(best_residuals);
}

FitResult best_selection(std::span<const Point2> points,
                         std::span<const Point2> dominant_points, const RectFitConfig& cfg) {
  if (dominant_points.size() < 2) {
    throw DegenerateInput("best_selection: need at least two dominant points");
  }
  const double dominant = fit_line_tls(dominant_points).heading();
  const double step = deg2rad(cfg.step_deg);

  FitResult result;
  for (CriterionKind kind : kAllCriteria) {
    FitCandidate cand;
    cand.criterion = kind;
    if (kind == CriterionKind::TLinkage) {
      cand.rect = rect_from_heading(points, dominant);
    } else {
      try {
        cand.rect = search_fit(points, kind, step, cfg.closeness_dmin);
      } catch (const DegenerateInput&) {
        cand.rect = rect_from_heading(points, dominant);
        result.degenerate = true;
      }
    }
    cand.rect = enforce_min_width(cand.rect, cfg.min_width);
    cand.cost = selection_cost(cand.rect, dominant_points);
    result.candidates.push_back(cand);
  }

  const FitCandidate* best = &result.candidates.back();  // TLinkage wins ties
  for (const FitCandidate& c : result.candidates) {
    if (c.cost < best->cost) best = &c;
  }
  result.rect = best->rect;
  result.criterion = best->criterion;
  result.selection_cost = best->cost;
  return result;
}

}  // namespace vtrack
