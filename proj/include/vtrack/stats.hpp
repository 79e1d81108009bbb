#pragma once

#include <cmath>
#include <span>

namespace vtrack {

// Population (divide-by-n) statistics; every variance in the project uses
// this convention.

inline double mean_of(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double variance_of(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  const double mu = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - mu) * (x - mu);
  return s / static_cast<double>(xs.size());
}

inline double stddev_of(std::span<const double> xs) { return std::sqrt(variance_of(xs)); }

}  // namespace vtrack
