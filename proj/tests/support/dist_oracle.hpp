#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace sadq::testing {

/// Rounding bound for comparing the mean of N blended atoms with the blend of
/// two means: each path performs O(N) additions and a handful of products on
/// terms no larger than `magnitude`.
inline double accumulation_bound(std::size_t n, double magnitude) {
  return 4.0 * static_cast<double>(n + 4) * std::numeric_limits<double>::epsilon() * magnitude;
}

inline double mean_abs(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s / static_cast<double>(v.size());
}

}  // namespace sadq::testing
