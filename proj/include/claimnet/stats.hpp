#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace claimnet {

// Empirical quantile with linear interpolation at h = (n-1)p + 1 (R's default
// convention, type 7). This is the convention that reproduces the published
// first-quartile feature values; see the featurization tests.
inline double quantile_sorted(std::span<const double> sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 0) return 0.0;
  if (n == 1) return sorted[0];
  double h = (static_cast<double>(n) - 1.0) * p + 1.0;
  h = std::clamp(h, 1.0, static_cast<double>(n));
  const std::size_t lo = static_cast<std::size_t>(h);  // 1-based
  const double frac = h - static_cast<double>(lo);
  if (lo >= n) return sorted[n - 1];
  return sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1]);
}

inline double quantile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, p);
}

inline double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Population standard deviation (the variant used for z-standardization).
inline double stddev(std::span<const double> v, double mu) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<double>(v.size()));
}

inline double stddev(std::span<const double> v) { return stddev(v, mean(v)); }

}  // namespace claimnet
