#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace testsupport {

inline double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Population coefficient of variation.
inline double cv(std::span<const double> v) {
  const double m = mean(v);
  if (v.empty() || m == 0.0) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size())) / m;
}

// Trailing moving average; entry d averages v[d-width+1 .. d]. Entries before
// a full window are left at 0.
inline std::vector<double> trailing_ma(std::span<const double> v, std::size_t width) {
  std::vector<double> out(v.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    sum += v[i];
    if (i >= width) sum -= v[i - width];
    if (i + 1 >= width) out[i] = sum / static_cast<double>(width);
  }
  return out;
}

}  // namespace testsupport
