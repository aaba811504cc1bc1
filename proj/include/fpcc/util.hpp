#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

namespace fpcc {

// Neumaier compensated summation. Mass audits compare against 1e-10 style
// tolerances, so plain left-to-right accumulation over ~1e5 terms is too sloppy.
inline double stable_sum(std::span<const double> values) {
  double sum = 0.0;
  double comp = 0.0;
  for (double v : values) {
    double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

// Round-trip float formatting used by every table writer ("%.17g").
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Odometer-style increment of a multi-index with all axes in [0, n_max].
// Returns false once the index wraps past the last point.
inline bool advance_multi_index(std::vector<std::int64_t>& j, std::int64_t n_max) {
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i] < n_max) {
      ++j[i];
      return true;
    }
    j[i] = 0;
  }
  return false;
}

// Least-squares slope of y against x; used for observed-order fits.
inline double fit_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return num / den;
}

}  // namespace fpcc
