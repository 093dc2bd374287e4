#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "curvegroups/core_types.hpp"
#include "curvegroups/rng.hpp"

namespace testing {

inline curvegroups::CurveSample make_sample(std::string id, std::vector<double> xs,
                                            std::vector<double> ys) {
  return {std::move(id), std::move(xs), std::move(ys)};
}

inline curvegroups::CurveSample line_sample(double a, double b, std::size_t n,
                                            curvegroups::RngStream& rng) {
  curvegroups::CurveSample s{"line", {}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.uniform();
    s.xs.push_back(x);
    s.ys.push_back(a + b * x);
  }
  return s;
}

// Plain weighted least-squares line at x, solved from the 2x2 normal equations.
struct WlsLine {
  double intercept;
  double slope;
};

template <class Kernel>
WlsLine wls_at(const std::vector<double>& xs, const std::vector<double>& ys, double x, double h,
               Kernel kernel) {
  double s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = xs[i] - x;
    const double w = kernel(d / h);
    s0 += w;
    s1 += w * d;
    s2 += w * d * d;
    t0 += w * ys[i];
    t1 += w * d * ys[i];
  }
  const double det = s0 * s2 - s1 * s1;
  return {(s2 * t0 - s1 * t1) / det, (s0 * t1 - s1 * t0) / det};
}

inline double epanechnikov(double u) { return std::abs(u) < 1.0 ? 0.75 * (1.0 - u * u) : 0.0; }
inline double gaussian(double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace testing
