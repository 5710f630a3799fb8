#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace qcheck {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// 1 - Phi(x), accurate in the upper tail.
inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

struct KsResult {
  double statistic = 0.0;  // sup |F_n - Phi|
  double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test of a sample against N(0, 1). The p-value uses the
/// limiting Kolmogorov law with Stephens' small-sample correction.
KsResult ks_test_normal(std::vector<double> sample);

/// P(sup |B(t)| > lambda) for a Brownian bridge B.
double kolmogorov_sf(double lambda);

}  // namespace qcheck
