#include "qcheck/stats.hpp"

#include <algorithm>

namespace qcheck {

double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;  // series converges slowly; the tail is 1 to double precision
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

KsResult ks_test_normal(std::vector<double> sample) {
  KsResult out;
  if (sample.empty()) return out;
  std::sort(sample.begin(), sample.end());
  const auto n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = normal_cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  out.statistic = d;
  const double rn = std::sqrt(n);
  out.p_value = kolmogorov_sf((rn + 0.12 + 0.11 / rn) * d);
  return out;
}

}  // namespace qcheck
