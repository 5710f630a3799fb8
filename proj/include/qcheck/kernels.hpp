#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace qcheck {

/// Univariate smoothing kernels. All are symmetric densities with unit variance and a
/// Fourier transform that is positive almost everywhere.
enum class KernelFamily { triangle_var1, gaussian, laplace, logistic };

/// Weight on the non-smoothed covariates X.
enum class PsiFamily { gaussian_product };

struct KernelSpec {
  KernelFamily k_family = KernelFamily::triangle_var1;
  PsiFamily psi_family = PsiFamily::gaussian_product;
  double c = 1.0;  // bandwidth constant in h = c * n^(-1/5)
};

namespace kernel {

inline constexpr double kTriangleHalfWidth = 2.449489742783178098;  // sqrt(6)

template <typename Scalar>
Scalar triangle_var1(Scalar u) {
  using std::abs;
  const Scalar t = Scalar(1) - abs(u) / Scalar(kTriangleHalfWidth);
  return t > Scalar(0) ? t / Scalar(kTriangleHalfWidth) : Scalar(0);
}

template <typename Scalar>
Scalar gaussian(Scalar u) {
  using std::exp;
  return exp(Scalar(-0.5) * u * u) * Scalar(std::numbers::inv_sqrtpi / std::numbers::sqrt2);
}

template <typename Scalar>
Scalar laplace(Scalar u) {
  using std::abs;
  using std::exp;
  // scale 1/sqrt(2) gives unit variance
  return exp(-abs(u) * Scalar(std::numbers::sqrt2)) * Scalar(std::numbers::sqrt2 / 2);
}

template <typename Scalar>
Scalar logistic(Scalar u) {
  using std::abs;
  using std::exp;
  const Scalar s = Scalar(std::numbers::sqrt3 / std::numbers::pi);
  const Scalar e = exp(-abs(u) / s);
  return e / (s * (Scalar(1) + e) * (Scalar(1) + e));
}

}  // namespace kernel

template <typename Scalar>
Scalar k_eval(KernelFamily family, Scalar u) {
  switch (family) {
    case KernelFamily::triangle_var1: return kernel::triangle_var1(u);
    case KernelFamily::gaussian: return kernel::gaussian(u);
    case KernelFamily::laplace: return kernel::laplace(u);
    case KernelFamily::logistic: return kernel::logistic(u);
  }
  return Scalar(0);
}

template <typename Scalar>
Scalar k_eval(const KernelSpec& spec, Scalar u) {
  return k_eval(spec.k_family, u);
}

/// Product of standard normal densities over the coordinates of dx (1 for an empty vector).
template <typename Derived>
typename Derived::Scalar psi_eval(const KernelSpec& /*spec*/, const Eigen::MatrixBase<Derived>& dx) {
  using Scalar = typename Derived::Scalar;
  using std::exp;
  using std::pow;
  const auto m = static_cast<double>(dx.size());
  return exp(Scalar(-0.5) * dx.squaredNorm()) * Scalar(pow(2.0 * std::numbers::pi, -0.5 * m));
}

/// h = c * n^(-1/5). Throws ConfigError when n < 2 or c <= 0.
double bandwidth(const KernelSpec& spec, Eigen::Index n);

KernelFamily parse_kernel_family(std::string_view name);
PsiFamily parse_psi_family(std::string_view name);
std::string to_string(KernelFamily family);
std::string to_string(PsiFamily family);

}  // namespace qcheck
