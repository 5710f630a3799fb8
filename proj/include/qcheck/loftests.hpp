#pragma once

// Lack-of-fit statistics for a fitted quantile regression.
//
//   mlp    kernel-smoothed U-statistic that smooths only over W and weights the remaining
//          covariates X through psi; standardized to be asymptotically N(0, 1) under the null.
//   zheng  the same construction with a single multivariate kernel over all of (W, X).
//   hz     He-Zhu: top eigenvalue of the second-moment matrix of a residual CUSUM process.
//
// The free functions below evaluate each statistic directly from its definition. The
// PreparedStatistic classes cache everything that depends on covariates only, so that the
// bootstrap can re-evaluate a statistic for many responses on the same design cheaply.

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "qcheck/data.hpp"
#include "qcheck/error.hpp"
#include "qcheck/kernels.hpp"
#include "qcheck/model.hpp"
#include "qcheck/qrfit.hpp"
#include "qcheck/stats.hpp"

namespace qcheck {

enum class Method { mlp, zheng, hz };

Method parse_method(std::string_view name);
std::string to_string(Method method);

struct TestResult {
  Method method = Method::mlp;
  double statistic = 0.0;
  std::optional<double> i_n;           // mlp only
  std::optional<double> v_n2;          // mlp and zheng (sigma-tilde squared for zheng)
  std::optional<double> p_asymptotic;  // 1 - Phi(statistic); none for hz
  std::optional<double> h;             // none for hz
  double tau = 0.5;
};

/// u_i = 1{Y_i <= g(Z_i; beta)} - tau; a zero residual counts as Y <= g.
struct SignVector {
  Eigen::VectorXd u;
};

SignVector residual_signs(const Eigen::VectorXd& residuals, double tau);
inline SignVector residual_signs(const FitResult& fit, double tau) {
  return residual_signs(fit.residuals, tau);
}

/// Sums over ordered pairs i != j of u_i u_j a_ij and of a_ij^2, for a symmetric weight a.
struct PairSums {
  double cross = 0.0;
  double square = 0.0;
};

/// Accumulates over i < j and doubles; weight(i, j) must be symmetric.
template <typename WeightFn>
PairSums pair_sums(const Eigen::VectorXd& u, WeightFn&& weight) {
  PairSums s;
  const Eigen::Index n = u.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    double row_cross = 0.0;
    double row_square = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double a = weight(i, j);
      row_cross += u(j) * a;
      row_square += a * a;
    }
    s.cross += u(i) * row_cross;
    s.square += row_square;
  }
  s.cross *= 2.0;
  s.square *= 2.0;
  return s;
}

/// h^-1 K((W_i - W_j) / h) psi(X_i - X_j) for arbitrary kernel callables.
template <typename KernelFn, typename PsiFn>
auto smoothing_weight(const Dataset& d, KernelFn&& k, PsiFn&& psi, double h) {
  return [&d, k, psi, h](Eigen::Index i, Eigen::Index j) {
    const double kw = k((d.w(i) - d.w(j)) / h);
    if (kw == 0.0) return 0.0;
    return kw / h * psi((d.x.row(i) - d.x.row(j)).transpose().eval());
  };
}

/// Statistic n h^{1/2} I_n / v_n from pair sums of the weight h^-1 K psi.
inline TestResult mlp_from_sums(const PairSums& s, Eigen::Index n, double h, double tau) {
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1);
  TestResult r;
  r.method = Method::mlp;
  r.tau = tau;
  r.h = h;
  r.i_n = s.cross / pairs;
  // h^-1 K^2 psi^2 = h * (h^-1 K psi)^2
  r.v_n2 = 2.0 * tau * tau * (1 - tau) * (1 - tau) * h * s.square / pairs;
  if (!(*r.v_n2 > 0.0))
    throw DegenerateVarianceError("variance normalizer is zero: every pairwise kernel weight vanished");
  r.statistic = static_cast<double>(n) * std::sqrt(h) * *r.i_n / std::sqrt(*r.v_n2);
  r.p_asymptotic = normal_sf(r.statistic);
  return r;
}

/// mlp statistic with caller-supplied K and psi.
template <typename KernelFn, typename PsiFn>
TestResult mlp_statistic(const Eigen::VectorXd& u, const Dataset& d, KernelFn&& k, PsiFn&& psi,
                         double h, double tau) {
  return mlp_from_sums(pair_sums(u, smoothing_weight(d, k, psi, h)), d.size(), h, tau);
}

/// I_n = [n(n-1)]^-1 sum_{i != j} u_i u_j h^-1 K((W_i - W_j)/h) psi(X_i - X_j).
double i_n(const Eigen::VectorXd& u, const Dataset& d, const KernelSpec& spec, double h);

/// v_n^2 = 2 tau^2 (1-tau)^2 [n(n-1)]^-1 sum_{i != j} h^-1 K^2((W_i - W_j)/h) psi^2(X_i - X_j).
/// Depends on covariates and tau only. Throws DegenerateVarianceError when it is zero.
double v_n2(const Dataset& d, const KernelSpec& spec, double h, double tau);

/// The mlp test at h = bandwidth(spec, n).
TestResult t_n(const FitResult& fit, const Dataset& d, const KernelSpec& spec, double tau);
TestResult t_n(const FitResult& fit, const Dataset& d, const KernelSpec& spec, double h, double tau);

/// Zheng's statistic, smoothing over all q = 1 + m covariates with the triangle kernel
/// applied to the Euclidean norm of the scaled difference vector.
TestResult zheng_stat(const FitResult& fit, const Dataset& d, double h, double tau);

/// He-Zhu statistic: largest eigenvalue of n^-1 sum_i R_n(Z_i) R_n(Z_i)' where
/// R_n(t) = n^-1/2 sum_j (tau - 1{e_j < 0}) G_j 1{Z_j <= t}, G_j the design row of
/// observation j and the indicator componentwise over the covariates (W, X).
TestResult hz_stat(const FitResult& fit, const Eigen::MatrixXd& design, const Dataset& d, double tau);
TestResult hz_stat(const FitResult& fit, const ModelSpec& spec, const Dataset& d, double tau);

/// A statistic with its covariate-only parts precomputed.
class PreparedStatistic {
 public:
  virtual ~PreparedStatistic() = default;
  virtual Method method() const = 0;
  /// Evaluates the statistic for the residuals of a fit on the prepared design.
  virtual TestResult evaluate(const Eigen::VectorXd& residuals) const = 0;
};

/// mlp or zheng: stores the symmetric n x n weight matrix (zero diagonal).
class PairwiseStatistic final : public PreparedStatistic {
 public:
  static PairwiseStatistic mlp(const Dataset& d, const KernelSpec& spec, double h, double tau);
  static PairwiseStatistic zheng(const Dataset& d, double h, double tau);

  Method method() const override { return method_; }
  double h() const { return h_; }
  TestResult evaluate(const Eigen::VectorXd& residuals) const override;
  TestResult evaluate_signs(const SignVector& u) const;

 private:
  PairwiseStatistic(Method method, Eigen::MatrixXd weights, double h, double tau, int q);

  Method method_;
  Eigen::MatrixXd weights_;
  double square_sum_ = 0.0;
  double h_;
  double tau_;
  int q_;
};

class HeZhuStatistic final : public PreparedStatistic {
 public:
  HeZhuStatistic(const Eigen::MatrixXd& design, const Dataset& d, double tau);

  Method method() const override { return Method::hz; }
  TestResult evaluate(const Eigen::VectorXd& residuals) const override;

 private:
  Eigen::MatrixXd indicator_;  // (i, j) -> 1{Z_j <= Z_i}
  Eigen::MatrixXd design_;
  double tau_;
};

/// Builds the prepared form of `method` on design/dataset d.
std::unique_ptr<PreparedStatistic> prepare_statistic(Method method, const Eigen::MatrixXd& design,
                                                     const Dataset& d, const KernelSpec& spec,
                                                     double tau);

}  // namespace qcheck
