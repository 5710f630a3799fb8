#include "qcheck/loftests.hpp"

#include <algorithm>
#include <numbers>

namespace qcheck {

namespace {

auto spec_kernel(const KernelSpec& spec) {
  return [family = spec.k_family](double u) { return k_eval(family, u); };
}

auto spec_psi(const KernelSpec& spec) {
  return [spec](const Eigen::VectorXd& dx) { return psi_eval(spec, dx); };
}

// Triangle kernel on the norm of ((W_i - W_j)/h, (X_i - X_j)/h), scaled by h^-q.
double zheng_weight(const Dataset& d, Eigen::Index i, Eigen::Index j, double h, double hq) {
  double sq = (d.w(i) - d.w(j)) * (d.w(i) - d.w(j));
  for (Eigen::Index k = 0; k < d.x.cols(); ++k) sq += (d.x(i, k) - d.x(j, k)) * (d.x(i, k) - d.x(j, k));
  return kernel::triangle_var1(std::sqrt(sq) / h) / hq;
}

void check_pairwise_inputs(Eigen::Index u_size, const Dataset& d, double h) {
  if (d.size() < 2) throw DataError("pairwise statistics need n >= 2");
  if (u_size != d.size()) throw ConfigError("sign vector length does not match the dataset");
  if (!(h > 0.0)) throw ConfigError("bandwidth must be positive");
}

}  // namespace

Method parse_method(std::string_view name) {
  if (name == "mlp") return Method::mlp;
  if (name == "zheng") return Method::zheng;
  if (name == "hz") return Method::hz;
  throw ConfigError("--method: unknown test '" + std::string(name) + "' (expected mlp, zheng or hz)");
}

std::string to_string(Method method) {
  switch (method) {
    case Method::mlp: return "mlp";
    case Method::zheng: return "zheng";
    case Method::hz: return "hz";
  }
  return "?";
}

SignVector residual_signs(const Eigen::VectorXd& residuals, double tau) {
  SignVector s;
  s.u = (residuals.array() <= 0.0).select(Eigen::VectorXd::Constant(residuals.size(), 1.0 - tau),
                                          Eigen::VectorXd::Constant(residuals.size(), -tau));
  return s;
}

double i_n(const Eigen::VectorXd& u, const Dataset& d, const KernelSpec& spec, double h) {
  check_pairwise_inputs(u.size(), d, h);
  const auto s = pair_sums(u, smoothing_weight(d, spec_kernel(spec), spec_psi(spec), h));
  return s.cross / (static_cast<double>(d.size()) * static_cast<double>(d.size() - 1));
}

double v_n2(const Dataset& d, const KernelSpec& spec, double h, double tau) {
  check_pairwise_inputs(d.size(), d, h);
  const auto s = pair_sums(Eigen::VectorXd::Zero(d.size()),
                           smoothing_weight(d, spec_kernel(spec), spec_psi(spec), h));
  return *mlp_from_sums(s, d.size(), h, tau).v_n2;
}

TestResult t_n(const FitResult& fit, const Dataset& d, const KernelSpec& spec, double h, double tau) {
  check_pairwise_inputs(fit.residuals.size(), d, h);
  const auto u = residual_signs(fit, tau);
  return mlp_statistic(u.u, d, spec_kernel(spec), spec_psi(spec), h, tau);
}

TestResult t_n(const FitResult& fit, const Dataset& d, const KernelSpec& spec, double tau) {
  return t_n(fit, d, spec, bandwidth(spec, d.size()), tau);
}

TestResult zheng_stat(const FitResult& fit, const Dataset& d, double h, double tau) {
  check_pairwise_inputs(fit.residuals.size(), d, h);
  const auto u = residual_signs(fit, tau);
  const int q = 1 + static_cast<int>(d.x.cols());
  const double hq = std::pow(h, q);
  const auto s = pair_sums(u.u, [&](Eigen::Index i, Eigen::Index j) { return zheng_weight(d, i, j, h, hq); });
  const auto n = static_cast<double>(d.size());
  TestResult r;
  r.method = Method::zheng;
  r.tau = tau;
  r.h = h;
  // sum h^-q Ktilde^2 = h^q * sum (h^-q Ktilde)^2
  r.v_n2 = 2.0 * tau * tau * (1 - tau) * (1 - tau) * hq * s.square / (n * (n - 1));
  if (!(*r.v_n2 > 0.0))
    throw DegenerateVarianceError("Zheng variance normalizer is zero: every pairwise kernel weight vanished");
  r.statistic = std::sqrt(hq) * s.cross / (std::sqrt(*r.v_n2) * (n - 1));
  r.p_asymptotic = normal_sf(r.statistic);
  return r;
}

TestResult hz_stat(const FitResult& fit, const Eigen::MatrixXd& design, const Dataset& d, double tau) {
  return HeZhuStatistic(design, d, tau).evaluate(fit.residuals);
}

TestResult hz_stat(const FitResult& fit, const ModelSpec& spec, const Dataset& d, double tau) {
  return hz_stat(fit, design_matrix(spec, d), d, tau);
}

PairwiseStatistic::PairwiseStatistic(Method method, Eigen::MatrixXd weights, double h, double tau, int q)
    : method_(method), weights_(std::move(weights)), h_(h), tau_(tau), q_(q) {
  const Eigen::Index n = weights_.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    double row = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) row += weights_(i, j) * weights_(i, j);
    square_sum_ += row;
  }
  square_sum_ *= 2.0;
  if (!(square_sum_ > 0.0))
    throw DegenerateVarianceError("variance normalizer is zero: every pairwise kernel weight vanished");
}

PairwiseStatistic PairwiseStatistic::mlp(const Dataset& d, const KernelSpec& spec, double h, double tau) {
  check_pairwise_inputs(d.size(), d, h);
  const Eigen::Index n = d.size();
  const Eigen::Index m = d.x.cols();
  const double psi_scale = std::pow(2.0 * std::numbers::pi, -0.5 * static_cast<double>(m));
  const Eigen::MatrixXd xt = d.x.transpose();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double kw = k_eval(spec.k_family, (d.w(j) - d.w(i)) / h);
      if (kw == 0.0) continue;
      const double sq = m ? (xt.col(j) - xt.col(i)).squaredNorm() : 0.0;
      a(i, j) = a(j, i) = kw / h * (std::exp(-0.5 * sq) * psi_scale);
    }
  return PairwiseStatistic(Method::mlp, std::move(a), h, tau, 1);
}

PairwiseStatistic PairwiseStatistic::zheng(const Dataset& d, double h, double tau) {
  check_pairwise_inputs(d.size(), d, h);
  const Eigen::Index n = d.size();
  const int q = 1 + static_cast<int>(d.x.cols());
  const double hq = std::pow(h, q);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j + 1; i < n; ++i) a(i, j) = a(j, i) = zheng_weight(d, j, i, h, hq);
  return PairwiseStatistic(Method::zheng, std::move(a), h, tau, q);
}

TestResult PairwiseStatistic::evaluate_signs(const SignVector& u) const {
  if (u.u.size() != weights_.rows()) throw ConfigError("sign vector length does not match the prepared design");
  PairSums s;
  s.cross = u.u.dot(weights_ * u.u);
  s.square = square_sum_;
  const Eigen::Index n = weights_.rows();
  if (method_ == Method::mlp) return mlp_from_sums(s, n, h_, tau_);

  const auto nd = static_cast<double>(n);
  const double hq = std::pow(h_, q_);
  TestResult r;
  r.method = Method::zheng;
  r.tau = tau_;
  r.h = h_;
  r.v_n2 = 2.0 * tau_ * tau_ * (1 - tau_) * (1 - tau_) * hq * s.square / (nd * (nd - 1));
  r.statistic = std::sqrt(hq) * s.cross / (std::sqrt(*r.v_n2) * (nd - 1));
  r.p_asymptotic = normal_sf(r.statistic);
  return r;
}

TestResult PairwiseStatistic::evaluate(const Eigen::VectorXd& residuals) const {
  return evaluate_signs(residual_signs(residuals, tau_));
}

HeZhuStatistic::HeZhuStatistic(const Eigen::MatrixXd& design, const Dataset& d, double tau)
    : indicator_(d.size(), d.size()), design_(design), tau_(tau) {
  const Eigen::Index n = d.size();
  if (n < 1) throw DataError("He-Zhu statistic needs at least one observation");
  if (design.rows() != n) throw ConfigError("design rows do not match the dataset");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      bool below = d.w(j) <= d.w(i);
      for (Eigen::Index k = 0; below && k < d.x.cols(); ++k) below = d.x(j, k) <= d.x(i, k);
      indicator_(i, j) = below ? 1.0 : 0.0;
    }
}

TestResult HeZhuStatistic::evaluate(const Eigen::VectorXd& residuals) const {
  const Eigen::Index n = design_.rows();
  if (residuals.size() != n) throw ConfigError("residual vector length does not match the prepared design");
  const Eigen::VectorXd score =
      (residuals.array() < 0.0).select(Eigen::VectorXd::Constant(n, tau_ - 1.0),
                                       Eigen::VectorXd::Constant(n, tau_));
  const auto nd = static_cast<double>(n);
  const Eigen::MatrixXd r = indicator_ * (score.asDiagonal() * design_) / std::sqrt(nd);
  const Eigen::MatrixXd m = r.transpose() * r / nd;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  TestResult out;
  out.method = Method::hz;
  out.tau = tau_;
  out.statistic = std::max(0.0, eig.eigenvalues().maxCoeff());
  return out;
}

std::unique_ptr<PreparedStatistic> prepare_statistic(Method method, const Eigen::MatrixXd& design,
                                                     const Dataset& d, const KernelSpec& spec,
                                                     double tau) {
  switch (method) {
    case Method::mlp:
      return std::make_unique<PairwiseStatistic>(PairwiseStatistic::mlp(d, spec, bandwidth(spec, d.size()), tau));
    case Method::zheng:
      return std::make_unique<PairwiseStatistic>(PairwiseStatistic::zheng(d, bandwidth(spec, d.size()), tau));
    case Method::hz:
      return std::make_unique<HeZhuStatistic>(design, d, tau);
  }
  throw ConfigError("unknown method");
}

}  // namespace qcheck
