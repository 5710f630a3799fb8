#include "qcheck/bootstrap.hpp"

#include <algorithm>
#include <cmath>

#include "qcheck/error.hpp"
#include "qcheck/parallel.hpp"

namespace qcheck {

Scheme parse_scheme(std::string_view name) {
  if (name == "wild") return Scheme::wild;
  if (name == "naive") return Scheme::naive;
  if (name == "uniform") return Scheme::uniform;
  throw ConfigError("--bootstrap: unknown scheme '" + std::string(name) + "' (expected wild, naive or uniform)");
}

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::wild: return "wild";
    case Scheme::naive: return "naive";
    case Scheme::uniform: return "uniform";
  }
  return "?";
}

void BootstrapConfig::validate() const {
  if (replications < 1) throw ConfigError("--B must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("--alpha must lie strictly inside (0, 1)");
  if (threads < 1) throw ConfigError("--threads must be at least 1");
}

Eigen::VectorXd wild_weights(double tau, Eigen::Index n, Rng& rng) {
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) w(i) = rng.bernoulli(tau) ? -2.0 * tau : 2.0 * (1.0 - tau);
  return w;
}

Eigen::VectorXd resample(Scheme scheme, const FitResult& fit, double tau, Rng& rng) {
  const Eigen::Index n = fit.residuals.size();
  Eigen::VectorXd y = fit.fitted;
  switch (scheme) {
    case Scheme::wild:
      y += wild_weights(tau, n, rng).cwiseProduct(fit.residuals.cwiseAbs());
      break;
    case Scheme::naive:
      for (Eigen::Index i = 0; i < n; ++i)
        y(i) += fit.residuals(static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(n))));
      break;
    case Scheme::uniform:
      for (Eigen::Index i = 0; i < n; ++i) y(i) += rng.uniform(-tau, 1.0 - tau);
      break;
  }
  return y;
}

double bootstrap_critical_value(const Eigen::VectorXd& t_star, double alpha) {
  const Eigen::Index b = t_star.size();
  if (b < 1) throw ConfigError("no bootstrap replications");
  // the small offset keeps e.g. 0.9 * 200 = 180.00000000000003 at rank 180
  auto rank = static_cast<Eigen::Index>(std::ceil((1.0 - alpha) * static_cast<double>(b + 1) - 1e-9));
  rank = std::clamp<Eigen::Index>(rank, 1, b);
  std::vector<double> sorted(t_star.data(), t_star.data() + b);
  std::nth_element(sorted.begin(), sorted.begin() + (rank - 1), sorted.end());
  return sorted[static_cast<std::size_t>(rank - 1)];
}

double bootstrap_p_value(const Eigen::VectorXd& t_star, double observed) {
  const auto exceed = (t_star.array() >= observed).count();
  return (1.0 + static_cast<double>(exceed)) / (static_cast<double>(t_star.size()) + 1.0);
}

BootstrapOutcome summarize_bootstrap(Eigen::VectorXd t_star, double observed, double alpha, Scheme scheme) {
  BootstrapOutcome out;
  out.scheme = scheme;
  out.critical_value = bootstrap_critical_value(t_star, alpha);
  out.p_value = bootstrap_p_value(t_star, observed);
  out.reject = observed >= out.critical_value;
  out.t_star = std::move(t_star);
  return out;
}

std::vector<Eigen::VectorXd> bootstrap_statistics(const FitResult& fit, const Eigen::MatrixXd& design,
                                                  double tau,
                                                  std::span<const PreparedStatistic* const> statistics,
                                                  Scheme scheme, int replications, std::uint64_t seed,
                                                  int threads) {
  if (replications < 1) throw ConfigError("--B must be at least 1");
  std::vector<Eigen::VectorXd> t_star(statistics.size(), Eigen::VectorXd(replications));
  parallel_for(static_cast<std::size_t>(replications), threads, [&](std::size_t b) {
    Rng rng(seed, {static_cast<std::uint64_t>(b)});
    const Eigen::VectorXd y_star = resample(scheme, fit, tau, rng);
    FitResult refit;
    try {
      refit = refit_design(design, y_star, tau, fit.basis);
    } catch (const Error& e) {
      throw FitError("bootstrap replication " + std::to_string(b + 1) + ": " + e.what());
    }
    for (std::size_t s = 0; s < statistics.size(); ++s)
      t_star[s](static_cast<Eigen::Index>(b)) = statistics[s]->evaluate(refit.residuals).statistic;
  });
  return t_star;
}

std::pair<TestResult, BootstrapOutcome> bootstrap_test(Method method, const ModelSpec& spec, const Dataset& d,
                                                       double tau, const KernelSpec& kspec,
                                                       const BootstrapConfig& cfg) {
  cfg.validate();
  const Eigen::MatrixXd design = design_matrix(spec, d);
  const FitResult fit = qcheck::fit(spec, d, tau);
  const auto statistic = prepare_statistic(method, design, d, kspec, tau);
  TestResult observed = statistic->evaluate(fit.residuals);
  const PreparedStatistic* list[] = {statistic.get()};
  auto t_star = bootstrap_statistics(fit, design, tau, list, cfg.scheme, cfg.replications, cfg.seed, cfg.threads);
  auto outcome = summarize_bootstrap(std::move(t_star.front()), observed.statistic, cfg.alpha, cfg.scheme);
  return {std::move(observed), std::move(outcome)};
}

}  // namespace qcheck
