#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qcheck/data.hpp"
#include "qcheck/kernels.hpp"
#include "qcheck/loftests.hpp"
#include "qcheck/model.hpp"
#include "qcheck/qrfit.hpp"
#include "qcheck/random.hpp"

namespace qcheck {

/// How bootstrap errors are generated around the fitted quantile surface.
///   wild     e*_i = w_i |e_i|, w_i = 2(1-tau) w.p. 1-tau and -2 tau w.p. tau
///   naive    e*_i drawn with replacement from the fitted residuals
///   uniform  e*_i ~ Uniform[-tau, 1-tau]
enum class Scheme { wild, naive, uniform };

Scheme parse_scheme(std::string_view name);
std::string to_string(Scheme scheme);

struct BootstrapConfig {
  Scheme scheme = Scheme::wild;
  int replications = 999;
  std::uint64_t seed = 0;
  double alpha = 0.10;
  int threads = 1;

  void validate() const;
};

struct BootstrapOutcome {
  Eigen::VectorXd t_star;       // indexed by replication
  double critical_value = 0.0;  // order statistic of rank ceil((1 - alpha)(B + 1)), clamped to [1, B]
  double p_value = 1.0;         // (1 + #{t* >= T}) / (B + 1)
  bool reject = false;          // T >= critical_value
  Scheme scheme = Scheme::wild;
};

/// n independent two-point weights for the wild bootstrap.
Eigen::VectorXd wild_weights(double tau, Eigen::Index n, Rng& rng);

/// One synthetic response vector y* = fitted + e*.
Eigen::VectorXd resample(Scheme scheme, const FitResult& fit, double tau, Rng& rng);

double bootstrap_critical_value(const Eigen::VectorXd& t_star, double alpha);
double bootstrap_p_value(const Eigen::VectorXd& t_star, double observed);
BootstrapOutcome summarize_bootstrap(Eigen::VectorXd t_star, double observed, double alpha, Scheme scheme);

/// Runs B replications on a fixed design: resample y*, refit by the simplex LP (warm-started
/// from the original optimal basis), and evaluate every prepared statistic on the refit.
/// Returns one t* vector per statistic. Replication b draws from Rng(seed, {b}).
/// A failed refit aborts with a FitError naming the replication.
std::vector<Eigen::VectorXd> bootstrap_statistics(const FitResult& fit, const Eigen::MatrixXd& design,
                                                  double tau,
                                                  std::span<const PreparedStatistic* const> statistics,
                                                  Scheme scheme, int replications, std::uint64_t seed,
                                                  int threads = 1);

/// Observed statistic plus its bootstrap calibration.
std::pair<TestResult, BootstrapOutcome> bootstrap_test(Method method, const ModelSpec& spec, const Dataset& d,
                                                       double tau, const KernelSpec& kspec,
                                                       const BootstrapConfig& cfg);

}  // namespace qcheck
