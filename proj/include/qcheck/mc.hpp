#pragma once

// Monte Carlo level and power studies for the lack-of-fit tests.
//
// Data come from
//   setup1:  Y = 1 + W + X + delta (W^2 + W X + X^2) + e
//   setup2:  Y = delta log(1 + W^2 + X^2) + e
// with W ~ N(0, 1), X ~ Binomial(5, 1/2) independent, and e from one of three laws. The null
// model fitted in every replication is the linear median regression on (1, W, X).
//
// Every replication draws from its own stream derived from (seed, study, cell, replication),
// so any cell can be recomputed alone and results never depend on the worker count.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "qcheck/bootstrap.hpp"
#include "qcheck/data.hpp"
#include "qcheck/kernels.hpp"
#include "qcheck/loftests.hpp"
#include "qcheck/random.hpp"

namespace qcheck {

enum class DgpFamily { setup1, setup2 };
/// `none` (e = 0) exists for testing the deterministic part of a design.
enum class ErrorLaw { gauss, lognorm_centered, hetero_gauss, none };

DgpFamily parse_dgp_family(std::string_view name);
ErrorLaw parse_error_law(std::string_view name);
std::string to_string(DgpFamily family);
std::string to_string(ErrorLaw law);

struct DgpSpec {
  DgpFamily family = DgpFamily::setup1;
  double delta = 0.0;
  ErrorLaw error_law = ErrorLaw::gauss;
  Eigen::Index n = 100;

  void validate() const;
};

double draw_error(ErrorLaw law, double w, Rng& rng);
Dataset draw_dataset(const DgpSpec& dgp, Rng& rng);

/// Linear null model intercept + w + x.
ModelSpec null_model();

struct McRow {
  std::string study;
  DgpFamily dgp = DgpFamily::setup1;
  ErrorLaw error_law = ErrorLaw::gauss;
  Method method = Method::mlp;
  std::string scheme;  // wild | naive | uniform | asymptotic
  double c = 0.0;      // NaN for hz, which has no bandwidth
  double delta = 0.0;
  Eigen::Index n = 0;
  int reps = 0;
  double rejection_rate = 0.0;
  double mc_std_error = 0.0;
};

struct McResult {
  std::vector<McRow> rows;

  /// First row matching every given field; throws ConfigError if none does.
  const McRow& find(std::string_view study, DgpFamily dgp, ErrorLaw law, Method method,
                    std::string_view scheme, double c, double delta) const;
};

struct LevelStudyConfig {
  std::vector<ErrorLaw> error_laws{ErrorLaw::gauss, ErrorLaw::lognorm_centered, ErrorLaw::hetero_gauss};
  std::vector<Scheme> schemes{Scheme::wild, Scheme::naive, Scheme::uniform};
  bool asymptotic = true;  // also report rejection with N(0, 1) critical values
  std::vector<double> c_grid{0.5, 1.0, 2.0, 4.0};
  KernelSpec kernel{};
  Eigen::Index n = 100;
  int reps = 1000;
  int replications = 199;  // bootstrap B
  double alpha = 0.10;
  double tau = 0.5;
  std::uint64_t seed = 7;
  int threads = 1;
};

struct PowerStudyConfig {
  std::vector<DgpFamily> families{DgpFamily::setup1, DgpFamily::setup2};
  std::vector<double> delta_setup1{0.0, 0.05, 0.1, 0.15, 0.2};
  std::vector<double> delta_setup2{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<ErrorLaw> error_laws{ErrorLaw::gauss, ErrorLaw::hetero_gauss};
  std::vector<Method> methods{Method::mlp, Method::zheng, Method::hz};
  std::vector<double> c_grid{0.5, 1.0, 2.0, 4.0};
  KernelSpec kernel{};
  Eigen::Index n = 100;
  int reps = 1000;
  int replications = 199;
  double alpha = 0.10;
  double tau = 0.5;
  std::uint64_t seed = 7;
  int threads = 1;

  const std::vector<double>& deltas(DgpFamily family) const {
    return family == DgpFamily::setup1 ? delta_setup1 : delta_setup2;
  }
};

McResult run_level_study(const LevelStudyConfig& cfg);
McResult run_power_study(const PowerStudyConfig& cfg);

/// Columns: study,dgp,error_law,method,scheme,c,delta,n,reps,rejection_rate,mc_std_error
void write_mc_csv(std::ostream& out, const McResult& result);

/// Long format, one line per curve point, with 95% Monte Carlo bands:
/// curve,study,dgp,error_law,method,scheme,c,x_name,x,rejection_rate,lower,upper
void write_plot_data(std::ostream& out, const McResult& result);

}  // namespace qcheck
