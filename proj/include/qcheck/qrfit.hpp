#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "qcheck/data.hpp"
#include "qcheck/model.hpp"

namespace qcheck {

/// rho_tau(e) = (tau - 1{e < 0}) * e.
inline double check_loss(double e, double tau) noexcept { return (tau - (e < 0.0 ? 1.0 : 0.0)) * e; }

/// Total check loss of a residual vector.
template <typename Derived>
double total_check_loss(const Eigen::MatrixBase<Derived>& residuals, double tau) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < residuals.size(); ++i) sum += check_loss(residuals(i), tau);
  return sum;
}

/// Optimal basis of the bounded dual LP. Depends only on the design and tau, so it is a
/// feasible starting point for refitting the same design against a different response.
struct SimplexBasis {
  std::vector<Eigen::Index> basic;     // one observation index per coefficient
  std::vector<std::uint8_t> at_upper;  // per observation; meaningful for nonbasic ones
};

struct FitResult {
  CoefVector coef;
  Eigen::VectorXd fitted;
  Eigen::VectorXd residuals;  // y - fitted; exactly 0 on interpolated observations
  double objective = 0.0;
  Eigen::Index n_zero_residuals = 0;
  SimplexBasis basis;
  int iterations = 0;
};

/// Quantile regression by the simplex method on the dual of the check-loss LP,
///   max y'd  s.t.  X'd = 0,  tau - 1 <= d_i <= tau,
/// Entering variables are priced by largest reduced cost; after a run of degenerate pivots
/// Bland's rule takes over until the objective improves again, so the method cannot cycle.
/// Leaving ties go to the lowest index. The coefficients are the simplex multipliers at the
/// optimal vertex, so the fit interpolates p observations.
///
/// Throws FitError when n < p or the design is rank deficient (the message names the
/// dependent columns), InternalError if the LP reports unboundedness or fails to terminate.
FitResult fit_design(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, double tau);

/// Same LP, started from a basis previously optimal for this design and tau: nonbasic bounds
/// follow the residual signs of the new y at that basis. Falls back to a cold start when the
/// basis does not fit. Skips the rank check.
FitResult refit_design(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, double tau,
                       const SimplexBasis& warm);

FitResult fit(const ModelSpec& spec, const Dataset& d, double tau);

/// Throws FitError naming the dependent columns if the design has numerical rank < p.
void check_full_rank(const Eigen::MatrixXd& design, const std::vector<std::string>& labels = {});

}  // namespace qcheck
