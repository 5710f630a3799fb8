#include "qcheck/qrfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qcheck/error.hpp"

namespace qcheck {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;
constexpr double kFeasTol = 1e-9;
constexpr int kRefactorEvery = 32;
constexpr double kStepTol = 1e-12;
constexpr int kDegenerateLimit = 16;

enum Status : std::uint8_t { kLower = 0, kUpper = 1, kBasic = 2 };

// Bounded-variable revised simplex for
//   min c'x  s.t.  A x = 0,  lo <= x <= hi
// where the first n columns of A are the design rows (bounds [tau-1, tau]) and the last p
// columns are signed unit artificials used only by phase one.
class DualQuantileSimplex {
 public:
  DualQuantileSimplex(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, double tau)
      : xt_(design.transpose()),
        y_(y),
        tau_(tau),
        n_(design.rows()),
        p_(design.cols()),
        status_(static_cast<std::size_t>(n_ + p_), kLower),
        value_(Eigen::VectorXd::Zero(n_ + p_)),
        hi_(Eigen::VectorXd::Zero(n_ + p_)),
        lo_(Eigen::VectorXd::Zero(n_ + p_)),
        sign_(Eigen::VectorXd::Ones(p_)),
        basic_(static_cast<std::size_t>(p_)),
        cb_(p_) {
    lo_.head(n_).setConstant(tau - 1.0);
    hi_.head(n_).setConstant(tau);
    const double yscale = y.size() ? y.cwiseAbs().maxCoeff() : 0.0;
    const double xscale = design.size() ? design.cwiseAbs().maxCoeff() : 0.0;
    cost_tol_ = 1e-10 * (1.0 + yscale) * (1.0 + xscale);
    max_iterations_ = 50 * static_cast<int>(n_ + p_) + 1000;
  }

  void cold_start() {
    // Start every dual variable at the bound matching the side of the tau-quantile of y it
    // lies on; phase one then only has to repair a small imbalance.
    Eigen::VectorXd sorted = y_;
    const auto k = std::min<Eigen::Index>(n_ - 1, static_cast<Eigen::Index>(tau_ * n_));
    std::nth_element(sorted.data(), sorted.data() + k, sorted.data() + n_);
    const double cut = sorted(k);
    std::vector<bool> upper(static_cast<std::size_t>(n_));
    for (Eigen::Index j = 0; j < n_; ++j) upper[static_cast<std::size_t>(j)] = y_(j) >= cut;
    phase_one(upper);
  }

  // Reuses a previous optimal basis: bounds follow the residual signs of the new response
  // at that basis's coefficients. Falls back to phase one from the same bounds when the
  // basic variables come out infeasible.
  bool warm_start(const SimplexBasis& basis) {
    if (static_cast<Eigen::Index>(basis.basic.size()) != p_ ||
        static_cast<Eigen::Index>(basis.at_upper.size()) != n_)
      return false;
    Eigen::MatrixXd rows(p_, p_);
    Eigen::VectorXd targets(p_);
    std::vector<bool> seen(static_cast<std::size_t>(n_), false);
    for (Eigen::Index k = 0; k < p_; ++k) {
      const Eigen::Index j = basis.basic[static_cast<std::size_t>(k)];
      if (j < 0 || j >= n_ || seen[static_cast<std::size_t>(j)]) return false;
      seen[static_cast<std::size_t>(j)] = true;
      rows.row(k) = xt_.col(j).transpose();
      targets(k) = y_(j);
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(rows);
    const double det = std::abs(lu.determinant());
    if (!(det > 0.0) || !std::isfinite(det)) return false;
    const Eigen::VectorXd residuals = y_ - xt_.transpose() * lu.solve(targets);
    std::vector<bool> upper(static_cast<std::size_t>(n_));
    for (Eigen::Index j = 0; j < n_; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      upper[jj] = residuals(j) > 0.0 || (residuals(j) == 0.0 && basis.at_upper[jj]);
      set_nonbasic(j, upper[jj] ? kUpper : kLower);
    }
    for (Eigen::Index k = 0; k < p_; ++k) {
      const Eigen::Index j = basis.basic[static_cast<std::size_t>(k)];
      status_[static_cast<std::size_t>(j)] = kBasic;
      basic_[static_cast<std::size_t>(k)] = j;
    }
    fix_artificials();
    bool feasible = refactor();
    for (Eigen::Index k = 0; feasible && k < p_; ++k) {
      const Eigen::Index j = basic_[static_cast<std::size_t>(k)];
      feasible = value_(j) >= lo_(j) - kFeasTol && value_(j) <= hi_(j) + kFeasTol;
    }
    if (!feasible) phase_one(upper);
    return true;
  }

  void phase_two() {
    Eigen::VectorXd cost = Eigen::VectorXd::Zero(n_ + p_);
    cost.head(n_) = -y_;
    run(cost, cost_tol_);
  }

  FitResult result(const Eigen::MatrixXd& design) const {
    FitResult out;
    Eigen::MatrixXd rows(p_, p_);
    Eigen::VectorXd targets(p_);
    for (Eigen::Index k = 0; k < p_; ++k) {
      const Eigen::Index j = basic_[static_cast<std::size_t>(k)];
      rows.row(k) = design.row(j);
      targets(k) = y_(j);
    }
    out.coef.beta = rows.fullPivLu().solve(targets);
    out.coef.tau = tau_;
    out.fitted = design * out.coef.beta;
    out.residuals = y_ - out.fitted;
    for (Eigen::Index i = 0; i < n_; ++i) {
      const double slack = 1e-13 * (std::abs(y_(i)) + std::abs(out.fitted(i)));
      if (std::abs(out.residuals(i)) <= slack) out.residuals(i) = 0.0;
    }
    for (Eigen::Index j : basic_) out.residuals(j) = 0.0;
    out.objective = total_check_loss(out.residuals, tau_);
    out.n_zero_residuals = (out.residuals.array() == 0.0).count();
    out.basis.basic = basic_;
    out.basis.at_upper.resize(static_cast<std::size_t>(n_));
    for (Eigen::Index j = 0; j < n_; ++j)
      out.basis.at_upper[static_cast<std::size_t>(j)] = status_[static_cast<std::size_t>(j)] == kUpper;
    out.iterations = iterations_;
    return out;
  }

 private:
  void phase_one(const std::vector<bool>& upper) {
    for (Eigen::Index j = 0; j < n_; ++j) set_nonbasic(j, upper[static_cast<std::size_t>(j)] ? kUpper : kLower);
    const Eigen::VectorXd rhs = -(xt_ * value_.head(n_));
    for (Eigen::Index k = 0; k < p_; ++k) {
      const Eigen::Index a = n_ + k;
      sign_(k) = rhs(k) >= 0.0 ? 1.0 : -1.0;
      lo_(a) = 0.0;
      hi_(a) = kInf;
      status_[static_cast<std::size_t>(a)] = kBasic;
      basic_[static_cast<std::size_t>(k)] = a;
    }
    refactor();

    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n_ + p_);
    phase1.tail(p_).setOnes();
    run(phase1, 1e-11);
    const double infeasibility = value_.tail(p_).sum();
    if (infeasibility > 1e-7 * (1.0 + static_cast<double>(n_)))
      throw InternalError("quantile LP phase one ended infeasible");
    drive_out_artificials();
  }

  void set_nonbasic(Eigen::Index j, Status s) {
    status_[static_cast<std::size_t>(j)] = s;
    value_(j) = s == kUpper ? hi_(j) : lo_(j);
  }

  // Artificials out of the basis are pinned at zero and never priced again.
  void fix_artificials() {
    for (Eigen::Index k = 0; k < p_; ++k) {
      const Eigen::Index a = n_ + k;
      lo_(a) = hi_(a) = 0.0;
      if (status_[static_cast<std::size_t>(a)] != kBasic) set_nonbasic(a, kLower);
    }
  }

  // Rebuilds the basis inverse and the basic values from the nonbasic ones.
  bool refactor() {
    Eigen::MatrixXd basis(p_, p_);
    for (Eigen::Index k = 0; k < p_; ++k) {
      const Eigen::Index j = basic_[static_cast<std::size_t>(k)];
      if (j < n_) {
        basis.col(k) = xt_.col(j);
      } else {
        basis.col(k).setZero();
        basis(j - n_, k) = sign_(j - n_);
      }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis);
    const double det = std::abs(lu.determinant());
    if (!(det > 0.0) || !std::isfinite(det)) return false;
    binv_ = lu.inverse();
    updates_ = 0;
    // nonbasic artificials always sit at zero
    masked_ = value_.head(n_);
    for (Eigen::Index j : basic_)
      if (j < n_) masked_(j) = 0.0;
    rhs_.noalias() = -(xt_ * masked_);
    update_basic_values();
    return true;
  }

  // rhs += A_j * amount
  void add_column(Eigen::Index j, double amount) {
    if (amount == 0.0) return;
    if (j < n_) {
      rhs_.noalias() += xt_.col(j) * amount;
    } else {
      rhs_(j - n_) += sign_(j - n_) * amount;
    }
  }

  void update_basic_values() {
    xb_.noalias() = binv_ * rhs_;
    for (Eigen::Index k = 0; k < p_; ++k) value_(basic_[static_cast<std::size_t>(k)]) = xb_(k);
  }

  void run(const Eigen::VectorXd& cost, double tol) {
    bool priced = false;
    Eigen::Index scan_from = 0;
    int degenerate_streak = 0;
    while (true) {
      if (++iterations_ > max_iterations_)
        throw InternalError("quantile LP simplex did not terminate after " +
                            std::to_string(max_iterations_) + " iterations");
      // Reduced costs only change with the basis. After a bound flip every index before the
      // entering one is still ineligible, so Bland's scan resumes where it stopped.
      if (!priced) {
        for (Eigen::Index k = 0; k < p_; ++k) cb_(k) = cost(basic_[static_cast<std::size_t>(k)]);
        pi_.noalias() = binv_.transpose() * cb_;
        reduced_.noalias() = xt_.transpose() * pi_;
        priced = true;
        scan_from = 0;
      }

      // Dantzig pricing (largest violation, lowest index on ties) until degenerate pivots
      // pile up, then Bland (first eligible index) until the objective strictly improves.
      const bool bland = degenerate_streak >= kDegenerateLimit;
      Eigen::Index entering = -1;
      double direction = 0.0;
      double best = 0.0;
      for (Eigen::Index j = bland ? scan_from : 0; j < n_ + p_; ++j) {
        const auto s = status_[static_cast<std::size_t>(j)];
        if (s == kBasic || !(hi_(j) > lo_(j))) continue;
        const double reduced = cost(j) - (j < n_ ? reduced_(j) : pi_(j - n_) * sign_(j - n_));
        double violation = 0.0;
        if (s == kLower && reduced < -tol) violation = -reduced;
        if (s == kUpper && reduced > tol) violation = reduced;
        if (violation > best) {
          best = violation;
          entering = j;
          direction = s == kLower ? 1.0 : -1.0;
          if (bland) break;
        }
      }
      if (entering < 0) return;

      if (entering < n_) {
        alpha_.noalias() = binv_ * xt_.col(entering);
      } else {
        alpha_ = binv_.col(entering - n_) * sign_(entering - n_);
      }
      const Eigen::VectorXd& alpha = alpha_;
      double step = hi_(entering) - lo_(entering);
      Eigen::Index leaving_row = -1;  // -1 means the entering variable flips bounds
      Eigen::Index leaving_var = entering;
      Status leaving_status = kLower;
      for (Eigen::Index k = 0; k < p_; ++k) {
        if (std::abs(alpha(k)) <= kPivotTol) continue;
        const Eigen::Index j = basic_[static_cast<std::size_t>(k)];
        const double rate = direction * alpha(k);
        double limit;
        Status hit;
        if (rate > 0.0) {
          limit = (value_(j) - lo_(j)) / rate;
          hit = kLower;
        } else {
          if (!std::isfinite(hi_(j))) continue;
          limit = (hi_(j) - value_(j)) / -rate;
          hit = kUpper;
        }
        limit = std::max(limit, 0.0);
        const bool tie = std::abs(limit - step) <= 1e-12 * (1.0 + step);
        if ((limit < step && !tie) || (tie && j < leaving_var)) {
          step = std::min(step, limit);
          leaving_row = k;
          leaving_var = j;
          leaving_status = hit;
        }
      }
      if (!std::isfinite(step)) throw InternalError("quantile LP is unbounded");
      if (step > kStepTol) {
        degenerate_streak = 0;
      } else {
        ++degenerate_streak;
      }

      if (leaving_row < 0) {
        const Status flipped = direction > 0 ? kUpper : kLower;
        const double old = value_(entering);
        set_nonbasic(entering, flipped);
        const double change = value_(entering) - old;
        if (entering < n_) {
          rhs_.noalias() -= xt_.col(entering) * change;
        } else {
          rhs_(entering - n_) -= sign_(entering - n_) * change;
        }
        update_basic_values();
        scan_from = entering + 1;
        continue;
      }
      const double entering_old = value_(entering);
      status_[static_cast<std::size_t>(entering)] = kBasic;
      basic_[static_cast<std::size_t>(leaving_row)] = entering;
      set_nonbasic(leaving_var, leaving_status);
      if (leaving_var >= n_) {
        lo_(leaving_var) = hi_(leaving_var) = 0.0;
        value_(leaving_var) = 0.0;
      }
      priced = false;
      if (++updates_ >= kRefactorEvery) {
        if (!refactor()) throw InternalError("quantile LP basis became singular");
        continue;
      }
      // product-form update of the inverse and of the nonbasic right-hand side
      add_column(entering, entering_old);
      add_column(leaving_var, -value_(leaving_var));
      const double pivot = alpha(leaving_row);
      binv_.row(leaving_row) /= pivot;
      for (Eigen::Index k = 0; k < p_; ++k)
        if (k != leaving_row && alpha(k) != 0.0) binv_.row(k) -= alpha(k) * binv_.row(leaving_row);
      update_basic_values();
    }
  }

  void drive_out_artificials() {
    for (Eigen::Index k = 0; k < p_; ++k) {
      const Eigen::Index a = basic_[static_cast<std::size_t>(k)];
      if (a < n_) continue;
      Eigen::Index replacement = -1;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (status_[static_cast<std::size_t>(j)] == kBasic) continue;
        if (std::abs(binv_.row(k).dot(xt_.col(j))) > 1e-7) {
          replacement = j;
          break;
        }
      }
      if (replacement < 0) throw FitError("design matrix is rank deficient");
      status_[static_cast<std::size_t>(replacement)] = kBasic;
      basic_[static_cast<std::size_t>(k)] = replacement;
      status_[static_cast<std::size_t>(a)] = kLower;
      value_(a) = 0.0;
      if (!refactor()) throw InternalError("quantile LP basis became singular");
    }
    fix_artificials();
    refactor();
  }

  Eigen::MatrixXd xt_;  // p x n, column j is observation j
  const Eigen::VectorXd& y_;
  double tau_;
  Eigen::Index n_;
  Eigen::Index p_;
  std::vector<std::uint8_t> status_;
  Eigen::VectorXd value_;
  Eigen::VectorXd hi_;
  Eigen::VectorXd lo_;
  Eigen::VectorXd sign_;
  std::vector<Eigen::Index> basic_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd rhs_;
  Eigen::VectorXd masked_;
  Eigen::VectorXd reduced_;
  Eigen::VectorXd alpha_;
  Eigen::VectorXd cb_;
  Eigen::VectorXd pi_;
  Eigen::VectorXd xb_;
  double cost_tol_ = 1e-10;
  int iterations_ = 0;
  int updates_ = 0;
  int max_iterations_ = 0;
};

void check_inputs(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie strictly inside (0, 1)");
  if (design.rows() != y.size())
    throw ConfigError("design has " + std::to_string(design.rows()) + " rows but y has " +
                      std::to_string(y.size()) + " entries");
  if (design.cols() < 1) throw ConfigError("model has no terms");
  if (design.rows() < design.cols())
    throw FitError("need at least as many observations (" + std::to_string(design.rows()) +
                   ") as coefficients (" + std::to_string(design.cols()) + ")");
  if (!design.allFinite() || !y.allFinite()) throw FitError("non-finite value in fit inputs");
}

}  // namespace

void check_full_rank(const Eigen::MatrixXd& design, const std::vector<std::string>& labels) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  const Eigen::VectorXd diag = qr.matrixQR().diagonal().cwiseAbs();
  const double top = diag.size() ? diag(0) : 0.0;
  Eigen::Index rank = 0;
  while (rank < diag.size() && diag(rank) > 1e-10 * top) ++rank;
  if (rank == design.cols()) return;
  std::string names;
  for (Eigen::Index k = rank; k < design.cols(); ++k) {
    const Eigen::Index col = qr.colsPermutation().indices()(k);
    if (!names.empty()) names += ", ";
    names += static_cast<std::size_t>(col) < labels.size() ? "'" + labels[static_cast<std::size_t>(col)] + "'"
                                                           : "column " + std::to_string(col);
  }
  throw FitError("design matrix is rank deficient (rank " + std::to_string(rank) + " of " +
                 std::to_string(design.cols()) + "); dependent: " + names);
}

FitResult fit_design(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, double tau) {
  check_inputs(design, y, tau);
  check_full_rank(design);
  DualQuantileSimplex lp(design, y, tau);
  lp.cold_start();
  lp.phase_two();
  return lp.result(design);
}

FitResult refit_design(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, double tau,
                       const SimplexBasis& warm) {
  check_inputs(design, y, tau);
  {
    DualQuantileSimplex lp(design, y, tau);
    if (lp.warm_start(warm)) {
      lp.phase_two();
      return lp.result(design);
    }
  }
  return fit_design(design, y, tau);
}

FitResult fit(const ModelSpec& spec, const Dataset& d, double tau) {
  const Eigen::MatrixXd design = design_matrix(spec, d);
  std::vector<std::string> labels;
  for (const auto& t : spec.terms) labels.push_back(t.label());
  check_inputs(design, d.y, tau);
  check_full_rank(design, labels);
  DualQuantileSimplex lp(design, d.y, tau);
  lp.cold_start();
  lp.phase_two();
  return lp.result(design);
}

}  // namespace qcheck
