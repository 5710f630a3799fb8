#pragma once

// Independent reference computations used only by the tests. Nothing here calls the
// library's statistic or solver code paths.

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "qcheck/data.hpp"
#include "qcheck/random.hpp"

namespace qcheck::oracle {

inline double rho(double e, double tau) { return e < 0.0 ? (tau - 1.0) * e : tau * e; }

inline double check_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                              double tau) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) s += rho(y(i) - x.row(i).dot(beta), tau);
  return s;
}

/// Minimum check loss over every basic solution (beta interpolating some p observations).
/// An optimum of the LP is attained at such a vertex, so this is the global minimum.
inline double vertex_enumeration_minimum(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double tau) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  double best = std::numeric_limits<double>::infinity();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(p));
  std::function<void(Eigen::Index, Eigen::Index)> rec = [&](Eigen::Index start, Eigen::Index depth) {
    if (depth == p) {
      Eigen::MatrixXd a(p, p);
      Eigen::VectorXd b(p);
      for (Eigen::Index k = 0; k < p; ++k) {
        a.row(k) = x.row(idx[static_cast<std::size_t>(k)]);
        b(k) = y(idx[static_cast<std::size_t>(k)]);
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
      if (lu.rank() < p) return;
      best = std::min(best, check_objective(x, y, lu.solve(b), tau));
      return;
    }
    for (Eigen::Index i = start; i < n; ++i) {
      idx[static_cast<std::size_t>(depth)] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

inline double triangle(double u) {
  const double a = std::sqrt(6.0);
  return std::abs(u) >= a ? 0.0 : (1.0 - std::abs(u) / a) / a;
}

inline double phi(double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi); }

/// Phi(x) by integrating the density from 0 with Simpson's rule.
inline double normal_cdf(double x);

inline double psi_product(const Eigen::VectorXd& dx) {
  double p = 1.0;
  for (Eigen::Index k = 0; k < dx.size(); ++k) p *= phi(dx(k));
  return p;
}

struct PairTotals {
  double cross = 0.0;   // sum_{i != j} u_i u_j a_ij
  double square = 0.0;  // sum_{i != j} b_ij
  double abs_cross = 0.0;
};

/// Full double loop over ordered pairs, iterating in reverse order.
template <typename Weight, typename SquareWeight>
PairTotals reversed_double_loop(const Eigen::VectorXd& u, Weight&& a, SquareWeight&& b) {
  PairTotals t;
  for (Eigen::Index i = u.size() - 1; i >= 0; --i)
    for (Eigen::Index j = u.size() - 1; j >= 0; --j) {
      if (i == j) continue;
      const double term = u(i) * u(j) * a(i, j);
      t.cross += term;
      t.abs_cross += std::abs(term);
      t.square += b(i, j);
    }
  return t;
}

/// I_n and v_n^2 straight from their definitions, with the triangle kernel and Gaussian psi.
inline std::pair<double, double> mlp_components(const Eigen::VectorXd& u, const Dataset& d, double h,
                                                double tau, double* abs_scale = nullptr) {
  const auto n = static_cast<double>(d.size());
  auto kern = [&](Eigen::Index i, Eigen::Index j) {
    return triangle((d.w(i) - d.w(j)) / h) * psi_product((d.x.row(i) - d.x.row(j)).transpose());
  };
  const auto t = reversed_double_loop(
      u, [&](Eigen::Index i, Eigen::Index j) { return kern(i, j) / h; },
      [&](Eigen::Index i, Eigen::Index j) { return kern(i, j) * kern(i, j) / h; });
  if (abs_scale) *abs_scale = t.abs_cross / (n * (n - 1));
  return {t.cross / (n * (n - 1)), 2.0 * tau * tau * (1 - tau) * (1 - tau) * t.square / (n * (n - 1))};
}

/// Zheng numerator sum_{i != j} u_i u_j h^-q Kt and sigma-tilde^2.
inline std::pair<double, double> zheng_components(const Eigen::VectorXd& u, const Dataset& d, double h,
                                                  double tau, double* abs_scale = nullptr) {
  const auto n = static_cast<double>(d.size());
  const int q = 1 + static_cast<int>(d.x.cols());
  auto kt = [&](Eigen::Index i, Eigen::Index j) {
    Eigen::VectorXd v(q);
    v(0) = (d.w(i) - d.w(j)) / h;
    for (int k = 1; k < q; ++k) v(k) = (d.x(i, k - 1) - d.x(j, k - 1)) / h;
    return triangle(v.norm());
  };
  const double hq = std::pow(h, -q);
  const auto t = reversed_double_loop(
      u, [&](Eigen::Index i, Eigen::Index j) { return hq * kt(i, j); },
      [&](Eigen::Index i, Eigen::Index j) { return hq * kt(i, j) * kt(i, j); });
  if (abs_scale) *abs_scale = t.abs_cross;
  return {t.cross, 2.0 * tau * tau * (1 - tau) * (1 - tau) * t.square / (n * (n - 1))};
}

/// Composite Simpson rule on [a, b] with an even number of panels.
template <typename F>
double simpson(F&& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int k = 1; k < panels; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return s * h / 3.0;
}

inline double normal_cdf(double x) {
  const double half = simpson(phi, 0.0, std::abs(x), 20000);
  return x >= 0 ? 0.5 + half : 0.5 - half;
}

/// Random dataset with continuous W and m covariates, some integer-valued.
inline Dataset random_dataset(Eigen::Index n, Eigen::Index m, Rng& rng) {
  Dataset d;
  d.y.resize(n);
  d.w.resize(n);
  d.x.resize(n, m);
  for (Eigen::Index k = 0; k < m; ++k) d.x_names.push_back("x" + std::to_string(k + 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    d.w(i) = rng.normal();
    for (Eigen::Index k = 0; k < m; ++k)
      d.x(i, k) = k % 2 ? static_cast<double>(rng.index(4)) : rng.normal();
    d.y(i) = rng.normal();
  }
  return d;
}

}  // namespace qcheck::oracle
