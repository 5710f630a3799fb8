#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qcheck/data.hpp"

namespace qcheck {

enum class TermKind { intercept, raw, square, product, log1p_sumsq };

/// One column of the design matrix.
struct Term {
  TermKind kind = TermKind::intercept;
  std::vector<std::string> columns;

  static Term intercept() { return {TermKind::intercept, {}}; }
  static Term raw(std::string c) { return {TermKind::raw, {std::move(c)}}; }
  static Term square(std::string c) { return {TermKind::square, {std::move(c)}}; }
  static Term product(std::string a, std::string b) {
    return {TermKind::product, {std::move(a), std::move(b)}};
  }
  static Term log1p_sumsq(std::vector<std::string> cs) {
    return {TermKind::log1p_sumsq, std::move(cs)};
  }

  /// Same textual form the model file uses, e.g. "product w x1".
  std::string label() const;

  friend bool operator==(const Term&, const Term&) = default;
};

/// A linear-in-parameters regression function g(Z; beta) = sum_k beta_k * term_k(Z).
struct ModelSpec {
  std::vector<Term> terms;

  Eigen::Index num_params() const noexcept { return static_cast<Eigen::Index>(terms.size()); }

  /// Throws ConfigError if the spec is empty or references a column d does not have.
  void validate(const Dataset& d) const;

  /// Comma-joined labels, accepted back by parse_model_inline.
  std::string to_inline() const;
};

/// Fitted coefficients together with the quantile level they belong to.
struct CoefVector {
  Eigen::VectorXd beta;
  double tau = 0.5;
};

/// Parses one term, e.g. "intercept", "raw w", "square w", "product w x1", "log1p_sumsq w x".
Term parse_term(std::string_view text);
/// One term per line; blank lines and lines starting with '#' are skipped.
ModelSpec parse_model(std::string_view text);
ModelSpec parse_model_inline(std::string_view text);
ModelSpec load_model(const std::filesystem::path& path);

Eigen::MatrixXd design_matrix(const ModelSpec& spec, const Dataset& d);
Eigen::VectorXd predict(const ModelSpec& spec, const CoefVector& coef, const Dataset& d);

}  // namespace qcheck
