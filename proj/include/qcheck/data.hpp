#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qcheck {

/// Observations (Y_i, W_i, X_i), i = 1..n. W is the scalar covariate the tests
/// smooth over; X holds every other covariate and may have zero columns.
struct Dataset {
  Eigen::VectorXd y;
  Eigen::VectorXd w;
  Eigen::MatrixXd x;  // n x m
  std::string y_name = "y";
  std::string w_name = "w";
  std::vector<std::string> x_names;

  Eigen::Index size() const noexcept { return y.size(); }
  Eigen::Index num_x() const noexcept { return x.cols(); }

  /// Throws DataError when an invariant fails: equal lengths, n >= 2, all
  /// values finite, at least two distinct W values, one name per X column.
  void validate() const;

  /// Covariate column by name; "w" also resolves to W unless an X column is literally named "w".
  /// Throws ConfigError naming the column when nothing matches.
  Eigen::VectorXd column(const std::string& name) const;
  bool has_column(const std::string& name) const noexcept;
};

struct ColumnTransform {
  std::string name;
  double mean = 0.0;
  double sd = 1.0;
};

/// Affine maps applied by standardize(): W first, then the X columns in order.
struct StandardizationReport {
  std::vector<ColumnTransform> columns;
};

struct CsvOptions {
  std::string w_column;
  std::string y_column = "y";
};

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options);
Dataset read_csv(std::istream& in, const CsvOptions& options);

/// Writes y, w, x columns with shortest round-trip decimal representations.
void write_csv(std::ostream& out, const Dataset& d);

/// Centers and scales W and every X column to sample mean 0 and sd 1 (denominator n-1).
std::pair<Dataset, StandardizationReport> standardize(const Dataset& d);

}  // namespace qcheck
