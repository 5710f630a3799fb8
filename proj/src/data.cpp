#include "qcheck/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include "qcheck/error.hpp"

namespace qcheck {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return cells;
}

bool parse_double(std::string_view cell, double& value) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return false;
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  return ec == std::errc() && ptr == end && std::isfinite(value);
}

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double sample_sd(const Eigen::VectorXd& v, double mean) {
  return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
}

}  // namespace

void Dataset::validate() const {
  const Eigen::Index n = y.size();
  if (w.size() != n || x.rows() != n)
    throw DataError("dataset columns have different lengths");
  if (n < 2) throw DataError("dataset needs at least 2 observations, got " + std::to_string(n));
  if (static_cast<Eigen::Index>(x_names.size()) != x.cols())
    throw DataError("dataset has " + std::to_string(x.cols()) + " X columns but " +
                    std::to_string(x_names.size()) + " names");
  if (!y.allFinite()) throw DataError("non-finite value in column '" + y_name + "'");
  if (!w.allFinite()) throw DataError("non-finite value in column '" + w_name + "'");
  for (Eigen::Index k = 0; k < x.cols(); ++k)
    if (!x.col(k).allFinite())
      throw DataError("non-finite value in column '" + x_names[k] + "'");
  if (w.maxCoeff() == w.minCoeff())
    throw DataError("degenerate W: column '" + w_name + "' is constant");
}

bool Dataset::has_column(const std::string& name) const noexcept {
  if (name == w_name) return true;
  if (std::find(x_names.begin(), x_names.end(), name) != x_names.end()) return true;
  return name == "w";
}

Eigen::VectorXd Dataset::column(const std::string& name) const {
  if (name == w_name) return w;
  const auto it = std::find(x_names.begin(), x_names.end(), name);
  if (it != x_names.end()) return x.col(it - x_names.begin());
  if (name == "w") return w;
  throw ConfigError("unknown column '" + name + "'");
}

Dataset read_csv(std::istream& in, const CsvOptions& options) {
  if (options.w_column.empty()) throw ConfigError("--w-col: no W column given");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw DataError("CSV input is empty (no header row)");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  std::vector<std::string> header;
  for (auto cell : split_commas(line)) header.emplace_back(cell);
  const auto find = [&](const std::string& name) -> std::ptrdiff_t {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : it - header.begin();
  };
  const auto y_idx = find(options.y_column);
  if (y_idx < 0) throw ConfigError("--y-col: column '" + options.y_column + "' not found in header");
  const auto w_idx = find(options.w_column);
  if (w_idx < 0) throw ConfigError("--w-col: column '" + options.w_column + "' not found in header");
  if (w_idx == y_idx) throw ConfigError("--w-col: W column must differ from the response column");

  const std::size_t ncols = header.size();
  std::vector<double> values;
  std::size_t nrows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != ncols)
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(ncols) +
                           " cells, found " + std::to_string(cells.size()),
                       line_no, cells.size());
    for (std::size_t c = 0; c < ncols; ++c) {
      double v = 0.0;
      if (!parse_double(cells[c], v))
        throw ParseError("line " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                             " ('" + header[c] + "'): cannot parse '" + std::string(cells[c]) +
                             "' as a finite number",
                         line_no, c + 1);
      values.push_back(v);
    }
    ++nrows;
  }

  const auto n = static_cast<Eigen::Index>(nrows);
  Dataset d;
  d.y_name = header[y_idx];
  d.w_name = header[w_idx];
  d.y.resize(n);
  d.w.resize(n);
  std::vector<std::size_t> x_cols;
  for (std::size_t c = 0; c < ncols; ++c)
    if (static_cast<std::ptrdiff_t>(c) != y_idx && static_cast<std::ptrdiff_t>(c) != w_idx) {
      x_cols.push_back(c);
      d.x_names.push_back(header[c]);
    }
  d.x.resize(n, static_cast<Eigen::Index>(x_cols.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* row = values.data() + static_cast<std::size_t>(i) * ncols;
    d.y(i) = row[y_idx];
    d.w(i) = row[w_idx];
    for (std::size_t k = 0; k < x_cols.size(); ++k) d.x(i, static_cast<Eigen::Index>(k)) = row[x_cols[k]];
  }
  d.validate();
  return d;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--data: cannot open '" + path.string() + "'");
  return read_csv(in, options);
}

void write_csv(std::ostream& out, const Dataset& d) {
  out << d.y_name << ',' << d.w_name;
  for (const auto& name : d.x_names) out << ',' << name;
  out << '\n';
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    out << shortest(d.y(i)) << ',' << shortest(d.w(i));
    for (Eigen::Index k = 0; k < d.x.cols(); ++k) out << ',' << shortest(d.x(i, k));
    out << '\n';
  }
}

std::pair<Dataset, StandardizationReport> standardize(const Dataset& d) {
  d.validate();
  Dataset out = d;
  StandardizationReport report;
  const auto scale = [&](Eigen::Ref<Eigen::VectorXd> col, const std::string& name) {
    const double mean = col.mean();
    const double sd = sample_sd(col, mean);
    if (!(sd > 0.0)) throw DataError("cannot standardize column '" + name + "': zero variance");
    col = (col.array() - mean) / sd;
    report.columns.push_back({name, mean, sd});
  };
  scale(out.w, out.w_name);
  for (Eigen::Index k = 0; k < out.x.cols(); ++k) scale(out.x.col(k), out.x_names[k]);
  return {std::move(out), std::move(report)};
}

}  // namespace qcheck
