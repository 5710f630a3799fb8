#include "qcheck/model.hpp"

#include <fstream>
#include <sstream>

#include "qcheck/error.hpp"

namespace qcheck {

namespace {

std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::string kind_name(TermKind kind) {
  switch (kind) {
    case TermKind::intercept: return "intercept";
    case TermKind::raw: return "raw";
    case TermKind::square: return "square";
    case TermKind::product: return "product";
    case TermKind::log1p_sumsq: return "log1p_sumsq";
  }
  return "?";
}

}  // namespace

std::string Term::label() const {
  std::string s = kind_name(kind);
  for (const auto& c : columns) s += ' ' + c;
  return s;
}

void ModelSpec::validate(const Dataset& d) const {
  if (terms.empty()) throw ConfigError("model has no terms");
  for (const auto& t : terms)
    for (const auto& c : t.columns)
      if (!d.has_column(c))
        throw ConfigError("model term '" + t.label() + "' references unknown column '" + c + "'");
}

std::string ModelSpec::to_inline() const {
  std::string s;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    if (k) s += ',';
    s += terms[k].label();
  }
  return s;
}

Term parse_term(std::string_view text) {
  const auto w = words(text);
  if (w.empty()) throw ConfigError("empty model term");
  const auto arity_error = [&] {
    return ConfigError("model term '" + std::string(text) + "': wrong number of columns");
  };
  const auto& kind = w.front();
  if (kind == "intercept") {
    if (w.size() != 1) throw arity_error();
    return Term::intercept();
  }
  if (kind == "raw" || kind == "square") {
    if (w.size() != 2) throw arity_error();
    return kind == "raw" ? Term::raw(w[1]) : Term::square(w[1]);
  }
  if (kind == "product") {
    if (w.size() != 3) throw arity_error();
    return Term::product(w[1], w[2]);
  }
  if (kind == "log1p_sumsq") {
    if (w.size() < 2) throw arity_error();
    return Term::log1p_sumsq({w.begin() + 1, w.end()});
  }
  throw ConfigError("unknown model term kind '" + kind + "'");
}

ModelSpec parse_model(std::string_view text) {
  ModelSpec spec;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    spec.terms.push_back(parse_term(line));
  }
  if (spec.terms.empty()) throw ConfigError("model has no terms");
  return spec;
}

ModelSpec parse_model_inline(std::string_view text) {
  ModelSpec spec;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto pos = text.find(',', start);
    if (pos == std::string_view::npos) pos = text.size();
    const auto piece = text.substr(start, pos - start);
    if (piece.find_first_not_of(" \t") != std::string_view::npos)
      spec.terms.push_back(parse_term(piece));
    start = pos + 1;
  }
  if (spec.terms.empty()) throw ConfigError("--model-inline: model has no terms");
  return spec;
}

ModelSpec load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--model: cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

Eigen::MatrixXd design_matrix(const ModelSpec& spec, const Dataset& d) {
  spec.validate(d);
  const Eigen::Index n = d.size();
  Eigen::MatrixXd design(n, spec.num_params());
  for (Eigen::Index k = 0; k < spec.num_params(); ++k) {
    const Term& t = spec.terms[static_cast<std::size_t>(k)];
    switch (t.kind) {
      case TermKind::intercept:
        design.col(k).setOnes();
        break;
      case TermKind::raw:
        design.col(k) = d.column(t.columns[0]);
        break;
      case TermKind::square:
        design.col(k) = d.column(t.columns[0]).array().square();
        break;
      case TermKind::product:
        design.col(k) = d.column(t.columns[0]).cwiseProduct(d.column(t.columns[1]));
        break;
      case TermKind::log1p_sumsq: {
        Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(n);
        for (const auto& c : t.columns) acc += d.column(c).array().square();
        design.col(k) = acc.log1p();
        break;
      }
    }
  }
  return design;
}

Eigen::VectorXd predict(const ModelSpec& spec, const CoefVector& coef, const Dataset& d) {
  if (coef.beta.size() != spec.num_params())
    throw ConfigError("coefficient vector has length " + std::to_string(coef.beta.size()) +
                      " but the model has " + std::to_string(spec.num_params()) + " terms");
  return design_matrix(spec, d) * coef.beta;
}

}  // namespace qcheck
