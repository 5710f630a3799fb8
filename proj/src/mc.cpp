#include "qcheck/mc.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <limits>
#include <memory>
#include <ostream>

#include "qcheck/error.hpp"
#include "qcheck/parallel.hpp"

namespace qcheck {

namespace {

constexpr std::uint64_t kLevelStream = 0x4c4556454cULL;  // "LEVEL"
constexpr std::uint64_t kPowerStream = 0x504f574552ULL;  // "POWER"
constexpr std::uint64_t kDataStream = 0;

std::string number(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

McRow make_row(std::string study, DgpFamily dgp, ErrorLaw law, Method method, std::string scheme,
               double c, double delta, Eigen::Index n, int reps, long rejections) {
  McRow row{std::move(study), dgp, law, method, std::move(scheme), c, delta, n, reps, 0.0, 0.0};
  row.rejection_rate = static_cast<double>(rejections) / reps;
  row.mc_std_error = std::sqrt(row.rejection_rate * (1.0 - row.rejection_rate) / reps);
  return row;
}

void check_common(Eigen::Index n, int reps, int replications, double alpha, double tau, int threads,
                  const std::vector<double>& c_grid) {
  if (n < 10) throw ConfigError("--n must be at least 10");
  if (reps < 1) throw ConfigError("--reps must be at least 1");
  if (replications < 1) throw ConfigError("--B must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("--alpha must lie strictly inside (0, 1)");
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("--tau must lie strictly inside (0, 1)");
  if (threads < 1) throw ConfigError("--threads must be at least 1");
  for (double c : c_grid)
    if (!(c > 0.0)) throw ConfigError("--c-grid values must be positive");
}

}  // namespace

DgpFamily parse_dgp_family(std::string_view name) {
  if (name == "setup1") return DgpFamily::setup1;
  if (name == "setup2") return DgpFamily::setup2;
  throw ConfigError("unknown design '" + std::string(name) + "' (expected setup1 or setup2)");
}

ErrorLaw parse_error_law(std::string_view name) {
  if (name == "gauss") return ErrorLaw::gauss;
  if (name == "lognorm_centered" || name == "lognorm") return ErrorLaw::lognorm_centered;
  if (name == "hetero_gauss" || name == "hetero") return ErrorLaw::hetero_gauss;
  if (name == "none") return ErrorLaw::none;
  throw ConfigError("unknown error law '" + std::string(name) + "'");
}

std::string to_string(DgpFamily family) { return family == DgpFamily::setup1 ? "setup1" : "setup2"; }

std::string to_string(ErrorLaw law) {
  switch (law) {
    case ErrorLaw::gauss: return "gauss";
    case ErrorLaw::lognorm_centered: return "lognorm_centered";
    case ErrorLaw::hetero_gauss: return "hetero_gauss";
    case ErrorLaw::none: return "none";
  }
  return "?";
}

void DgpSpec::validate() const {
  if (n < 10) throw ConfigError("simulated sample size must be at least 10");
  if (!(delta >= 0.0)) throw ConfigError("delta must be nonnegative");
}

double draw_error(ErrorLaw law, double w, Rng& rng) {
  switch (law) {
    case ErrorLaw::gauss: return rng.normal();
    case ErrorLaw::lognorm_centered: return std::exp(rng.normal()) - 1.0;
    case ErrorLaw::hetero_gauss: return std::sqrt(0.5 * (1.0 + w * w)) * rng.normal();
    case ErrorLaw::none: return 0.0;
  }
  return 0.0;
}

Dataset draw_dataset(const DgpSpec& dgp, Rng& rng) {
  dgp.validate();
  Dataset d;
  d.y.resize(dgp.n);
  d.w.resize(dgp.n);
  d.x.resize(dgp.n, 1);
  d.x_names = {"x"};
  for (Eigen::Index i = 0; i < dgp.n; ++i) {
    const double w = rng.normal();
    const double x = std::popcount(rng.bits() & 0x1fULL);  // five fair coins
    const double e = draw_error(dgp.error_law, w, rng);
    d.w(i) = w;
    d.x(i, 0) = x;
    d.y(i) = dgp.family == DgpFamily::setup1 ? 1.0 + w + x + dgp.delta * (w * w + w * x + x * x) + e
                                             : dgp.delta * std::log1p(w * w + x * x) + e;
  }
  return d;
}

ModelSpec null_model() { return {{Term::intercept(), Term::raw("w"), Term::raw("x")}}; }

const McRow& McResult::find(std::string_view study, DgpFamily dgp, ErrorLaw law, Method method,
                            std::string_view scheme, double c, double delta) const {
  for (const auto& r : rows) {
    const bool c_match = method == Method::hz || r.c == c;
    if (r.study == study && r.dgp == dgp && r.error_law == law && r.method == method &&
        r.scheme == scheme && c_match && r.delta == delta)
      return r;
  }
  throw ConfigError("no Monte Carlo row for the requested cell");
}

McResult run_level_study(const LevelStudyConfig& cfg) {
  check_common(cfg.n, cfg.reps, cfg.replications, cfg.alpha, cfg.tau, cfg.threads, cfg.c_grid);
  const ModelSpec model = null_model();
  const std::size_t nc = cfg.c_grid.size();
  const std::size_t ns = cfg.schemes.size();
  McResult result;

  for (ErrorLaw law : cfg.error_laws) {
    // decisions[rep][column]: asymptotic columns first, then scheme-major bootstrap columns
    const std::size_t columns = nc * (1 + ns);
    std::vector<std::uint8_t> decisions(static_cast<std::size_t>(cfg.reps) * columns, 0);

    parallel_for(static_cast<std::size_t>(cfg.reps), cfg.threads, [&](std::size_t r) {
      const auto law_id = static_cast<std::uint64_t>(law);
      Rng rng(cfg.seed, {kLevelStream, law_id, r, kDataStream});
      const Dataset d = draw_dataset({DgpFamily::setup1, 0.0, law, cfg.n}, rng);
      const Eigen::MatrixXd design = design_matrix(model, d);
      const FitResult fit = qcheck::fit(model, d, cfg.tau);

      std::vector<PairwiseStatistic> stats;
      std::vector<const PreparedStatistic*> handles;
      stats.reserve(nc);
      for (double c : cfg.c_grid) {
        KernelSpec k = cfg.kernel;
        k.c = c;
        stats.push_back(PairwiseStatistic::mlp(d, k, bandwidth(k, cfg.n), cfg.tau));
      }
      for (const auto& s : stats) handles.push_back(&s);

      std::uint8_t* row = decisions.data() + r * columns;
      std::vector<double> observed(nc);
      for (std::size_t k = 0; k < nc; ++k) {
        const TestResult t = stats[k].evaluate(fit.residuals);
        observed[k] = t.statistic;
        row[k] = *t.p_asymptotic <= cfg.alpha;
      }
      for (std::size_t s = 0; s < ns; ++s) {
        const auto scheme_id = static_cast<std::uint64_t>(cfg.schemes[s]);
        const std::uint64_t boot_seed = derive_seed(cfg.seed, {kLevelStream, law_id, r, 1 + scheme_id});
        const auto t_star = bootstrap_statistics(fit, design, cfg.tau, handles, cfg.schemes[s],
                                                 cfg.replications, boot_seed, 1);
        for (std::size_t k = 0; k < nc; ++k)
          row[nc * (1 + s) + k] = observed[k] >= bootstrap_critical_value(t_star[k], cfg.alpha);
      }
    });

    const auto count = [&](std::size_t column) {
      long total = 0;
      for (int r = 0; r < cfg.reps; ++r) total += decisions[static_cast<std::size_t>(r) * columns + column];
      return total;
    };
    for (std::size_t s = 0; s < ns; ++s)
      for (std::size_t k = 0; k < nc; ++k)
        result.rows.push_back(make_row("level", DgpFamily::setup1, law, Method::mlp, to_string(cfg.schemes[s]),
                                       cfg.c_grid[k], 0.0, cfg.n, cfg.reps, count(nc * (1 + s) + k)));
    if (cfg.asymptotic)
      for (std::size_t k = 0; k < nc; ++k)
        result.rows.push_back(make_row("level", DgpFamily::setup1, law, Method::mlp, "asymptotic",
                                       cfg.c_grid[k], 0.0, cfg.n, cfg.reps, count(k)));
  }
  return result;
}

McResult run_power_study(const PowerStudyConfig& cfg) {
  check_common(cfg.n, cfg.reps, cfg.replications, cfg.alpha, cfg.tau, cfg.threads, cfg.c_grid);
  const ModelSpec model = null_model();
  const double no_bandwidth = std::numeric_limits<double>::quiet_NaN();

  // one column per (method, c); hz gets a single column
  struct Column {
    Method method;
    double c;
  };
  std::vector<Column> columns;
  for (Method m : cfg.methods) {
    if (m == Method::hz) {
      columns.push_back({m, no_bandwidth});
    } else {
      for (double c : cfg.c_grid) columns.push_back({m, c});
    }
  }
  const std::size_t nk = columns.size();
  McResult result;

  for (DgpFamily family : cfg.families) {
    for (ErrorLaw law : cfg.error_laws) {
      for (double delta : cfg.deltas(family)) {
        std::vector<std::uint8_t> decisions(static_cast<std::size_t>(cfg.reps) * nk, 0);
        const std::uint64_t cell[] = {kPowerStream, static_cast<std::uint64_t>(family),
                                      static_cast<std::uint64_t>(law), stream_id(delta)};

        parallel_for(static_cast<std::size_t>(cfg.reps), cfg.threads, [&](std::size_t r) {
          Rng rng(cfg.seed, {cell[0], cell[1], cell[2], cell[3], r, kDataStream});
          const Dataset d = draw_dataset({family, delta, law, cfg.n}, rng);
          const Eigen::MatrixXd design = design_matrix(model, d);
          const FitResult fit = qcheck::fit(model, d, cfg.tau);

          std::vector<std::unique_ptr<PreparedStatistic>> stats;
          std::vector<const PreparedStatistic*> handles;
          for (const auto& col : columns) {
            KernelSpec k = cfg.kernel;
            if (col.method != Method::hz) k.c = col.c;
            stats.push_back(prepare_statistic(col.method, design, d, k, cfg.tau));
            handles.push_back(stats.back().get());
          }
          const std::uint64_t boot_seed =
              derive_seed(cfg.seed, {cell[0], cell[1], cell[2], cell[3], r, 1});
          const auto t_star = bootstrap_statistics(fit, design, cfg.tau, handles, Scheme::wild,
                                                   cfg.replications, boot_seed, 1);
          std::uint8_t* row = decisions.data() + r * nk;
          for (std::size_t k = 0; k < nk; ++k) {
            const double observed = stats[k]->evaluate(fit.residuals).statistic;
            row[k] = observed >= bootstrap_critical_value(t_star[k], cfg.alpha);
          }
        });

        for (std::size_t k = 0; k < nk; ++k) {
          long total = 0;
          for (int r = 0; r < cfg.reps; ++r) total += decisions[static_cast<std::size_t>(r) * nk + k];
          result.rows.push_back(make_row("power", family, law, columns[k].method, "wild", columns[k].c, delta,
                                         cfg.n, cfg.reps, total));
        }
      }
    }
  }
  return result;
}

void write_mc_csv(std::ostream& out, const McResult& result) {
  out << "study,dgp,error_law,method,scheme,c,delta,n,reps,rejection_rate,mc_std_error\n";
  for (const auto& r : result.rows) {
    out << r.study << ',' << to_string(r.dgp) << ',' << to_string(r.error_law) << ',' << to_string(r.method)
        << ',' << r.scheme << ',' << number(r.c) << ',' << number(r.delta) << ',' << r.n << ',' << r.reps << ','
        << number(r.rejection_rate) << ',' << number(r.mc_std_error) << '\n';
  }
}

void write_plot_data(std::ostream& out, const McResult& result) {
  out << "curve,study,dgp,error_law,method,scheme,c,x_name,x,rejection_rate,lower,upper\n";
  for (const auto& r : result.rows) {
    // level curves run along c, power curves along delta
    const bool level = r.study == "level";
    std::string curve = r.study + ':' + to_string(r.dgp) + ':' + to_string(r.error_law) + ':' +
                        to_string(r.method) + ':' + r.scheme;
    if (!level && !std::isnan(r.c)) curve += ":c=" + number(r.c);
    const double lower = std::max(0.0, r.rejection_rate - 1.96 * r.mc_std_error);
    const double upper = std::min(1.0, r.rejection_rate + 1.96 * r.mc_std_error);
    out << curve << ',' << r.study << ',' << to_string(r.dgp) << ',' << to_string(r.error_law) << ','
        << to_string(r.method) << ',' << r.scheme << ',' << number(r.c) << ',' << (level ? "c" : "delta") << ','
        << number(level ? r.c : r.delta) << ',' << number(r.rejection_rate) << ',' << number(lower) << ','
        << number(upper) << '\n';
  }
}

}  // namespace qcheck
