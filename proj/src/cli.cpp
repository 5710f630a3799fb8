#include "qcheck/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qcheck/bootstrap.hpp"
#include "qcheck/data.hpp"
#include "qcheck/error.hpp"
#include "qcheck/kernels.hpp"
#include "qcheck/loftests.hpp"
#include "qcheck/mc.hpp"
#include "qcheck/model.hpp"
#include "qcheck/qrfit.hpp"

namespace qcheck::cli {

namespace {

using json = nlohmann::ordered_json;

std::string number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

template <typename T, typename Fn>
std::string join(const std::vector<T>& items, Fn&& show) {
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) s += ',';
    s += show(items[i]);
  }
  return s;
}

std::vector<std::string> split_list(const std::string& text, const std::string& flag) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  if (out.empty()) throw ConfigError(flag + ": empty list");
  return out;
}

std::vector<double> parse_doubles(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  for (const auto& item : split_list(text, flag)) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size() || !std::isfinite(v))
      throw ConfigError(flag + ": cannot parse '" + item + "' as a number");
    out.push_back(v);
  }
  return out;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("QCHECK_SEED")) {
    std::uint64_t v = 0;
    const std::string_view s(env);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw ConfigError("QCHECK_SEED: cannot parse '" + std::string(s) + "' as an unsigned integer");
    return v;
  }
  return 0;
}

struct DataFlags {
  std::string path;
  std::string w_col;
  std::string y_col = "y";
  bool standardize = false;
};

struct ModelFlags {
  std::string path;
  std::string inline_terms;
};

struct FitFlags {
  DataFlags data;
  ModelFlags model;
  double tau = 0.0;
  std::string out;
};

struct TestFlags {
  DataFlags data;
  ModelFlags model;
  double tau = 0.0;
  std::string method = "mlp";
  std::string kernel = "triangle";
  std::string psi = "gaussian";
  double c = 1.0;
  std::string bootstrap;
  std::optional<int> replications;
  std::optional<std::uint64_t> seed;
  double alpha = 0.10;
  int threads = 1;
  std::string out;
};

struct SimulateFlags {
  std::string study;
  int reps = 1000;
  int replications = 199;
  Eigen::Index n = 100;
  std::optional<std::uint64_t> seed;
  std::string c_grid = "0.5,1,2,4";
  std::string kernel = "triangle";
  double alpha = 0.10;
  std::string error_laws;
  std::string schemes = "wild,naive,uniform";
  std::string families = "setup1,setup2";
  std::string methods = "mlp,zheng,hz";
  std::string deltas_setup1 = "0,0.05,0.1,0.15,0.2";
  std::string deltas_setup2 = "0,0.25,0.5,0.75,1";
  int threads = 1;
  std::string out;
  std::string plot_out;
};

void add_data_flags(CLI::App* cmd, DataFlags& f) {
  cmd->add_option("--data", f.path, "CSV file with a header row")->required();
  cmd->add_option("--w-col", f.w_col, "column playing the role of the smoothed covariate W")->required();
  cmd->add_option("--y-col", f.y_col, "response column")->capture_default_str();
  cmd->add_flag("--standardize", f.standardize, "center and scale every covariate column");
}

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  auto* path = cmd->add_option("--model", f.path, "model file, one term per line");
  auto* inl = cmd->add_option("--model-inline", f.inline_terms, "comma-separated terms, e.g. \"intercept,raw w\"");
  path->excludes(inl);
  inl->excludes(path);
}

ModelSpec resolve_model(const ModelFlags& f) {
  if (!f.path.empty()) return load_model(f.path);
  if (!f.inline_terms.empty()) return parse_model_inline(f.inline_terms);
  throw ConfigError("one of --model or --model-inline is required");
}

struct LoadedData {
  Dataset data;
  std::optional<StandardizationReport> report;
};

LoadedData resolve_data(const DataFlags& f) {
  LoadedData out{load_csv(f.path, {f.w_col, f.y_col}), std::nullopt};
  if (f.standardize) {
    auto [d, report] = standardize(out.data);
    out.data = std::move(d);
    out.report = std::move(report);
  }
  return out;
}

std::vector<std::string> data_argv(const DataFlags& f) {
  std::vector<std::string> a{"--data", f.path, "--w-col", f.w_col, "--y-col", f.y_col};
  if (f.standardize) a.push_back("--standardize");
  return a;
}

json standardization_json(const StandardizationReport& r) {
  json cols = json::array();
  for (const auto& c : r.columns) cols.push_back({{"name", c.name}, {"mean", c.mean}, {"sd", c.sd}});
  return cols;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

template <typename WriteFn>
void emit(const std::string& path, std::ostream& out, WriteFn&& write) {
  if (path.empty()) {
    write(out);
    return;
  }
  std::ofstream file(path);
  if (!file) throw ConfigError("--out: cannot open '" + path + "' for writing");
  write(file);
}

void check_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("--tau must lie strictly inside (0, 1)");
}

int run_fit(const FitFlags& f, std::ostream& out) {
  check_tau(f.tau);
  const ModelSpec model = resolve_model(f.model);
  const LoadedData loaded = resolve_data(f.data);
  model.validate(loaded.data);
  const FitResult result = fit(model, loaded.data, f.tau);

  std::vector<std::string> argv{"fit"};
  for (auto& a : data_argv(f.data)) argv.push_back(a);
  for (auto& a : std::vector<std::string>{"--model-inline", model.to_inline(), "--tau", number(f.tau)})
    argv.push_back(a);

  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = "fit";
  j["terms"] = json::array();
  for (const auto& t : model.terms) j["terms"].push_back(t.label());
  j["beta"] = std::vector<double>(result.coef.beta.data(), result.coef.beta.data() + result.coef.beta.size());
  j["objective"] = result.objective;
  j["n_zero_residuals"] = result.n_zero_residuals;
  j["tau"] = f.tau;
  j["n"] = loaded.data.size();
  if (loaded.report) j["standardization"] = standardization_json(*loaded.report);
  j["config"] = {{"data", f.data.path},   {"w_col", f.data.w_col},      {"y_col", f.data.y_col},
                 {"standardize", f.data.standardize}, {"model", model.to_inline()}, {"tau", f.tau}};
  j["argv"] = argv;
  emit(f.out, out, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
  return kExitOk;
}

int run_test(const TestFlags& f, std::ostream& out, std::ostream& err, int verbosity) {
  check_tau(f.tau);
  const Method method = parse_method(f.method);
  KernelSpec kspec;
  kspec.k_family = parse_kernel_family(f.kernel);
  kspec.psi_family = parse_psi_family(f.psi);
  kspec.c = f.c;
  if (!(f.c > 0.0)) throw ConfigError("--c must be positive");
  std::optional<BootstrapConfig> boot;
  if (!f.bootstrap.empty()) {
    if (!f.replications) throw ConfigError("--bootstrap requires --B");
    BootstrapConfig cfg;
    cfg.scheme = parse_scheme(f.bootstrap);
    cfg.replications = *f.replications;
    cfg.seed = resolve_seed(f.seed);
    cfg.alpha = f.alpha;
    cfg.threads = f.threads;
    cfg.validate();
    boot = cfg;
  } else if (f.replications) {
    throw ConfigError("--B requires --bootstrap");
  }
  if (!(f.alpha > 0.0 && f.alpha < 1.0)) throw ConfigError("--alpha must lie strictly inside (0, 1)");
  if (f.threads < 1) throw ConfigError("--threads must be at least 1");

  const ModelSpec model = resolve_model(f.model);
  const LoadedData loaded = resolve_data(f.data);
  model.validate(loaded.data);
  const Dataset& d = loaded.data;

  const auto start = std::chrono::steady_clock::now();
  TestResult observed;
  std::optional<BootstrapOutcome> outcome;
  FitResult base;
  if (boot) {
    auto [t, o] = bootstrap_test(method, model, d, f.tau, kspec, *boot);
    observed = std::move(t);
    outcome = std::move(o);
  } else {
    const Eigen::MatrixXd design = design_matrix(model, d);
    base = fit(model, d, f.tau);
    observed = prepare_statistic(method, design, d, kspec, f.tau)->evaluate(base.residuals);
  }
  if (verbosity > 0)
    err << "qcheck: " << to_string(method) << " test finished in "
        << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() << " s\n";

  std::vector<std::string> argv{"test"};
  for (auto& a : data_argv(f.data)) argv.push_back(a);
  for (auto& a : std::vector<std::string>{"--model-inline", model.to_inline(), "--tau", number(f.tau), "--method",
                                          to_string(method), "--kernel", to_string(kspec.k_family), "--psi",
                                          to_string(kspec.psi_family), "--c", number(kspec.c), "--alpha",
                                          number(f.alpha)})
    argv.push_back(a);
  if (boot)
    for (auto& a : std::vector<std::string>{"--bootstrap", to_string(boot->scheme), "--B",
                                            std::to_string(boot->replications), "--seed", std::to_string(boot->seed)})
      argv.push_back(a);

  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = "test";
  j["method"] = to_string(method);
  j["statistic"] = observed.statistic;
  j["p_asymptotic"] = optional_json(observed.p_asymptotic);
  j["p_value"] = outcome ? json(outcome->p_value) : json(nullptr);
  j["critical_value"] = outcome ? json(outcome->critical_value) : json(nullptr);
  j["reject"] = outcome ? json(outcome->reject) : json(nullptr);
  j["scheme"] = outcome ? json(to_string(outcome->scheme)) : json(nullptr);
  j["B"] = outcome ? json(outcome->t_star.size()) : json(nullptr);
  j["h"] = optional_json(observed.h);
  j["i_n"] = optional_json(observed.i_n);
  j["v_n2"] = optional_json(observed.v_n2);
  j["tau"] = f.tau;
  j["n"] = d.size();
  if (loaded.report) j["standardization"] = standardization_json(*loaded.report);
  j["config"] = {{"data", f.data.path},
                 {"w_col", f.data.w_col},
                 {"y_col", f.data.y_col},
                 {"standardize", f.data.standardize},
                 {"model", model.to_inline()},
                 {"tau", f.tau},
                 {"method", to_string(method)},
                 {"kernel", to_string(kspec.k_family)},
                 {"psi", to_string(kspec.psi_family)},
                 {"c", kspec.c},
                 {"alpha", f.alpha},
                 {"bootstrap", boot ? json(to_string(boot->scheme)) : json(nullptr)},
                 {"B", boot ? json(boot->replications) : json(nullptr)},
                 {"seed", boot ? json(boot->seed) : json(nullptr)}};
  j["argv"] = argv;
  emit(f.out, out, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
  return kExitOk;
}

int run_simulate(const SimulateFlags& f, std::ostream& out, std::ostream& err, int verbosity) {
  if (f.study != "level" && f.study != "power")
    throw ConfigError("--study must be 'level' or 'power'");
  const std::uint64_t seed = resolve_seed(f.seed);
  const auto c_grid = parse_doubles(f.c_grid, "--c-grid");
  const auto kernel = parse_kernel_family(f.kernel);
  const std::string laws_text =
      f.error_laws.empty() ? (f.study == "level" ? "gauss,lognorm_centered,hetero_gauss" : "gauss,hetero_gauss")
                           : f.error_laws;
  std::vector<ErrorLaw> laws;
  for (const auto& s : split_list(laws_text, "--error-laws")) laws.push_back(parse_error_law(s));

  std::vector<std::string> argv{"simulate", "--study", f.study, "--reps", std::to_string(f.reps), "--B",
                                std::to_string(f.replications), "--n", std::to_string(f.n), "--seed",
                                std::to_string(seed), "--c-grid", join(c_grid, number), "--kernel",
                                to_string(kernel), "--alpha", number(f.alpha), "--error-laws",
                                join(laws, [](ErrorLaw l) { return to_string(l); })};
  McResult result;
  const auto start = std::chrono::steady_clock::now();
  if (f.study == "level") {
    LevelStudyConfig cfg;
    cfg.error_laws = laws;
    cfg.schemes.clear();
    for (const auto& s : split_list(f.schemes, "--schemes")) cfg.schemes.push_back(parse_scheme(s));
    cfg.c_grid = c_grid;
    cfg.kernel.k_family = kernel;
    cfg.n = f.n;
    cfg.reps = f.reps;
    cfg.replications = f.replications;
    cfg.alpha = f.alpha;
    cfg.seed = seed;
    cfg.threads = f.threads;
    argv.push_back("--schemes");
    argv.push_back(join(cfg.schemes, [](Scheme s) { return to_string(s); }));
    result = run_level_study(cfg);
  } else {
    PowerStudyConfig cfg;
    cfg.families.clear();
    for (const auto& s : split_list(f.families, "--families")) cfg.families.push_back(parse_dgp_family(s));
    cfg.methods.clear();
    for (const auto& s : split_list(f.methods, "--methods")) cfg.methods.push_back(parse_method(s));
    cfg.error_laws = laws;
    cfg.delta_setup1 = parse_doubles(f.deltas_setup1, "--deltas-setup1");
    cfg.delta_setup2 = parse_doubles(f.deltas_setup2, "--deltas-setup2");
    for (double dl : cfg.delta_setup1) if (dl < 0) throw ConfigError("--deltas-setup1: delta must be nonnegative");
    for (double dl : cfg.delta_setup2) if (dl < 0) throw ConfigError("--deltas-setup2: delta must be nonnegative");
    cfg.c_grid = c_grid;
    cfg.kernel.k_family = kernel;
    cfg.n = f.n;
    cfg.reps = f.reps;
    cfg.replications = f.replications;
    cfg.alpha = f.alpha;
    cfg.seed = seed;
    cfg.threads = f.threads;
    for (auto& a : std::vector<std::string>{
             "--families", join(cfg.families, [](DgpFamily x) { return to_string(x); }), "--methods",
             join(cfg.methods, [](Method m) { return to_string(m); }), "--deltas-setup1",
             join(cfg.delta_setup1, number), "--deltas-setup2", join(cfg.delta_setup2, number)})
      argv.push_back(a);
    result = run_power_study(cfg);
  }
  if (verbosity > 0)
    err << "qcheck: " << f.study << " study finished in "
        << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() << " s\n";

  std::string flags;
  for (const auto& a : argv) flags += (flags.empty() ? "" : " ") + a;
  const auto header = [&](std::ostream& o) {
    o << "# schema_version=" << kSchemaVersion << '\n' << "# argv: " << flags << '\n';
  };
  emit(f.out, out, [&](std::ostream& o) {
    header(o);
    write_mc_csv(o, result);
  });
  if (!f.plot_out.empty()) {
    std::ofstream plot(f.plot_out);
    if (!plot) throw ConfigError("--emit-plot-data: cannot open '" + f.plot_out + "' for writing");
    header(plot);
    write_plot_data(plot, result);
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"qcheck: lack-of-fit tests for parametric quantile regression"};
  app.name("qcheck");
  app.require_subcommand(1);
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "report timings on standard error");

  FitFlags fit_flags;
  auto* fit_cmd = app.add_subcommand("fit", "quantile regression by the simplex method");
  add_data_flags(fit_cmd, fit_flags.data);
  add_model_flags(fit_cmd, fit_flags.model);
  fit_cmd->add_option("--tau", fit_flags.tau, "quantile level in (0, 1)")->required();
  fit_cmd->add_option("--out", fit_flags.out, "write JSON here instead of standard output");

  TestFlags test_flags;
  auto* test_cmd = app.add_subcommand("test", "lack-of-fit test of a fitted quantile regression");
  add_data_flags(test_cmd, test_flags.data);
  add_model_flags(test_cmd, test_flags.model);
  test_cmd->add_option("--tau", test_flags.tau, "quantile level in (0, 1)")->required();
  test_cmd->add_option("--method", test_flags.method, "mlp | zheng | hz")->capture_default_str();
  test_cmd->add_option("--kernel", test_flags.kernel, "triangle | gaussian | laplace | logistic")->capture_default_str();
  test_cmd->add_option("--psi", test_flags.psi, "weight on X: gaussian")->capture_default_str();
  test_cmd->add_option("--c", test_flags.c, "bandwidth constant, h = c n^(-1/5)")->capture_default_str();
  test_cmd->add_option("--bootstrap", test_flags.bootstrap, "wild | naive | uniform");
  test_cmd->add_option("--B", test_flags.replications, "bootstrap replications");
  test_cmd->add_option("--seed", test_flags.seed, "random seed (fallback: QCHECK_SEED, then 0)");
  test_cmd->add_option("--alpha", test_flags.alpha, "nominal level")->capture_default_str();
  test_cmd->add_option("--threads", test_flags.threads, "worker threads; results do not depend on it")
      ->capture_default_str();
  test_cmd->add_option("--out", test_flags.out, "write JSON here instead of standard output");

  SimulateFlags sim_flags;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo level or power study");
  sim_cmd->add_option("--study", sim_flags.study, "level | power")->required();
  sim_cmd->add_option("--reps", sim_flags.reps, "Monte Carlo replications per cell")->capture_default_str();
  sim_cmd->add_option("--B", sim_flags.replications, "bootstrap replications")->capture_default_str();
  sim_cmd->add_option("--n", sim_flags.n, "sample size")->capture_default_str();
  sim_cmd->add_option("--seed", sim_flags.seed, "random seed (fallback: QCHECK_SEED, then 0)");
  sim_cmd->add_option("--c-grid", sim_flags.c_grid, "bandwidth constants")->capture_default_str();
  sim_cmd->add_option("--kernel", sim_flags.kernel, "smoothing kernel")->capture_default_str();
  sim_cmd->add_option("--alpha", sim_flags.alpha, "nominal level")->capture_default_str();
  sim_cmd->add_option("--error-laws", sim_flags.error_laws, "gauss,lognorm_centered,hetero_gauss");
  sim_cmd->add_option("--schemes", sim_flags.schemes, "level study bootstrap schemes")->capture_default_str();
  sim_cmd->add_option("--families", sim_flags.families, "power study designs")->capture_default_str();
  sim_cmd->add_option("--methods", sim_flags.methods, "power study tests")->capture_default_str();
  sim_cmd->add_option("--deltas-setup1", sim_flags.deltas_setup1, "delta grid for setup1")->capture_default_str();
  sim_cmd->add_option("--deltas-setup2", sim_flags.deltas_setup2, "delta grid for setup2")->capture_default_str();
  sim_cmd->add_option("--threads", sim_flags.threads, "worker threads; results do not depend on it")
      ->capture_default_str();
  sim_cmd->add_option("--out", sim_flags.out, "write CSV here instead of standard output");
  sim_cmd->add_option("--emit-plot-data", sim_flags.plot_out, "also write long-format curve data here");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (fit_cmd->parsed()) return run_fit(fit_flags, out);
    if (test_cmd->parsed()) return run_test(test_flags, out, err, verbosity);
    if (sim_cmd->parsed()) return run_simulate(sim_flags, out, err, verbosity);
  } catch (const ConfigError& e) {
    err << "qcheck: configuration error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const Error& e) {
    err << "qcheck: error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const std::exception& e) {
    err << "qcheck: error: " << e.what() << '\n';
    return kExitDataError;
  }
  return kExitConfigError;
}

}  // namespace qcheck::cli
