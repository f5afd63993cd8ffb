#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xmes/xmes.hpp"

namespace xmes::cli {

namespace fs = std::filesystem;

struct Globals {
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out = ".";
};

struct SimulateArgs {
  std::string model;
  std::optional<double> dependence;
  std::size_t n = 500;
  std::size_t replicates = 1000;
  double tau = 0.998;
  std::vector<std::size_t> k_grid;
  std::vector<double> k_fractions;
  std::vector<std::string> estimators{"plain", "adjusted", "emp", "cai"};
  std::vector<std::string> intervals{"basic_plain", "basic_adjusted", "refined_plain", "refined_adjusted"};
  double alpha = 0.05;
  int component = -1;  // 1-based; 0 means all; -1 picks the preset default
  std::vector<double> truth;
  std::uint64_t oracle_draws = 0;
  std::optional<std::size_t> s;
};

struct OracleArgs {
  std::string model;
  std::optional<double> dependence;
  double tau = 0.998;
  std::uint64_t draws = 10'000'000;
  std::uint64_t batch = std::uint64_t{1} << 20;
};

struct SampleArgs {
  std::string model;
  std::optional<double> dependence;
  std::size_t n = 500;
};

struct EstimateArgs {
  std::string data;
  std::size_t k = 0;
  double tau = 0.998;
  std::string variant = "plain";
  std::string ci = "refined";
  double alpha = 0.05;
  std::optional<std::size_t> s;
  std::size_t serial_lags = 0;
};

struct AnalyzeArgs {
  std::string prices;
  std::string caps;
  std::size_t k = 0;
  std::optional<double> tau;
  std::optional<double> return_period;
  double freq = 52.0;
  std::size_t serial_lags = 0;
  double alpha = 0.05;
  std::string variant = "adjusted";
  std::string ci = "refined";
  std::string returns = "open-close";
  std::optional<std::size_t> s;
  bool svg = true;
};

struct SerialArgs {
  std::string data;
  std::size_t k = 0;
  std::optional<std::size_t> lags;
};

namespace detail {

inline std::ofstream create_file(const fs::path& p) {
  std::error_code ec;
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  std::ofstream f(p);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + p.string());
  return f;
}

inline DataMatrix load_matrix(const std::string& path, std::vector<std::string>* header = nullptr) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot read " + path);
  return read_matrix_csv(f, header);
}

inline IntervalSpec parse_interval(const std::string& s) {
  const auto us = s.find('_');
  if (us == std::string::npos) throw Error(ErrorCode::InvalidInput, "interval must be <kind>_<base>: " + s);
  return {parse_ci_kind(s.substr(0, us)), parse_variant(s.substr(us + 1)), 0};
}

// Burr margin for model (iv), first component elsewhere.
inline std::size_t default_component(const std::string& model) { return model == "model_iv" ? 1 : 0; }

// Options given on the command line or by an earlier config; defaults are left implicit.
inline void echo_config(const CLI::App& app, const fs::path& dir, const std::string& sub) {
  auto f = create_file(dir / (sub + "_config.toml"));
  f << app.config_to_str(false, false);
}

}  // namespace detail

inline int run_simulate(const Globals& g, const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  cfg.model = preset(a.model, a.dependence);
  cfg.n = a.n;
  cfg.replicates = a.replicates;
  cfg.tau = a.tau;
  if (!a.k_grid.empty()) cfg.k_grid = a.k_grid;
  else if (!a.k_fractions.empty()) cfg.k_grid = k_grid_from_fractions(a.n, a.k_fractions);
  else cfg.k_grid = default_k_grid(a.n);
  cfg.estimators.clear();
  for (const auto& e : a.estimators) cfg.estimators.push_back(parse_variant(e));
  cfg.intervals.clear();
  for (const auto& i : a.intervals) cfg.intervals.push_back(detail::parse_interval(i));
  cfg.alpha = a.alpha;
  if (a.component == 0) cfg.components.clear();
  else if (a.component > 0) cfg.components = {static_cast<std::size_t>(a.component - 1)};
  else cfg.components = {detail::default_component(a.model)};
  cfg.master_seed = g.seed;
  cfg.threads = g.threads;
  cfg.second_order_level = a.s;

  if (!a.truth.empty()) {
    cfg.truth = a.truth;
  } else if (a.oracle_draws > 0) {
    const auto orc = true_mes(cfg.model, a.tau, a.oracle_draws, derive_seed(g.seed, 0x6f7261636c65ULL),
                              {std::uint64_t{1} << 20, g.threads});
    cfg.truth = orc.theta;
  } else {
    if (a.tau != 0.998)
      throw Error(ErrorCode::MissingTruth, "published values exist for tau = 0.998 only; pass --truth or --oracle-draws");
    cfg.truth = published_truth(a.model);
    if (a.dependence) throw Error(ErrorCode::MissingTruth, "no published truth for a modified dependence parameter");
  }

  const CurveResult res = run_experiment(cfg);
  const auto files = emit_outputs(res, g.out);
  if (res.estimators.size() > 1 || cfg.components.size() != 1) {
    std::vector<Variant> seen;
    auto f = detail::create_file(fs::path(g.out) / (res.model + "_mse_envelope.csv"));
    f << "estimator,k,k_over_n,max_mse,avg_mse\n";
    for (const auto& c : res.estimators) {
      if (std::find(seen.begin(), seen.end(), c.estimator) != seen.end()) continue;
      seen.push_back(c.estimator);
      std::vector<EstimatorCurve> curves;
      for (const auto& o : res.estimators)
        if (o.estimator == c.estimator) curves.push_back(o);
      const auto env = max_avg_mse(curves);
      for (std::size_t i = 0; i < env.k_grid.size(); ++i)
        f << to_string(c.estimator) << ',' << env.k_grid[i] << ','
          << format_double(static_cast<double>(env.k_grid[i]) / static_cast<double>(res.n)) << ','
          << format_double(env.max[i]) << ',' << format_double(env.avg[i]) << '\n';
    }
  }
  for (const auto& c : res.estimators) {
    std::size_t failures = 0;
    for (const auto& p : c.points) failures += p.failures;
    if (failures) err << "warning: " << curve_label(c) << " dropped " << failures << " failed fits\n";
  }
  for (const auto& f : files) out << f.string() << '\n';
  return 0;
}

inline int run_oracle(const Globals& g, const OracleArgs& a, std::ostream& out) {
  const ModelSpec spec = preset(a.model, a.dependence);
  const auto res = true_mes(spec, a.tau, a.draws, g.seed, {a.batch, g.threads});
  std::ostringstream csv;
  csv << "component,theta,se,tau,draws\n";
  for (std::size_t j = 0; j < res.theta.size(); ++j)
    csv << j + 1 << ',' << format_double(res.theta[j]) << ',' << format_double(res.standard_error[j]) << ','
        << format_double(res.tau) << ',' << res.total_draws << '\n';
  auto f = detail::create_file(fs::path(g.out) / ("oracle_" + spec.name + ".csv"));
  f << csv.str();
  out << csv.str();
  return 0;
}

inline int run_sample(const Globals& g, const SampleArgs& a, std::ostream& out) {
  const ModelSpec spec = preset(a.model, a.dependence);
  const auto batch = sample_model(spec, a.n, g.seed);
  std::vector<std::string> header;
  for (std::size_t j = 0; j < spec.dim(); ++j) header.push_back("x" + std::to_string(j + 1));
  const auto path = fs::path(g.out) / (spec.name + "_sample.csv");
  auto f = detail::create_file(path);
  write_matrix_csv(f, batch.data, header);
  out << path.string() << '\n';
  return 0;
}

inline int run_estimate(const Globals& g, const EstimateArgs& a, std::ostream& out, std::ostream& err) {
  const DataMatrix x = detail::load_matrix(a.data);
  const RadialSample r = radial_decompose(x);
  const Variant v = parse_variant(a.variant);
  const bool want_ci = a.ci != "none";
  std::ostringstream csv;

  if (v == Variant::Emp || v == Variant::Cai) {
    if (want_ci) throw Error(ErrorCode::InvalidInput, "intervals are available for plain and adjusted only; use --ci none");
    const double gamma = hill_estimate(r, a.k);
    csv << "component,theta\n";
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const double t = v == Variant::Emp ? competitor_emp(x, r, j, a.k, a.tau, gamma)
                                         : competitor_cai(x, r, j, a.k, a.tau, gamma);
      csv << j + 1 << ',' << format_double(t) << '\n';
    }
  } else {
    std::optional<TailFit> fit;
    if (v == Variant::Adjusted || want_ci) fit = fit_tail(r, a.k, a.s.value_or(default_second_order_level(r)));
    const MesEstimate est = v == Variant::Adjusted ? mes_estimate_adjusted(r, a.k, *fit->second_order, a.tau)
                                                   : mes_estimate(r, a.k, a.tau);
    if (est.exceedances != a.k)
      err << "warning: " << est.exceedances << " strict exceedances of the threshold, k = " << a.k << '\n';
    std::optional<std::vector<Interval>> ci;
    if (want_ci) {
      const double inflation = a.serial_lags > 0 ? variance_inflation(r, a.k, a.serial_lags).inflation : 1.0;
      ci = confidence_interval(est, *fit, parse_ci_kind(a.ci), a.alpha, inflation);
    }
    csv << "component,theta" << (ci ? ",lower,upper" : "") << '\n';
    for (std::size_t j = 0; j < est.theta_hat.size(); ++j) {
      csv << j + 1 << ',' << format_double(est.theta_hat[j]);
      if (ci) csv << ',' << format_double((*ci)[j].lower) << ',' << format_double((*ci)[j].upper);
      csv << '\n';
    }
  }
  auto f = detail::create_file(fs::path(g.out) / "estimate.csv");
  f << csv.str();
  out << csv.str();
  return 0;
}

inline int run_analyze(const Globals& g, const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  if (a.tau.has_value() == a.return_period.has_value())
    throw CLI::ValidationError("analyze", "give exactly one of --tau and --return-period");
  const double tau = a.tau ? *a.tau : return_period_tau(a.freq, *a.return_period);
  const PricePanel panel = load_panel(a.prices, a.caps);
  ReportOptions opt;
  opt.variant = parse_variant(a.variant);
  opt.ci_kind = parse_ci_kind(a.ci);
  opt.alpha = a.alpha;
  opt.serial_lags = a.serial_lags;
  opt.second_order_level = a.s;
  ReturnMode mode;
  if (a.returns == "open-close") mode = ReturnMode::OpenClose;
  else if (a.returns == "previous-close") mode = ReturnMode::PreviousClose;
  else throw CLI::ValidationError("--returns", "expected open-close or previous-close");

  const RiskReport rep = build_report(panel, a.k, tau, opt, mode);
  if (rep.exceedances != a.k)
    err << "warning: " << rep.exceedances << " strict exceedances of the threshold, k = " << a.k << '\n';
  const fs::path dir(g.out);
  {
    auto f = detail::create_file(dir / "report.csv");
    write_report_csv(f, rep);
  }
  {
    auto f = detail::create_file(dir / "report_summary.csv");
    write_report_summary_csv(f, rep);
  }
  const DataMatrix x = compute_returns(panel, mode);
  const auto trace = gamma_stability(x, panel.names);
  {
    auto f = detail::create_file(dir / "gamma_stability.csv");
    write_stability_csv(f, trace, x.rows());
  }
  if (a.svg) {
    auto f = detail::create_file(dir / "gamma_stability.svg");
    write_stability_svg(f, trace, x.rows());
  }
  write_report_csv(out, rep);
  return 0;
}

inline int run_serial(const Globals& g, const SerialArgs& a, std::ostream& out) {
  const DataMatrix x = detail::load_matrix(a.data);
  const RadialSample r = radial_decompose(x);
  const auto adj = variance_inflation(r, a.k, a.lags.value_or(default_serial_lag(x.rows())));
  std::ostringstream csv;
  csv << "lag,r_hat\n";
  for (std::size_t t = 0; t < adj.r_hat.size(); ++t) csv << t + 1 << ',' << format_double(adj.r_hat[t]) << '\n';
  auto f = detail::create_file(fs::path(g.out) / "serial.csv");
  f << csv.str();
  out << csv.str() << "inflation," << format_double(adj.inflation) << '\n';
  return 0;
}

/// Parses argv and runs one subcommand. Exit codes: 0 success, 1 estimation
/// or I/O failure, 2 usage error.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Extreme marginal expected shortfall estimation", "xmes"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI configuration file; command-line flags take precedence");

  Globals g;
  if (const char* env = std::getenv("XMES_OUT_DIR"); env && *env) g.out = env;
  app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads, 0 for all cores")->capture_default_str();
  app.add_option("--out", g.out, "Output directory (default $XMES_OUT_DIR or .)")->capture_default_str();

  const auto models = CLI::IsMember(preset_names());

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo bias, variance, MSE and coverage curves");
  simulate->add_option("--model", sim.model)->required()->check(models);
  simulate->add_option("--dependence", sim.dependence, "Override the copula dependence parameter");
  simulate->add_option("--n", sim.n)->capture_default_str()->check(CLI::PositiveNumber);
  simulate->add_option("--M", sim.replicates, "Replicates")->capture_default_str()->check(CLI::PositiveNumber);
  simulate->add_option("--tau", sim.tau)->capture_default_str();
  auto* kg = simulate->add_option("--k-grid", sim.k_grid, "Explicit k values");
  simulate->add_option("--k-fractions", sim.k_fractions, "k/n values")->excludes(kg);
  simulate->add_option("--estimators", sim.estimators)->capture_default_str()
      ->check(CLI::IsMember({"plain", "adjusted", "emp", "cai"}));
  simulate->add_option("--intervals", sim.intervals, "<basic|refined>_<plain|adjusted>")->capture_default_str();
  simulate->add_option("--alpha", sim.alpha)->capture_default_str();
  simulate->add_option("--component", sim.component, "1-based component, 0 for all")->capture_default_str();
  simulate->add_option("--truth", sim.truth, "True MES per component");
  simulate->add_option("--oracle-draws", sim.oracle_draws, "Compute the truth by simulation")->capture_default_str();
  simulate->add_option("--s", sim.s, "Second-order level");

  OracleArgs orc;
  auto* oracle = app.add_subcommand("oracle", "Monte Carlo ground truth of the MES");
  oracle->add_option("--model", orc.model)->required()->check(models);
  oracle->add_option("--dependence", orc.dependence);
  oracle->add_option("--tau", orc.tau)->capture_default_str();
  oracle->add_option("--draws", orc.draws)->capture_default_str()->check(CLI::PositiveNumber);
  oracle->add_option("--batch", orc.batch)->capture_default_str()->check(CLI::PositiveNumber);

  SampleArgs smp;
  auto* sample = app.add_subcommand("sample", "Draw one panel from a model preset");
  sample->add_option("--model", smp.model)->required()->check(models);
  sample->add_option("--dependence", smp.dependence);
  sample->add_option("--n", smp.n)->capture_default_str()->check(CLI::PositiveNumber);

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "MES estimates for a data matrix");
  estimate->add_option("--data", est.data)->required();
  estimate->add_option("--k", est.k)->required();
  estimate->add_option("--tau", est.tau)->capture_default_str();
  estimate->add_option("--variant", est.variant)->capture_default_str()
      ->check(CLI::IsMember({"plain", "adjusted", "emp", "cai"}));
  estimate->add_option("--ci", est.ci)->capture_default_str()->check(CLI::IsMember({"basic", "refined", "none"}));
  estimate->add_option("--alpha", est.alpha)->capture_default_str();
  estimate->add_option("--s", est.s, "Second-order level");
  estimate->add_option("--serial-lags", est.serial_lags)->capture_default_str();

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Risk ranking from weekly prices");
  analyze->add_option("--prices", an.prices)->required();
  analyze->add_option("--caps", an.caps)->required();
  analyze->add_option("--k", an.k)->required();
  analyze->add_option("--tau", an.tau);
  analyze->add_option("--return-period", an.return_period, "Years between exceedances");
  analyze->add_option("--freq", an.freq, "Observations per year")->capture_default_str();
  analyze->add_option("--serial-lags", an.serial_lags)->capture_default_str();
  analyze->add_option("--alpha", an.alpha)->capture_default_str();
  analyze->add_option("--variant", an.variant)->capture_default_str()->check(CLI::IsMember({"plain", "adjusted"}));
  analyze->add_option("--ci", an.ci)->capture_default_str()->check(CLI::IsMember({"basic", "refined"}));
  analyze->add_option("--returns", an.returns)->capture_default_str()
      ->check(CLI::IsMember({"open-close", "previous-close"}));
  analyze->add_option("--s", an.s, "Second-order level");
  analyze->add_flag("--svg,!--no-svg", an.svg, "Write the stability plot")->capture_default_str();

  SerialArgs ser;
  auto* serial = app.add_subcommand("serial", "Serial tail dependence and variance inflation");
  serial->add_option("--data", ser.data)->required();
  serial->add_option("--k", ser.k)->required();
  serial->add_option("--lags", ser.lags, "Truncation lag (default min(sqrt(n), 50))");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    detail::echo_config(app, g.out, sub->get_name());
    if (sub == simulate) return run_simulate(g, sim, out, err);
    if (sub == oracle) return run_oracle(g, orc, out);
    if (sub == sample) return run_sample(g, smp, out);
    if (sub == estimate) return run_estimate(g, est, out, err);
    if (sub == analyze) return run_analyze(g, an, out, err);
    if (sub == serial) return run_serial(g, ser, out);
  } catch (const CLI::Error& e) {
    err << "usage: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << error_name(ErrorCode::IoError) << ": " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace xmes::cli
