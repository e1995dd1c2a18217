#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "focus/errors.hpp"
#include "focus/io.hpp"

#ifndef FOCUS_VERSION
#define FOCUS_VERSION "0.0.0"
#endif

namespace focus::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, message);
}

const KeySpec* find_spec(const std::string& key) {
  for (const auto& s : key_specs()) {
    if (key == s.key) return &s;
  }
  return nullptr;
}

std::string section_of(const std::string& key) { return key.substr(0, key.find('.')); }

std::string flag_of(const std::string& key) {
  if (key == "output.dir") return "--out";
  std::string name = key.substr(key.find('.') + 1);
  std::replace(name.begin(), name.end(), '_', '-');
  return "--" + name;
}

long long parse_int(const std::string& key, const std::string& s) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    invalid(key + ": expected an integer, got '" + s + "'");
  }
  return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    invalid(key + ": expected a nonnegative integer, got '" + s + "'");
  }
  return v;
}

double parse_real(const std::string& key, const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    invalid(key + ": expected a number, got '" + s + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  invalid(key + ": expected true or false, got '" + s + "'");
}

std::vector<std::string> parse_list(const std::string& s) {
  std::vector<std::string> items;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

RankMethod parse_rank(const std::string& s) {
  const std::string prefix = "explained_variance(";
  if (s == "eigen_ratio") return RankMethod::eigen_ratio();
  if (s.rfind(prefix, 0) == 0 && s.back() == ')') {
    const double x = parse_real("model.rank", s.substr(prefix.size(), s.size() - prefix.size() - 1));
    if (!(x > 0.0 && x <= 1.0)) invalid("model.rank: explained variance must be in (0, 1]");
    return RankMethod::explained_variance(x);
  }
  const long long r = parse_int("model.rank", s);
  if (r < 1) invalid("model.rank: rank must be at least 1");
  return RankMethod::fixed(static_cast<Eigen::Index>(r));
}

EigenMethod parse_eigen(const std::string& s) {
  if (s == "auto") return EigenMethod::kAuto;
  if (s == "full") return EigenMethod::kFull;
  if (s == "iterative") return EigenMethod::kIterative;
  invalid("model.eigen: expected auto, full or iterative, got '" + s + "'");
}

int positive_int(const KeyValues& v, const std::string& key) {
  const long long x = parse_int(key, v.at(key));
  if (x < 1 || x > std::numeric_limits<int>::max()) invalid(key + ": must be a positive integer");
  return static_cast<int>(x);
}

void require_file(const std::string& key, const fs::path& path) {
  if (path.empty()) invalid(key + " is required");
  if (!fs::is_regular_file(path)) invalid(key + ": no such file '" + path.string() + "'");
}

int exit_code(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kValidation: return 1;
    case ErrorCategory::kNumerical: return 2;
    case ErrorCategory::kIo: return 3;
  }
  return 2;
}

LabeledPanel load_panel(const RunConfig& cfg) {
  if (cfg.format == "long") return read_long_csv(cfg.panel);
  if (cfg.mask.empty()) return read_wide_csv(cfg.panel);
  return read_wide_csv(cfg.panel, cfg.mask);
}

std::string short_number(double v) {
  if (std::isnan(v)) return "-";
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json model_summary(const FocusModel& model) {
  const auto degenerate = std::count(model.fit.loading_ok.begin(), model.fit.loading_ok.end(), false);
  return json{{"n_units", model.fit.n_units()},
              {"n_times", model.fit.n_times()},
              {"rank", model.fit.rank},
              {"transposed", model.fit.transposed},
              {"detrended", model.trend.has_value()},
              {"var_order", model.dynamics.order},
              {"spectral_radius", number_or_null(model.dynamics.spectral_radius)},
              {"stable", model.dynamics.stable()},
              {"zero_filled_pairs", model.fit.zero_filled.size()},
              {"degenerate_units", degenerate}};
}

void write_manifest(const RunConfig& cfg, const KeyValues& values, const json& results,
                    const std::vector<std::string>& outputs) {
  json config = json::object();
  for (const auto& [k, v] : values) config[k] = v;
  const json manifest{{"tool", "focus_cli"},
                      {"version", FOCUS_VERSION},
                      {"command", cfg.command},
                      {"seed", cfg.seed},
                      {"config", config},
                      {"results", results},
                      {"outputs", outputs}};
  write_text_file(cfg.out_dir / "manifest.json", manifest.dump(2) + "\n");
}

void write_trend_csv(const fs::path& path, const FocusModel& model,
                     const std::vector<std::string>& time_labels) {
  std::vector<std::string> header{"time"};
  for (Eigen::Index k = 0; k < model.trend->trend.cols(); ++k) {
    header.push_back("trend_" + std::to_string(k + 1));
  }
  write_matrix_csv(path, header, model.trend->trend, time_labels);
}

int cmd_fit(const RunConfig& cfg, const KeyValues& values, std::ostream& out) {
  const LabeledPanel data = load_panel(cfg);
  const FocusModel model = fit_focus(data.panel, cfg.focus);
  std::vector<std::string> outputs{"factors.csv", "loadings.csv", "eigenvalues.csv",
                                   "dynamics.csv"};
  write_factors_csv(cfg.out_dir / "factors.csv", model.fit, data.time_labels);
  write_loadings_csv(cfg.out_dir / "loadings.csv", model.fit, data.unit_labels);
  write_eigenvalues_csv(cfg.out_dir / "eigenvalues.csv", model.fit);
  write_dynamics_csv(cfg.out_dir / "dynamics.csv", model.dynamics);
  if (model.trend) {
    write_trend_csv(cfg.out_dir / "trend.csv", model, data.time_labels);
    outputs.emplace_back("trend.csv");
  }
  write_manifest(cfg, values, model_summary(model), outputs);
  out << "fit: N=" << data.panel.n_units() << " T=" << data.panel.n_times()
      << " rank=" << model.fit.rank << " VAR(" << model.dynamics.order
      << ") spectral radius " << format_double(model.dynamics.spectral_radius) << "\n"
      << "wrote " << outputs.size() + 1 << " files to " << cfg.out_dir.string() << "\n";
  return 0;
}

int cmd_forecast(const RunConfig& cfg, const KeyValues& values, std::ostream& out) {
  const LabeledPanel data = load_panel(cfg);
  if (cfg.dump_unit > data.panel.n_units()) invalid("forecast.dump_unit exceeds the number of units");
  const FocusModel model = fit_focus(data.panel, cfg.focus);
  const auto rows = forecast_with_ci(data.panel, model, cfg.horizons, cfg.alpha, cfg.focus);
  std::vector<std::string> outputs{"forecasts.csv"};
  write_forecasts_csv(cfg.out_dir / "forecasts.csv", rows, data.unit_labels);

  if (cfg.dump_unit > 0) {
    const OverlapStats stats = compute_overlap_stats(data.panel, cfg.focus.quad_samples,
                                                     cfg.focus.overlap);
    const VarianceComponents v = unit_variance(data.panel, model, stats, cfg.dump_unit - 1,
                                               cfg.horizons.front(), cfg.focus.variance);
    auto pieces = named_pieces(v.pieces);
    pieces.emplace_back("xi_sq", Eigen::MatrixXd::Constant(1, 1, v.xi_sq));
    pieces.emplace_back("tau_sq", Eigen::MatrixXd::Constant(1, 1, v.tau_sq));
    pieces.emplace_back("sigma_sq", Eigen::MatrixXd::Constant(1, 1, v.sigma_sq));
    write_variance_pieces_csv(cfg.out_dir / "variance_pieces.csv", pieces);
    outputs.emplace_back("variance_pieces.csv");
  }

  const auto with_ci = std::count_if(rows.begin(), rows.end(),
                                     [](const ForecastResult& r) { return r.has_ci(); });
  json results = model_summary(model);
  results["rows"] = rows.size();
  results["rows_with_ci"] = with_ci;
  write_manifest(cfg, values, results, outputs);
  out << "forecast: " << rows.size() << " rows, " << with_ci << " with intervals\n"
      << "wrote " << outputs.size() + 1 << " files to " << cfg.out_dir.string() << "\n";
  return 0;
}

int cmd_simulate(const RunConfig& cfg, const KeyValues& values, std::ostream& out) {
  const ExperimentResult result = run_experiment(cfg.grid);
  write_experiment_csv(cfg.out_dir / "experiment.csv", result);
  write_experiment_summary_csv(cfg.out_dir / "summary.csv", result);
  write_experiment_slopes_csv(cfg.out_dir / "slopes.csv", result);
  const auto failed = std::count_if(result.rows.begin(), result.rows.end(),
                                    [](const ExperimentRow& r) { return r.failed; });
  json slopes = json::array();
  for (const auto& s : result.slopes) {
    slopes.push_back({{"dgp", s.dgp}, {"method", s.method}, {"slope", number_or_null(s.slope)}});
  }
  write_manifest(cfg, values, json{{"rows", result.rows.size()}, {"failed", failed}, {"slopes", slopes}},
                 {"experiment.csv", "summary.csv", "slopes.csv"});

  out << std::left << std::setw(8) << "dgp" << std::setw(6) << "T" << std::setw(16) << "method"
      << std::setw(14) << "mean_msfe" << "wilcoxon_p\n";
  for (const auto& c : result.cells) {
    out << std::setw(8) << c.dgp << std::setw(6) << c.n_times << std::setw(16) << c.method
        << std::setw(14) << short_number(c.mean_msfe) << short_number(c.wilcoxon_p) << "\n";
  }
  for (const auto& s : result.slopes) {
    out << "slope " << s.dgp << " " << s.method << " " << short_number(s.slope) << "\n";
  }
  out << result.rows.size() << " rows (" << failed << " failed) written to "
      << cfg.out_dir.string() << "\n";
  return 0;
}

int cmd_eval(const RunConfig& cfg, const KeyValues& values, std::ostream& out) {
  const LabeledPanel data = load_panel(cfg);
  const Panel& full = data.panel;
  const Eigen::Index t_train = full.n_times() - cfg.holdout;
  if (t_train < 4) invalid("eval.holdout leaves fewer than 4 training periods");
  const Panel train(full.values().leftCols(t_train), full.mask().leftCols(t_train));
  const FocusModel model = fit_focus(train, cfg.focus);
  const Eigen::VectorXd persistence = baseline_forecast(train, model.fit, BaselineKind::kPersistence);
  const Eigen::Index n = full.n_units();

  std::ostringstream csv;
  csv << "method,horizon,n,msfe,msrpe\n";
  json results = model_summary(model);
  results["evaluations"] = json::array();
  for (int h = 1; h <= cfg.holdout; ++h) {
    const Eigen::Index col = t_train + h - 1;
    const Eigen::VectorXd focus_points = point_forecasts(model, h);
    const std::vector<std::pair<std::string, Eigen::VectorXd>> methods{
        {"focus", focus_points}, {"persistence", persistence}, {"mean", Eigen::VectorXd::Zero(n)}};
    for (const auto& [name, points] : methods) {
      std::vector<double> f;
      std::vector<double> y;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!full.observed(i, col) || !std::isfinite(points(i))) continue;
        f.push_back(points(i));
        y.push_back(full.values()(i, col));
      }
      double msfe = std::numeric_limits<double>::quiet_NaN();
      double rel = std::numeric_limits<double>::quiet_NaN();
      if (!f.empty()) {
        const Eigen::Map<const Eigen::VectorXd> fv(f.data(), static_cast<Eigen::Index>(f.size()));
        const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
        msfe = (fv - yv).squaredNorm() / static_cast<double>(f.size());
        try {
          rel = msrpe(fv, yv);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kNoPositiveActuals) throw;
        }
      }
      const auto cell = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
      csv << name << "," << h << "," << f.size() << "," << cell(msfe) << "," << cell(rel) << "\n";
      results["evaluations"].push_back({{"method", name},
                                        {"horizon", h},
                                        {"n", f.size()},
                                        {"msfe", number_or_null(msfe)},
                                        {"msrpe", number_or_null(rel)}});
      out << "h=" << h << " " << std::left << std::setw(12) << name << " n=" << f.size()
          << " msfe=" << cell(msfe) << " msrpe=" << cell(rel) << "\n";
    }
  }
  write_text_file(cfg.out_dir / "eval.csv", csv.str());
  write_manifest(cfg, values, results, {"eval.csv"});
  return 0;
}

struct Sections {
  std::vector<std::string> names;
  bool has(const std::string& s) const {
    return std::find(names.begin(), names.end(), s) != names.end();
  }
};

Sections sections_for(const std::string& command) {
  if (command == "fit") return {{"input", "model", "output", "run"}};
  if (command == "forecast") return {{"input", "model", "forecast", "output", "run"}};
  if (command == "simulate") return {{"simulate", "model", "forecast", "output", "run"}};
  return {{"input", "model", "eval", "output", "run"}};
}

KeyValues read_manifest(const fs::path& path, const std::string& command) {
  if (!fs::is_regular_file(path)) invalid("no such manifest '" + path.string() + "'");
  const json j = json::parse(read_text_file(path));
  if (j.at("command").get<std::string>() != command) {
    invalid("manifest was written by '" + j.at("command").get<std::string>() + "', not '" +
            command + "'");
  }
  KeyValues values;
  for (const auto& [k, v] : j.at("config").items()) values[k] = v.get<std::string>();
  return values;
}

}  // namespace

const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs{
      {"input.panel", "", "panel CSV (required for fit, forecast and eval)", false},
      {"input.mask", "", "optional 0/1 mask CSV matching a wide panel", false},
      {"input.format", "wide", "panel layout: wide or long", false},
      {"model.rank", "1", "factor count: an integer, explained_variance(x) or eigen_ratio", false},
      {"model.transpose", "false", "estimate factors with unit and time roles swapped", true},
      {"model.detrend", "false", "remove a penalised-spline trend before the VAR fit", true},
      {"model.spline_knots", "0", "interior spline knots for detrending; 0 picks ceil(T/4)", false},
      {"model.cv_folds", "10", "forward-chained CV folds for the spline penalty", false},
      {"model.cv_grid_points", "25", "points on the log-spaced penalty grid", false},
      {"model.cv_grid_lo", "1e-4", "smallest grid penalty, relative to the basis scale", false},
      {"model.cv_grid_hi", "1e4", "largest grid penalty, relative to the basis scale", false},
      {"model.max_order", "1", "largest VAR order; above 1 the order is chosen by AIC", false},
      {"model.eigen", "auto", "eigensolver: auto, full or iterative", false},
      {"model.hac", "false", "Bartlett-kernel robust variance terms", true},
      {"model.hac_bandwidth", "-1", "HAC bandwidth; negative picks floor(4 (T/100)^(2/9))", false},
      {"model.quad_samples", "0", "sampled quadruples for omega3 when T > 64; 0 is exact", false},
      {"forecast.horizons", "1", "comma-separated forecast horizons", false},
      {"forecast.alpha", "0.05", "interval level is 1 - alpha", false},
      {"forecast.dump_unit", "0", "1-based unit whose variance pieces are written; 0 for none", false},
      {"output.dir", "focus_out", "output directory", false},
      {"run.seed", "20240501", "base seed for simulation and sampled omega3", false},
      {"run.threads", "1", "worker threads for simulate", false},
      {"simulate.dgps", "dgp1", "comma-separated designs: dgp1, dgp2, dgp3", false},
      {"simulate.n_times", "32,64,128,256", "comma-separated panel lengths", false},
      {"simulate.n_units", "64", "units per simulated panel", false},
      {"simulate.trials", "30", "trials per cell", false},
      {"simulate.horizon", "1", "forecast horizon", false},
      {"simulate.eval_units", "32", "leading units scored per trial", false},
      {"simulate.methods", "focus,persistence,mean",
       "comma-separated: focus, focus_detrend, persistence, mean, static_factor", false},
      {"simulate.with_ci", "false", "record interval coverage (uses forecast.alpha)", true},
      {"eval.holdout", "1", "trailing periods held out and forecast", false},
  };
  return specs;
}

KeyValues default_values() {
  KeyValues v;
  for (const auto& s : key_specs()) v[s.key] = s.default_value;
  return v;
}

void merge_values(KeyValues& base, const KeyValues& overrides) {
  for (const auto& [k, v] : overrides) {
    if (find_spec(k) == nullptr) invalid("unknown configuration key '" + k + "'");
    base[k] = v;
  }
}

KeyValues read_config_file(const fs::path& path) {
  if (!fs::is_regular_file(path)) invalid("no such config file '" + path.string() + "'");
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    invalid(std::string("config: ") + e.what());
  }
  KeyValues values;
  for (const auto& [section, entries] : tree) {
    if (entries.empty()) invalid("config: key '" + section + "' outside a section");
    for (const auto& [name, node] : entries) {
      const std::string key = section + "." + name;
      if (find_spec(key) == nullptr) invalid("config: unknown key '" + key + "'");
      values[key] = node.get_value<std::string>();
    }
  }
  return values;
}

RunConfig parse_config(const std::string& command, const KeyValues& values) {
  KeyValues v = default_values();
  merge_values(v, values);

  RunConfig cfg;
  cfg.command = command;
  cfg.panel = v.at("input.panel");
  cfg.mask = v.at("input.mask");
  cfg.format = v.at("input.format");
  if (cfg.format != "wide" && cfg.format != "long") invalid("input.format: expected wide or long");
  if (cfg.format == "long" && !cfg.mask.empty()) invalid("input.mask applies to wide panels only");

  cfg.focus.rank = parse_rank(v.at("model.rank"));
  cfg.focus.transpose = parse_bool("model.transpose", v.at("model.transpose"));
  cfg.focus.detrend = parse_bool("model.detrend", v.at("model.detrend"));
  BlockCvOptions& cv = cfg.focus.detrend_options;
  const long long knots = parse_int("model.spline_knots", v.at("model.spline_knots"));
  if (knots < 0) invalid("model.spline_knots must be nonnegative");
  cv.interior_knots = static_cast<Eigen::Index>(knots);
  cv.folds = positive_int(v, "model.cv_folds");
  if (cv.folds < 2) invalid("model.cv_folds must be at least 2");
  cv.grid_points = positive_int(v, "model.cv_grid_points");
  cv.grid_lo = parse_real("model.cv_grid_lo", v.at("model.cv_grid_lo"));
  cv.grid_hi = parse_real("model.cv_grid_hi", v.at("model.cv_grid_hi"));
  if (!(cv.grid_lo > 0.0 && cv.grid_hi >= cv.grid_lo)) {
    invalid("model.cv_grid_lo and model.cv_grid_hi must satisfy 0 < lo <= hi");
  }
  cfg.focus.max_order = positive_int(v, "model.max_order");
  cfg.focus.factor.eigen_method = parse_eigen(v.at("model.eigen"));
  cfg.focus.variance.hac = parse_bool("model.hac", v.at("model.hac"));
  cfg.focus.variance.hac_bandwidth =
      static_cast<int>(parse_int("model.hac_bandwidth", v.at("model.hac_bandwidth")));
  cfg.focus.quad_samples = parse_uint("model.quad_samples", v.at("model.quad_samples"));

  cfg.horizons.clear();
  for (const auto& h : parse_list(v.at("forecast.horizons"))) {
    const long long x = parse_int("forecast.horizons", h);
    if (x < 1 || x > 10000) invalid("forecast.horizons: horizons must be in 1..10000");
    cfg.horizons.push_back(static_cast<int>(x));
  }
  if (cfg.horizons.empty()) invalid("forecast.horizons: at least one horizon is required");
  cfg.alpha = parse_real("forecast.alpha", v.at("forecast.alpha"));
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) invalid("forecast.alpha must be in (0, 1)");
  const long long dump = parse_int("forecast.dump_unit", v.at("forecast.dump_unit"));
  if (dump < 0) invalid("forecast.dump_unit must be nonnegative");
  cfg.dump_unit = static_cast<Eigen::Index>(dump);

  cfg.out_dir = v.at("output.dir");
  if (cfg.out_dir.empty()) invalid("output.dir must not be empty");
  cfg.seed = parse_uint("run.seed", v.at("run.seed"));
  cfg.threads = positive_int(v, "run.threads");
  cfg.focus.overlap.seed = cfg.seed;

  ExperimentGrid& g = cfg.grid;
  g.dgps.clear();
  for (const auto& d : parse_list(v.at("simulate.dgps"))) {
    const DgpKind kind = parse_dgp(d);
    if (kind == DgpKind::kCustomVar) invalid("simulate.dgps: custom_var is library-only");
    g.dgps.push_back(kind);
  }
  g.n_times.clear();
  for (const auto& t : parse_list(v.at("simulate.n_times"))) {
    g.n_times.push_back(static_cast<Eigen::Index>(parse_int("simulate.n_times", t)));
  }
  g.methods.clear();
  for (const auto& m : parse_list(v.at("simulate.methods"))) g.methods.push_back(parse_method(m));
  g.n_units = parse_int("simulate.n_units", v.at("simulate.n_units"));
  g.trials = static_cast<int>(parse_int("simulate.trials", v.at("simulate.trials")));
  g.horizon = static_cast<int>(parse_int("simulate.horizon", v.at("simulate.horizon")));
  g.eval_units = parse_int("simulate.eval_units", v.at("simulate.eval_units"));
  g.with_ci = parse_bool("simulate.with_ci", v.at("simulate.with_ci"));
  g.alpha = cfg.alpha;
  g.seed = cfg.seed;
  g.threads = cfg.threads;
  g.focus = cfg.focus;

  cfg.holdout = positive_int(v, "eval.holdout");

  if (command == "simulate") {
    validate_grid(g);
  } else {
    require_file("input.panel", cfg.panel);
    if (!cfg.mask.empty()) require_file("input.mask", cfg.mask);
  }
  return cfg;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"FOCUS: factor-based counterfactual forecasts for panels with missing entries",
               "focus_cli"};
  app.require_subcommand(1);
  app.set_version_flag("--version", FOCUS_VERSION);

  bool list_keys = false;
  app.add_flag("--list-keys", list_keys, "print every configuration key with its default");

  struct Inputs {
    std::string config;
    std::string manifest;
    std::vector<std::string> sets;
    std::map<std::string, std::string> flags;
  };
  std::map<std::string, Inputs> inputs;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"fit", "estimate factors, loadings and VAR dynamics"},
      {"forecast", "fit and write point forecasts with confidence intervals"},
      {"simulate", "run the Monte Carlo experiment grid"},
      {"eval", "hold out trailing periods and score forecasts against them"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    Inputs& in = inputs[name];
    sub->add_option("--config", in.config, "INI config file");
    sub->add_option("--from-manifest", in.manifest, "re-run with the config echoed in a manifest");
    sub->add_option("--set", in.sets, "override a key: section.name=value")->take_all();
    const Sections sections = sections_for(name);
    for (const auto& spec : key_specs()) {
      if (!sections.has(section_of(spec.key))) continue;
      std::string& slot = in.flags[spec.key];
      const std::string desc = std::string(spec.help) + " [" + spec.key + "]";
      if (spec.boolean) {
        sub->add_flag(flag_of(spec.key) + "{true}", slot, desc);
      } else {
        sub->add_option(flag_of(spec.key), slot, desc);
      }
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << FOCUS_VERSION << "\n";
    return 0;
  } catch (const CLI::RequiredError& e) {
    if (list_keys) {
      for (const auto& s : key_specs()) {
        out << s.key << " = " << s.default_value << "  ; " << s.help << "\n";
      }
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const Inputs& in = inputs.at(command);
  try {
    // Precedence: defaults < manifest < config file < --set < named flags.
    KeyValues values;
    if (!in.manifest.empty()) merge_values(values, read_manifest(in.manifest, command));
    if (!in.config.empty()) merge_values(values, read_config_file(in.config));
    for (const auto& s : in.sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) invalid("--set expects section.name=value, got '" + s + "'");
      merge_values(values, {{s.substr(0, eq), s.substr(eq + 1)}});
    }
    for (const auto& [key, value] : in.flags) {
      if (!value.empty()) values[key] = value;
    }

    KeyValues resolved = default_values();
    merge_values(resolved, values);
    // Absolute input paths keep the manifest valid from any working directory.
    for (const char* key : {"input.panel", "input.mask"}) {
      if (!resolved[key].empty()) resolved[key] = fs::absolute(resolved[key]).lexically_normal().string();
    }
    const RunConfig cfg = parse_config(command, resolved);

    if (command == "fit") return cmd_fit(cfg, resolved, out);
    if (command == "forecast") return cmd_forecast(cfg, resolved, out);
    if (command == "simulate") return cmd_simulate(cfg, resolved, out);
    return cmd_eval(cfg, resolved, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.category());
  } catch (const json::exception& e) {
    err << "error: InvalidArgument: manifest: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace focus::cli
