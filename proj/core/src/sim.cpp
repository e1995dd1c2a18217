#include "focus/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <thread>

#include "focus/errors.hpp"
#include "focus/linalg.hpp"

namespace focus {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool is_scalar_arma(DgpKind kind) { return kind != DgpKind::kCustomVar; }

Eigen::MatrixXd scalar_companion(const std::vector<double>& ar) {
  const auto p = static_cast<Eigen::Index>(ar.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) c(0, j) = ar[static_cast<std::size_t>(j)];
  if (p > 1) c.block(1, 0, p - 1, p - 1).setIdentity();
  return c;
}

void validate_dgp(const DgpConfig& c) {
  if (c.n_units < 1 || c.n_times < 2) {
    throw Error(ErrorCode::kInvalidArgument, "DGP needs N >= 1 and T >= 2");
  }
  if (c.horizon < 1) throw Error(ErrorCode::kInvalidArgument, "horizon must be at least 1");
  if (!(c.loading_sd >= 0.0) || !(c.noise_sd >= 0.0) || !(c.eta_sd >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "standard deviations must be >= 0");
  }
  if (c.burn_in < 0) throw Error(ErrorCode::kInvalidArgument, "burn-in must be >= 0");
  if (is_scalar_arma(c.kind)) {
    if (c.ar_coefficients.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "ARMA factor needs at least one AR coefficient");
    }
  } else if (c.var_coefficient.rows() < 1 ||
             c.var_coefficient.rows() != c.var_coefficient.cols()) {
    throw Error(ErrorCode::kInvalidArgument, "custom VAR coefficient must be square");
  }
  if (!(dgp_spectral_radius(c) < 1.0)) {
    throw Error(ErrorCode::kUnstableDgp, "autoregressive part of the DGP is not stable");
  }
}

double trend_value(double t, double n_times) { return 2.0 * t * t / (n_times * n_times); }

}  // namespace

std::string dgp_name(DgpKind kind) {
  switch (kind) {
    case DgpKind::kDgp1: return "dgp1";
    case DgpKind::kDgp2: return "dgp2";
    case DgpKind::kDgp3: return "dgp3";
    case DgpKind::kCustomVar: return "custom_var";
  }
  return "unknown";
}

DgpKind parse_dgp(const std::string& name) {
  if (name == "dgp1") return DgpKind::kDgp1;
  if (name == "dgp2") return DgpKind::kDgp2;
  if (name == "dgp3") return DgpKind::kDgp3;
  if (name == "custom_var") return DgpKind::kCustomVar;
  throw Error(ErrorCode::kInvalidArgument, "unknown DGP '" + name + "'");
}

Eigen::Index DgpConfig::rank() const {
  return kind == DgpKind::kCustomVar ? var_coefficient.rows() : 1;
}

DgpConfig DgpConfig::dgp1(Eigen::Index n_units, Eigen::Index n_times, std::uint64_t seed) {
  DgpConfig c;
  c.kind = DgpKind::kDgp1;
  c.n_units = n_units;
  c.n_times = n_times;
  c.seed = seed;
  c.pattern = PatternConfig::mcar(0.7, 0);
  return c;
}

DgpConfig DgpConfig::dgp2(Eigen::Index n_units, Eigen::Index n_times, std::uint64_t seed) {
  DgpConfig c = dgp1(n_units, n_times, seed);
  c.kind = DgpKind::kDgp2;
  c.quadratic_trend = true;
  c.pattern = PatternConfig::simultaneous(0);
  return c;
}

DgpConfig DgpConfig::dgp3(Eigen::Index n_units, Eigen::Index n_times, std::uint64_t seed) {
  DgpConfig c = dgp1(n_units, n_times, seed);
  c.kind = DgpKind::kDgp3;
  c.quadratic_trend = true;
  c.ar_coefficients = {0.5, -0.4, 0.2};
  c.ma_coefficients = {0.5};
  c.eta_sd = 0.7;
  return c;
}

DgpConfig DgpConfig::make(DgpKind kind, Eigen::Index n_units, Eigen::Index n_times,
                          std::uint64_t seed) {
  switch (kind) {
    case DgpKind::kDgp1: return dgp1(n_units, n_times, seed);
    case DgpKind::kDgp2: return dgp2(n_units, n_times, seed);
    case DgpKind::kDgp3: return dgp3(n_units, n_times, seed);
    case DgpKind::kCustomVar: break;
  }
  throw Error(ErrorCode::kInvalidArgument, "custom VAR DGPs need an explicit coefficient matrix");
}

double dgp_spectral_radius(const DgpConfig& config) {
  if (is_scalar_arma(config.kind)) return spectral_radius(scalar_companion(config.ar_coefficients));
  return spectral_radius(config.var_coefficient);
}

SimulatedPanel generate_panel(const DgpConfig& config) {
  validate_dgp(config);
  const Eigen::Index n = config.n_units;
  const Eigen::Index t_len = config.n_times;
  const Eigen::Index r = config.rank();
  const Eigen::Index burn = config.burn_in;
  const Eigen::Index total = burn + t_len;

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  GroundTruth truth;
  truth.loadings.resize(n, r);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < r; ++k) truth.loadings(i, k) = config.loading_sd * normal(rng);
  }

  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(total, r);
  // Innovations and noise are drawn from the last period backwards: panels
  // from one seed share their final stretch (and forecast targets) across T.
  Eigen::MatrixXd eta(total, r);
  for (Eigen::Index t = total - 1; t >= 0; --t) {
    for (Eigen::Index k = 0; k < r; ++k) eta(t, k) = config.eta_sd * normal(rng);
  }

  const auto& ar = config.ar_coefficients;
  const auto& ma = config.ma_coefficients;
  // One ARMA step at time t from the given level and innovation histories.
  const auto arma_step = [&](const std::vector<double>& x, const std::vector<double>& e,
                             std::size_t t) {
    double v = e[t];
    for (std::size_t j = 1; j <= ar.size(); ++j) {
      if (t >= j) v += ar[j - 1] * x[t - j];
    }
    for (std::size_t m = 1; m <= ma.size(); ++m) {
      if (t >= m) v += ma[m - 1] * e[t - m];
    }
    return v;
  };

  const auto ts = static_cast<std::size_t>(total);
  const auto hs = static_cast<std::size_t>(config.horizon);
  Eigen::VectorXd ahead(r * config.horizon);  // stacked E[S_{T+h}]
  if (is_scalar_arma(config.kind)) {
    std::vector<double> x(ts + hs, 0.0);
    std::vector<double> e(ts + hs, 0.0);
    for (std::size_t t = 0; t < ts; ++t) e[t] = eta(static_cast<Eigen::Index>(t), 0);
    for (std::size_t t = 0; t < ts; ++t) {
      x[t] = arma_step(x, e, t);
      s(static_cast<Eigen::Index>(t), 0) = x[t];
    }
    // Best linear predictor given the realised innovations: future eta are zero.
    for (std::size_t h = 0; h < hs; ++h) {
      x[ts + h] = arma_step(x, e, ts + h);
      ahead(static_cast<Eigen::Index>(h)) = x[ts + h];
    }
  } else {
    const Eigen::MatrixXd& a = config.var_coefficient;
    for (Eigen::Index t = 0; t < total; ++t) {
      Eigen::VectorXd v = eta.row(t).transpose();
      if (t > 0) v += a * s.row(t - 1).transpose();
      s.row(t) = v.transpose();
    }
    Eigen::VectorXd f = s.row(total - 1).transpose();
    for (int h = 0; h < config.horizon; ++h) {
      f = a * f;
      ahead.segment(h * r, r) = f;
    }
  }

  truth.stochastic = s.bottomRows(t_len);
  truth.innovations = eta.bottomRows(t_len);
  truth.factors = truth.stochastic;
  const double tt = static_cast<double>(t_len);
  if (config.quadratic_trend) {
    for (Eigen::Index t = 0; t < t_len; ++t) {
      truth.factors(t, 0) += trend_value(static_cast<double>(t + 1), tt);
    }
  }

  truth.targets.resize(n, config.horizon);
  for (int h = 1; h <= config.horizon; ++h) {
    Eigen::VectorXd f = ahead.segment((h - 1) * r, r);
    if (config.quadratic_trend) f(0) += trend_value(tt + h, tt);
    truth.targets.col(h - 1) = truth.loadings * f;
  }

  Eigen::MatrixXd values = truth.loadings * truth.factors.transpose();
  for (Eigen::Index t = t_len - 1; t >= 0; --t) {
    for (Eigen::Index i = 0; i < n; ++i) values(i, t) += config.noise_sd * normal(rng);
  }

  PatternConfig pattern = config.pattern;
  pattern.seed = splitmix64(config.seed ^ 0x6d61736b6d61736bULL);
  const Eigen::VectorXd aux = truth.loadings.col(0);
  Mask mask = generate_mask(pattern, n, t_len,
                            std::span<const double>(aux.data(), static_cast<std::size_t>(n)));
  return SimulatedPanel{Panel(std::move(values), std::move(mask)), std::move(truth)};
}

Eigen::VectorXd baseline_forecast(const Panel& panel, const FactorModelFit& fit,
                                  BaselineKind kind) {
  const Eigen::Index n = panel.n_units();
  if (fit.n_units() != n || fit.n_times() != panel.n_times()) {
    throw Error(ErrorCode::kInvalidArgument, "fit does not match the panel");
  }
  Eigen::VectorXd out;
  switch (kind) {
    case BaselineKind::kPersistence:
      out = fit.loadings * fit.factors.row(fit.n_times() - 1).transpose();
      break;
    case BaselineKind::kMean:
      out = Eigen::VectorXd::Zero(n);
      break;
    case BaselineKind::kStaticFactor:
      out = fit.loadings * fit.factors.colwise().mean().transpose();
      break;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!fit.loading_ok[static_cast<std::size_t>(i)]) out(i) = kNan;
  }
  return out;
}

double msrpe(const Eigen::VectorXd& forecasts, const Eigen::VectorXd& actuals) {
  if (forecasts.size() != actuals.size()) {
    throw Error(ErrorCode::kInvalidArgument, "forecast and actual lengths differ");
  }
  double total = 0.0;
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < actuals.size(); ++i) {
    if (!(actuals(i) > 0.0)) continue;
    const double d = forecasts(i) - actuals(i);
    total += d * d / (actuals(i) * actuals(i));
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::kNoPositiveActuals, "no unit has a positive actual");
  return total / static_cast<double>(count);
}

double wilcoxon_one_sided(const std::vector<double>& diffs) {
  std::vector<double> nz;
  for (double d : diffs) {
    if (std::isnan(d)) throw Error(ErrorCode::kInvalidArgument, "NaN difference");
    if (d != 0.0) nz.push_back(d);
  }
  const auto n = nz.size();
  if (n < 5) {
    throw Error(ErrorCode::kTooFewSamples,
                "signed-rank test needs at least 5 nonzero differences, got " + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < n; ++k) order[k] = k;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::abs(nz[a]) < std::abs(nz[b]); });

  // Doubled midranks keep every rank an integer.
  std::vector<int> rank2(n);
  double tie_term = 0.0;
  for (std::size_t lo = 0; lo < n;) {
    std::size_t hi = lo;
    while (hi + 1 < n && std::abs(nz[order[hi + 1]]) == std::abs(nz[order[lo]])) ++hi;
    const auto r2 = static_cast<int>(lo + hi + 2);
    for (std::size_t k = lo; k <= hi; ++k) rank2[order[k]] = r2;
    const double g = static_cast<double>(hi - lo + 1);
    tie_term += g * g * g - g;
    lo = hi + 1;
  }
  int w2 = 0;
  int total2 = 0;
  for (std::size_t k = 0; k < n; ++k) {
    total2 += rank2[k];
    if (nz[k] > 0.0) w2 += rank2[k];
  }

  if (n <= 25) {
    std::vector<double> ways(static_cast<std::size_t>(total2) + 1, 0.0);
    ways[0] = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      for (int s = total2; s >= rank2[k]; --s) {
        ways[static_cast<std::size_t>(s)] += ways[static_cast<std::size_t>(s - rank2[k])];
      }
    }
    double below = 0.0;
    for (int s = 0; s <= w2; ++s) below += ways[static_cast<std::size_t>(s)];
    return below / std::ldexp(1.0, static_cast<int>(n));
  }

  const double nn = static_cast<double>(n);
  const double mean = nn * (nn + 1.0) / 4.0;
  const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
  const double w = 0.5 * static_cast<double>(w2);
  const double z = (w - mean + 0.5) / std::sqrt(var);
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

std::string method_name(Method method) {
  switch (method) {
    case Method::kFocus: return "focus";
    case Method::kFocusDetrend: return "focus_detrend";
    case Method::kPersistence: return "persistence";
    case Method::kMean: return "mean";
    case Method::kStaticFactor: return "static_factor";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "focus") return Method::kFocus;
  if (name == "focus_detrend") return Method::kFocusDetrend;
  if (name == "persistence") return Method::kPersistence;
  if (name == "mean") return Method::kMean;
  if (name == "static_factor") return Method::kStaticFactor;
  throw Error(ErrorCode::kInvalidArgument, "unknown method '" + name + "'");
}

TrialResult run_trial(const TrialSpec& spec) { return run_trial(spec, generate_panel(spec.dgp)); }

TrialResult run_trial(const TrialSpec& spec, const SimulatedPanel& data) {
  TrialResult result;
  const Panel& panel = data.panel;
  const Eigen::Index n_eval = std::min(spec.eval_units, panel.n_units());
  try {
    if (spec.horizon < 1 || spec.horizon > data.truth.targets.cols()) {
      throw Error(ErrorCode::kInvalidArgument, "horizon outside the simulated targets");
    }
    const Eigen::VectorXd truth = data.truth.targets.col(spec.horizon - 1);
    Eigen::VectorXd point;
    std::vector<ForecastResult> rows;
    if (spec.method == Method::kFocus || spec.method == Method::kFocusDetrend) {
      FocusOptions options = spec.focus;
      options.detrend = spec.method == Method::kFocusDetrend;
      const FocusModel model = fit_focus(panel, options);
      if (spec.with_ci) {
        rows = forecast_with_ci(panel, model, {spec.horizon}, spec.alpha, options);
        point.resize(panel.n_units());
        for (const auto& row : rows) point(row.unit) = row.point;
      } else {
        point = point_forecasts(model, spec.horizon);
      }
    } else {
      const FactorModelFit fit =
          fit_factor_model(panel, spec.focus.rank, spec.focus.transpose, spec.focus.factor);
      const BaselineKind kind = spec.method == Method::kPersistence ? BaselineKind::kPersistence
                                : spec.method == Method::kMean      ? BaselineKind::kMean
                                                                    : BaselineKind::kStaticFactor;
      point = baseline_forecast(panel, fit, kind);
    }

    double total = 0.0;
    for (Eigen::Index i = 0; i < n_eval; ++i) {
      if (!std::isfinite(point(i))) {
        throw Error(ErrorCode::kDegenerateUnit, "unit " + std::to_string(i) + " has no forecast");
      }
      const double err = (point(i) - truth(i)) * (point(i) - truth(i));
      result.per_unit_errors.push_back(err);
      result.truth.push_back(truth(i));
      total += err;
      if (!rows.empty()) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        result.coverage_hits.push_back(row.has_ci() && row.ci_lower <= truth(i) &&
                                       truth(i) <= row.ci_upper);
      }
    }
    result.msfe = total / static_cast<double>(n_eval);
  } catch (const std::exception& e) {
    result = TrialResult{};
    result.failed = true;
    result.msfe = kNan;
    result.error = e.what();
  }
  return result;
}

std::uint64_t trial_seed(std::uint64_t base, std::uint64_t dgp_index, std::uint64_t trial) {
  std::uint64_t s = splitmix64(base);
  s = splitmix64(s ^ dgp_index);
  return splitmix64(s ^ trial);
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "slope needs at least two points");
  }
  const auto m = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += std::log(x[k]);
    my += std::log(y[k]);
  }
  mx /= m;
  my /= m;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = std::log(x[k]) - mx;
    sxy += dx * (std::log(y[k]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

void validate_grid(const ExperimentGrid& grid) {
  const auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kInvalidArgument, "invalid experiment grid: " + msg);
  };
  if (grid.n_times.empty()) fail("no T values");
  for (Eigen::Index t : grid.n_times) {
    if (t < 4) fail("T must be at least 4");
  }
  if (grid.dgps.empty()) fail("no DGPs");
  for (DgpKind k : grid.dgps) {
    if (k == DgpKind::kCustomVar) fail("custom VAR DGPs are not available in grids");
  }
  if (grid.methods.empty()) fail("no methods");
  if (grid.trials < 1) fail("trials must be at least 1");
  if (grid.n_units < 1) fail("N must be at least 1");
  if (grid.horizon < 1) fail("horizon must be at least 1");
  if (grid.eval_units < 1) fail("eval_units must be at least 1");
  if (grid.threads < 1) fail("threads must be at least 1");
  if (!(grid.alpha > 0.0 && grid.alpha < 1.0)) fail("alpha must be in (0, 1)");
}

ExperimentResult run_experiment(const ExperimentGrid& grid) {
  validate_grid(grid);
  struct Task {
    std::size_t dgp_index;
    Eigen::Index n_times;
    int trial;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (std::size_t d = 0; d < grid.dgps.size(); ++d) {
    for (Eigen::Index t : grid.n_times) {
      for (int k = 0; k < grid.trials; ++k) {
        tasks.push_back({d, t, k,
                         trial_seed(grid.seed, static_cast<std::uint64_t>(grid.dgps[d]),
                                    static_cast<std::uint64_t>(k))});
      }
    }
  }

  const std::size_t n_methods = grid.methods.size();
  std::vector<TrialResult> results(tasks.size() * n_methods);
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (std::size_t j = next++; j < tasks.size(); j = next++) {
      const Task& task = tasks[j];
      TrialSpec spec;
      spec.dgp = DgpConfig::make(grid.dgps[task.dgp_index], grid.n_units, task.n_times, task.seed);
      spec.dgp.horizon = grid.horizon;
      spec.horizon = grid.horizon;
      spec.eval_units = grid.eval_units;
      spec.with_ci = grid.with_ci;
      spec.alpha = grid.alpha;
      spec.focus = grid.focus;
      std::optional<SimulatedPanel> data;
      std::string data_error;
      try {
        data = generate_panel(spec.dgp);
      } catch (const std::exception& e) {
        data_error = e.what();
      }
      for (std::size_t m = 0; m < n_methods; ++m) {
        TrialResult& out = results[j * n_methods + m];
        if (!data) {
          out.failed = true;
          out.msfe = kNan;
          out.error = data_error;
          continue;
        }
        spec.method = grid.methods[m];
        out = run_trial(spec, *data);
      }
    }
  };
  const int n_threads = std::min<int>(grid.threads, static_cast<int>(tasks.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ExperimentResult out;
  for (std::size_t j = 0; j < tasks.size(); ++j) {
    for (std::size_t m = 0; m < n_methods; ++m) {
      const TrialResult& tr = results[j * n_methods + m];
      ExperimentRow row;
      row.dgp = dgp_name(grid.dgps[tasks[j].dgp_index]);
      row.n_times = tasks[j].n_times;
      row.trial = tasks[j].trial;
      row.method = method_name(grid.methods[m]);
      row.seed = tasks[j].seed;
      row.msfe = tr.msfe;
      row.failed = tr.failed;
      row.error = tr.error;
      if (tr.coverage_hits.empty()) {
        row.coverage = kNan;
      } else {
        const auto hits = std::count(tr.coverage_hits.begin(), tr.coverage_hits.end(), true);
        row.coverage = static_cast<double>(hits) / static_cast<double>(tr.coverage_hits.size());
      }
      out.rows.push_back(std::move(row));
    }
  }

  // Summaries per (dgp, T, method); tasks of one cell are contiguous.
  const auto method_index = [&](Method m) -> std::optional<std::size_t> {
    const auto it = std::find(grid.methods.begin(), grid.methods.end(), m);
    if (it == grid.methods.end()) return std::nullopt;
    return static_cast<std::size_t>(it - grid.methods.begin());
  };
  const auto trials = static_cast<std::size_t>(grid.trials);
  for (std::size_t d = 0; d < grid.dgps.size(); ++d) {
    const DgpKind kind = grid.dgps[d];
    std::optional<std::size_t> ref = method_index(Method::kFocus);
    if (kind != DgpKind::kDgp1 || !ref) {
      if (auto det = method_index(Method::kFocusDetrend)) ref = det;
    }
    std::vector<std::vector<double>> means(n_methods);
    for (std::size_t ti = 0; ti < grid.n_times.size(); ++ti) {
      const std::size_t first = (d * grid.n_times.size() + ti) * trials;
      for (std::size_t m = 0; m < n_methods; ++m) {
        CellSummary cell;
        cell.dgp = dgp_name(kind);
        cell.n_times = grid.n_times[ti];
        cell.method = method_name(grid.methods[m]);
        double msfe_sum = 0.0;
        double cov_sum = 0.0;
        int ok = 0;
        int cov_n = 0;
        std::vector<double> diffs;
        for (std::size_t k = 0; k < trials; ++k) {
          const TrialResult& tr = results[(first + k) * n_methods + m];
          if (tr.failed) {
            ++cell.failed;
            continue;
          }
          msfe_sum += tr.msfe;
          ++ok;
          for (bool hit : tr.coverage_hits) {
            cov_sum += hit ? 1.0 : 0.0;
            ++cov_n;
          }
          if (ref && *ref != m) {
            const TrialResult& rr = results[(first + k) * n_methods + *ref];
            if (!rr.failed) diffs.push_back(rr.msfe - tr.msfe);
          }
        }
        cell.mean_msfe = ok > 0 ? msfe_sum / ok : kNan;
        cell.coverage = cov_n > 0 ? cov_sum / cov_n : kNan;
        cell.wilcoxon_p = kNan;
        if (ref && *ref != m) {
          try {
            cell.wilcoxon_p = wilcoxon_one_sided(diffs);
          } catch (const Error&) {
          }
        }
        means[m].push_back(cell.mean_msfe);
        out.cells.push_back(std::move(cell));
      }
    }
    if (grid.n_times.size() >= 2) {
      std::vector<double> x;
      for (Eigen::Index t : grid.n_times) x.push_back(static_cast<double>(t));
      for (std::size_t m = 0; m < n_methods; ++m) {
        SlopeSummary s;
        s.dgp = dgp_name(kind);
        s.method = method_name(grid.methods[m]);
        const bool finite = std::all_of(means[m].begin(), means[m].end(),
                                        [](double v) { return std::isfinite(v) && v > 0.0; });
        s.slope = finite ? log_log_slope(x, means[m]) : kNan;
        out.slopes.push_back(std::move(s));
      }
    }
  }
  return out;
}

}  // namespace focus
