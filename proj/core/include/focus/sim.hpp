#ifndef FOCUS_SIM_HPP_
#define FOCUS_SIM_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "focus/panel.hpp"
#include "focus/patterns.hpp"
#include "focus/pipeline.hpp"

namespace focus {

enum class DgpKind { kDgp1, kDgp2, kDgp3, kCustomVar };

std::string dgp_name(DgpKind kind);
DgpKind parse_dgp(const std::string& name);

struct DgpConfig {
  DgpKind kind = DgpKind::kDgp1;
  Eigen::Index n_units = 64;
  Eigen::Index n_times = 128;
  int horizon = 1;  // targets are produced for 1..horizon

  double loading_sd = 0.5;
  double noise_sd = 0.1;

  // Scalar ARMA factor (DGP-1/2/3): S_t = sum_j ar_j S_{t-j} + eta_t + sum_m ma_m eta_{t-m}.
  std::vector<double> ar_coefficients{0.5};
  std::vector<double> ma_coefficients;
  double eta_sd = 0.5;

  // Adds 2 t^2 / T^2 to the first factor.
  bool quadratic_trend = false;

  // CustomVar: r-dimensional F_t = A F_{t-1} + eta_t, eta_t ~ N(0, eta_sd^2 I).
  Eigen::MatrixXd var_coefficient;

  PatternConfig pattern = PatternConfig::mcar(0.7, 0);
  std::uint64_t seed = 0;
  int burn_in = 500;

  Eigen::Index rank() const;

  // The three simulation designs of the experiments section.
  static DgpConfig dgp1(Eigen::Index n_units, Eigen::Index n_times, std::uint64_t seed);
  static DgpConfig dgp2(Eigen::Index n_units, Eigen::Index n_times, std::uint64_t seed);
  static DgpConfig dgp3(Eigen::Index n_units, Eigen::Index n_times, std::uint64_t seed);
  static DgpConfig make(DgpKind kind, Eigen::Index n_units, Eigen::Index n_times,
                        std::uint64_t seed);
};

struct GroundTruth {
  Eigen::MatrixXd factors;     // T x r, trend included
  Eigen::MatrixXd stochastic;  // T x r, trend removed
  Eigen::MatrixXd loadings;    // N x r
  Eigen::MatrixXd innovations; // T x r, eta_t for t = 1..T
  // targets(i, h - 1) = Lambda_i' E[F_{T+h} | F_1..F_T, eta_1..eta_T].
  Eigen::MatrixXd targets;
};

struct SimulatedPanel {
  Panel panel;
  GroundTruth truth;
};

// Throws UnstableDgp if the autoregressive part is not stable. The mask is
// drawn from config.pattern with its seed replaced by one derived from
// config.seed; simultaneous adoption keys on the first loading column.
SimulatedPanel generate_panel(const DgpConfig& config);

// Companion-matrix spectral radius of the autoregressive part.
double dgp_spectral_radius(const DgpConfig& config);

enum class BaselineKind { kPersistence, kMean, kStaticFactor };

// Persistence: Lambda_i' F_T. Mean: 0. Static factor: Lambda_i' Fbar.
Eigen::VectorXd baseline_forecast(const Panel& panel, const FactorModelFit& fit,
                                  BaselineKind kind);

// Mean squared relative error over units with a positive actual.
double msrpe(const Eigen::VectorXd& forecasts, const Eigen::VectorXd& actuals);

// P(W+ <= observed) under the null, for differences d = a - b: small values
// support a < b. Zeros are dropped; exact for up to 25 nonzero differences,
// continuity-corrected normal approximation above. Throws TooFewSamples below 5.
double wilcoxon_one_sided(const std::vector<double>& diffs);

enum class Method { kFocus, kFocusDetrend, kPersistence, kMean, kStaticFactor };

std::string method_name(Method method);
Method parse_method(const std::string& name);

struct TrialResult {
  double msfe = 0.0;
  std::vector<double> per_unit_errors;
  std::vector<double> truth;
  std::vector<bool> coverage_hits;  // empty unless intervals were requested
  bool failed = false;
  std::string error;
};

struct TrialSpec {
  DgpConfig dgp;
  Method method = Method::kFocus;
  int horizon = 1;
  Eigen::Index eval_units = 32;
  bool with_ci = false;
  double alpha = 0.05;
  FocusOptions focus;
};

// Runs one method on a freshly simulated panel. Errors are captured in the
// result, not thrown.
TrialResult run_trial(const TrialSpec& spec);
TrialResult run_trial(const TrialSpec& spec, const SimulatedPanel& data);

struct ExperimentGrid {
  std::vector<Eigen::Index> n_times{32, 64, 128, 256};
  std::vector<DgpKind> dgps{DgpKind::kDgp1};
  std::vector<Method> methods{Method::kFocus, Method::kPersistence, Method::kMean};
  int trials = 30;
  Eigen::Index n_units = 64;
  int horizon = 1;
  Eigen::Index eval_units = 32;
  std::uint64_t seed = 20240501;
  int threads = 1;
  bool with_ci = false;
  double alpha = 0.05;
  FocusOptions focus;
};

struct ExperimentRow {
  std::string dgp;
  Eigen::Index n_times = 0;
  int trial = 0;
  std::string method;
  std::uint64_t seed = 0;
  double msfe = 0.0;
  double coverage = 0.0;  // NaN without intervals
  bool failed = false;
  std::string error;
};

struct CellSummary {
  std::string dgp;
  Eigen::Index n_times = 0;
  std::string method;
  double mean_msfe = 0.0;
  double coverage = 0.0;
  int failed = 0;
  // One-sided Wilcoxon p of FOCUS (plain or detrended, as run) against this
  // method; NaN for FOCUS itself or when too few paired differences exist.
  double wilcoxon_p = 0.0;
};

struct SlopeSummary {
  std::string dgp;
  std::string method;
  double slope = 0.0;  // least-squares slope of log mean MSFE on log T
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;  // deterministic order: dgp, T, trial, method
  std::vector<CellSummary> cells;
  std::vector<SlopeSummary> slopes;
};

void validate_grid(const ExperimentGrid& grid);

// Every (dgp, T, trial) shares one simulated panel across methods. Trial k
// uses the same seed at every T, so its panels share the forecast origin and
// differ only in how much history they contain (common random numbers).
// Results do not depend on the thread count.
ExperimentResult run_experiment(const ExperimentGrid& grid);

std::uint64_t trial_seed(std::uint64_t base, std::uint64_t dgp_index, std::uint64_t trial);

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace focus

#endif  // FOCUS_SIM_HPP_
