#include "focus/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "focus/errors.hpp"
#include "focus/linalg.hpp"

namespace focus {

namespace {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m, const char* name) {
  if (condition_number_symmetric(m) > kMaxGramCondition) {
    throw Error(ErrorCode::kSingularGram, std::string(name) + " is singular");
  }
  const Eigen::Index r = m.rows();
  return symmetrize(m.ldlt().solve(Eigen::MatrixXd::Identity(r, r)));
}

double delta_sq(Eigen::Index n_units, Eigen::Index n_times) {
  return static_cast<double>(std::min(n_units, n_times));
}

}  // namespace

void assemble_derived(VariancePieces& pieces, const Eigen::VectorXd& f_last,
                      const Eigen::VectorXd& lambda_i) {
  const Eigen::Index r = pieces.sigma_lambda.rows();
  if (f_last.size() != r || lambda_i.size() != r || pieces.sigma_f.rows() != r ||
      pieces.sigma_f_i.rows() != r || pieces.v_lambda.rows() != r * r) {
    throw Error(ErrorCode::kInvalidArgument, "variance pieces have inconsistent dimensions");
  }
  const Eigen::MatrixXd sl_inv = spd_inverse(pieces.sigma_lambda, "Sigma_Lambda");
  const Eigen::MatrixXd sf_inv = spd_inverse(pieces.sigma_f, "Sigma_F");
  const Eigen::MatrixXd sfi_inv = spd_inverse(pieces.sigma_f_i, "Sigma_F,i");

  pieces.sigma_f_obs = pieces.sigma_f_obs_override.size() > 0
                           ? pieces.sigma_f_obs_override
                           : Eigen::MatrixXd(pieces.sigma_eps_sq * sl_inv);
  pieces.sigma_lambda_i_obs = pieces.sigma_lambda_i_obs_override.size() > 0
                                  ? pieces.sigma_lambda_i_obs_override
                                  : Eigen::MatrixXd(pieces.sigma_eps_sq * sfi_inv);

  // Psi_T = (F_T kron Sigma_F)(Sigma_F^{-1} Sigma_Lambda^{-1}), r^2 x r.
  const Eigen::MatrixXd psi = kronecker(f_last, pieces.sigma_f) * (sf_inv * sl_inv);
  // Upsilon_i = (Sigma_{F,i} kron Sigma_Lambda^{-1} Lambda_i) Sigma_{F,i}^{-1}, r^2 x r.
  const Eigen::MatrixXd upsilon =
      kronecker(pieces.sigma_f_i, Eigen::MatrixXd(sl_inv * lambda_i)) * sfi_inv;

  pieces.sigma_f_t_miss = symmetrize(psi.transpose() * pieces.v_lambda * psi);
  pieces.sigma_lambda_i_miss = symmetrize(upsilon.transpose() * pieces.v_lambda * upsilon);
  pieces.sigma_cov_miss = psi.transpose() * pieces.v_lambda * upsilon;
}

VariancePieces estimate_variance_pieces(const Panel& panel, const FactorModelFit& fit,
                                        const VarDynamics& dyn, const OverlapStats& stats,
                                        Eigen::Index unit, const VarianceOptions& options) {
  if (dyn.order != 1) {
    throw Error(ErrorCode::kUnsupportedOrder,
                "variance formulas cover VAR(1) only, got order " + std::to_string(dyn.order));
  }
  const Eigen::Index n = panel.n_units();
  const Eigen::Index t_len = panel.n_times();
  const Eigen::Index r = fit.rank;
  if (fit.n_units() != n || fit.n_times() != t_len) {
    throw Error(ErrorCode::kInvalidArgument, "fit does not match the panel");
  }
  if (unit < 0 || unit >= n) throw Error(ErrorCode::kInvalidArgument, "unit index out of range");
  if (!fit.loading_ok[static_cast<std::size_t>(unit)]) {
    throw Error(ErrorCode::kDegenerateUnit, "unit " + std::to_string(unit) +
                                                " has no usable loading");
  }

  const Eigen::MatrixXd& f = fit.factors;
  const Eigen::MatrixXd& lam = fit.loadings;
  const Eigen::MatrixXd resid = panel.values() - fit.fitted_values();

  VariancePieces pieces;
  double sse = 0.0;
  Eigen::Index n_obs = 0;
  for (Eigen::Index t = 0; t < t_len; ++t) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!panel.observed(i, t)) continue;
      sse += resid(i, t) * resid(i, t);
      ++n_obs;
    }
  }
  pieces.sigma_eps_sq = n_obs > 0 ? sse / static_cast<double>(n_obs) : 0.0;

  // Cross-sectional moments over units with a usable loading.
  Eigen::Index n_ok = 0;
  pieces.sigma_lambda = Eigen::MatrixXd::Zero(r, r);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!fit.loading_ok[static_cast<std::size_t>(i)]) continue;
    pieces.sigma_lambda += lam.row(i).transpose() * lam.row(i);
    ++n_ok;
  }
  pieces.sigma_lambda /= static_cast<double>(n_ok);
  pieces.v_lambda = Eigen::MatrixXd::Zero(r * r, r * r);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!fit.loading_ok[static_cast<std::size_t>(i)]) continue;
    const Eigen::MatrixXd dev = lam.row(i).transpose() * lam.row(i) - pieces.sigma_lambda;
    const Eigen::Map<const Eigen::VectorXd> v(dev.data(), r * r);
    pieces.v_lambda += v * v.transpose();
  }
  pieces.v_lambda = symmetrize(pieces.v_lambda / static_cast<double>(n_ok));

  pieces.sigma_f = symmetrize(f.transpose() * f / static_cast<double>(t_len));
  pieces.sigma_f_i = Eigen::MatrixXd::Zero(r, r);
  for (Eigen::Index t = 0; t < t_len; ++t) {
    if (panel.observed(unit, t)) pieces.sigma_f_i += f.row(t).transpose() * f.row(t);
  }
  pieces.sigma_f_i = symmetrize(pieces.sigma_f_i / static_cast<double>(t_len));
  pieces.sigma_eta = dyn.innovation_cov;
  pieces.omega1 = stats.omega1;
  pieces.omega2 = stats.omega2;
  pieces.omega3 = stats.omega3;

  if (options.hac) {
    // Loading term: Sigma_{F,i}^{-1} Phi_i Sigma_{F,i}^{-1}, Phi_i the long-run
    // variance of W_it F_t e_it.
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(t_len, r);
    for (Eigen::Index t = 0; t < t_len; ++t) {
      if (panel.observed(unit, t)) z.row(t) = f.row(t) * resid(unit, t);
    }
    const int bandwidth =
        options.hac_bandwidth >= 0 ? options.hac_bandwidth : default_hac_bandwidth(t_len);
    const Eigen::MatrixXd phi = newey_west(z, bandwidth);
    const Eigen::MatrixXd sfi_inv = spd_inverse(pieces.sigma_f_i, "Sigma_F,i");
    pieces.sigma_lambda_i_obs_override = symmetrize(sfi_inv * phi * sfi_inv);

    // Factor term: Sigma_Lambda^{-1} Gamma Sigma_Lambda^{-1} with
    // Gamma = (1/N) sum_i s_i^2 Lambda_i Lambda_i', s_i^2 unit i's residual variance.
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(r, r);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!fit.loading_ok[static_cast<std::size_t>(i)]) continue;
      double s = 0.0;
      Eigen::Index m = 0;
      for (Eigen::Index t = 0; t < t_len; ++t) {
        if (!panel.observed(i, t)) continue;
        s += resid(i, t) * resid(i, t);
        ++m;
      }
      if (m > 0) gamma += (s / static_cast<double>(m)) * lam.row(i).transpose() * lam.row(i);
    }
    gamma /= static_cast<double>(n_ok);
    const Eigen::MatrixXd sl_inv = spd_inverse(pieces.sigma_lambda, "Sigma_Lambda");
    pieces.sigma_f_obs_override = symmetrize(sl_inv * gamma * sl_inv);
  }
  return pieces;
}

double xi_squared(const VariancePieces& pieces, int horizon, const Eigen::VectorXd& f_last,
                  const Eigen::VectorXd& lambda_i, const Eigen::MatrixXd& a, Eigen::Index n_units,
                  Eigen::Index n_times) {
  if (horizon < 1) throw Error(ErrorCode::kInvalidArgument, "horizon must be at least 1");
  VariancePieces p = pieces;
  assemble_derived(p, f_last, lambda_i);
  const Eigen::MatrixXd ah = matrix_power(a, horizon);
  const Eigen::VectorXd al = ah.transpose() * lambda_i;  // (A^h)' Lambda_i
  const Eigen::VectorXd af = ah * f_last;                // A^h F_T
  const double d2 = delta_sq(n_units, n_times);

  const double factor_term =
      al.dot((p.omega1 * p.sigma_f_obs + (p.omega1 - 1.0) * p.sigma_f_t_miss) * al);
  const double cross_term = -2.0 * (p.omega2 - 1.0) * af.dot(p.sigma_cov_miss * al);
  const double loading_miss = (p.omega3 - 1.0) * af.dot(p.sigma_lambda_i_miss * af);
  const double loading_obs = af.dot(p.sigma_lambda_i_obs * af);
  return d2 / static_cast<double>(n_units) * (factor_term + cross_term + loading_miss) +
         d2 / static_cast<double>(n_times) * loading_obs;
}

double tau_squared(const VariancePieces& pieces, int horizon, const Eigen::VectorXd& f_last,
                   const Eigen::VectorXd& lambda_i, const Eigen::MatrixXd& a, Eigen::Index n_units,
                   Eigen::Index n_times) {
  if (horizon < 1) throw Error(ErrorCode::kInvalidArgument, "horizon must be at least 1");
  const Eigen::Index r = a.rows();
  const Eigen::MatrixXd sf_inv = spd_inverse(pieces.sigma_f, "Sigma_F");
  // powers[k] = A^k, k = 0..h-1.
  std::vector<Eigen::MatrixXd> powers{Eigen::MatrixXd::Identity(r, r)};
  for (int k = 1; k < horizon; ++k) powers.push_back(powers.back() * a);
  const auto hs = static_cast<std::size_t>(horizon);

  double total = 0.0;
  for (std::size_t k = 0; k < hs; ++k) {
    const Eigen::VectorXd lk = powers[hs - 1 - k] * lambda_i;
    const Eigen::VectorXd fk = powers[k].transpose() * f_last;
    for (std::size_t l = 0; l < hs; ++l) {
      const Eigen::VectorXd ll = powers[hs - 1 - l] * lambda_i;
      const Eigen::VectorXd fl = powers[l].transpose() * f_last;
      total += lk.dot(sf_inv * ll) * fk.dot(pieces.sigma_eta * fl);
    }
  }
  return delta_sq(n_units, n_times) / static_cast<double>(n_times) * total;
}

VarianceComponents forecast_variance(const Panel& panel, const FactorModelFit& fit,
                                     const VarDynamics& dyn, const OverlapStats& stats,
                                     Eigen::Index unit, int horizon,
                                     const VarianceOptions& options,
                                     const Eigen::MatrixXd* var_series) {
  VarianceComponents out;
  out.pieces = estimate_variance_pieces(panel, fit, dyn, stats, unit, options);
  const Eigen::MatrixXd& series = var_series != nullptr ? *var_series : fit.factors;
  if (series.rows() != fit.n_times() || series.cols() != fit.rank) {
    throw Error(ErrorCode::kInvalidArgument, "VAR series does not match the factors");
  }
  if (var_series != nullptr) {
    out.pieces.sigma_f = symmetrize(series.transpose() * series /
                                    static_cast<double>(series.rows()));
  }
  const Eigen::VectorXd f_last = series.row(series.rows() - 1).transpose();
  const Eigen::VectorXd lambda_i = fit.loadings.row(unit).transpose();
  const Eigen::MatrixXd& a = dyn.coef.front();
  const Eigen::Index n = panel.n_units();
  const Eigen::Index t_len = panel.n_times();

  assemble_derived(out.pieces, f_last, lambda_i);
  out.xi_sq = std::max(0.0, xi_squared(out.pieces, horizon, f_last, lambda_i, a, n, t_len));
  out.tau_sq = std::max(0.0, tau_squared(out.pieces, horizon, f_last, lambda_i, a, n, t_len));
  out.sigma_sq = out.xi_sq + out.tau_sq;
  return out;
}

Eigen::MatrixXd newey_west(const Eigen::MatrixXd& z, int bandwidth) {
  if (bandwidth < 0) throw Error(ErrorCode::kInvalidArgument, "bandwidth must be >= 0");
  const Eigen::Index t_len = z.rows();
  if (t_len < 1) throw Error(ErrorCode::kInvalidArgument, "empty series");
  const double inv_t = 1.0 / static_cast<double>(t_len);
  Eigen::MatrixXd s = z.transpose() * z * inv_t;
  const Eigen::Index lags = std::min<Eigen::Index>(bandwidth, t_len - 1);
  for (Eigen::Index l = 1; l <= lags; ++l) {
    const double w = 1.0 - static_cast<double>(l) / static_cast<double>(bandwidth + 1);
    const Eigen::MatrixXd g =
        z.bottomRows(t_len - l).transpose() * z.topRows(t_len - l) * inv_t;
    s += w * (g + g.transpose());
  }
  return s;
}

int default_hac_bandwidth(Eigen::Index n_times) {
  return static_cast<int>(
      std::floor(4.0 * std::pow(static_cast<double>(n_times) / 100.0, 2.0 / 9.0)));
}

double OneFactorParams::sigma_f_sq() const {
  if (sigma_f > 0.0) return sigma_f * sigma_f;
  return sigma_eta * sigma_eta / (1.0 - phi * phi);
}

OneFactorVariance one_factor_variance(const OneFactorParams& params, OneFactorPattern pattern,
                                      double p_obs, double lambda_i, double f_last,
                                      Eigen::Index n_units, Eigen::Index n_times, int horizon) {
  if (!(std::abs(params.phi) < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "one-factor closed form needs |phi| < 1");
  }
  if (horizon < 1) throw Error(ErrorCode::kInvalidArgument, "horizon must be at least 1");
  const double p = pattern == OneFactorPattern::kMcar ? p_obs : 1.0;
  if (!(p > 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "observation probability must be in (0, 1]");
  }
  const double d2 = delta_sq(n_units, n_times);
  const double n = static_cast<double>(n_units);
  const double t = static_cast<double>(n_times);
  const double sl2 = params.sigma_lambda * params.sigma_lambda;
  const double sf2 = params.sigma_f_sq();
  const double se2 = params.sigma_eps * params.sigma_eps;
  const double l2 = lambda_i * lambda_i;
  const double f2 = f_last * f_last;
  const double phi2h = std::pow(params.phi, 2 * horizon);

  OneFactorVariance out;
  out.xi_sq = d2 * phi2h * se2 / p * (l2 / (n * sl2) + f2 / (t * sf2)) +
              d2 * phi2h * l2 * f2 / n * (1.0 / p - 1.0) * params.loading_kurtosis_term;
  // pow(0, 0) == 1 covers phi = 0 at h = 1.
  const double eta_ratio = params.sigma_eta * params.sigma_eta / sf2;
  out.tau_sq = d2 / t * static_cast<double>(horizon * horizon) *
               std::pow(params.phi, 2 * horizon - 2) * eta_ratio * l2 * f2;
  return out;
}

VariancePieces one_factor_pieces(const OneFactorParams& params, OneFactorPattern pattern,
                                 double p_obs) {
  const double p = pattern == OneFactorPattern::kMcar ? p_obs : 1.0;
  const double sl2 = params.sigma_lambda * params.sigma_lambda;
  const double sf2 = params.sigma_f_sq();
  VariancePieces pieces;
  pieces.sigma_eps_sq = params.sigma_eps * params.sigma_eps;
  pieces.sigma_lambda = Eigen::MatrixXd::Constant(1, 1, sl2);
  pieces.sigma_f = Eigen::MatrixXd::Constant(1, 1, sf2);
  pieces.sigma_f_i = Eigen::MatrixXd::Constant(1, 1, p * sf2);
  pieces.sigma_eta = Eigen::MatrixXd::Constant(1, 1, params.sigma_eta * params.sigma_eta);
  pieces.v_lambda = Eigen::MatrixXd::Constant(1, 1, params.loading_kurtosis_term * sl2 * sl2);
  pieces.omega1 = 1.0 / p;
  pieces.omega2 = 1.0;
  pieces.omega3 = 1.0;
  return pieces;
}

double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "quantile probability must be in (0, 1)");
  }
  // Acklam's rational approximation, then one Halley step.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x = 0.0;
  if (prob < p_low) {
    const double q = std::sqrt(-2.0 * std::log(prob));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (prob <= 1.0 - p_low) {
    const double q = prob - 0.5;
    const double s = q * q;
    x = (((((a[0] * s + a[1]) * s + a[2]) * s + a[3]) * s + a[4]) * s + a[5]) * q /
        (((((b[0] * s + b[1]) * s + b[2]) * s + b[3]) * s + b[4]) * s + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-prob));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - prob;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

Interval confidence_interval(double point, double sigma_sq, Eigen::Index n_units,
                             Eigen::Index n_times, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must be in (0, 1)");
  }
  if (!(sigma_sq >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "sigma_sq must be >= 0");
  const double z = normal_quantile(1.0 - 0.5 * alpha);
  const double half = z * std::sqrt(sigma_sq) / std::sqrt(delta_sq(n_units, n_times));
  return {point - half, point + half};
}

std::vector<std::pair<std::string, Eigen::MatrixXd>> named_pieces(const VariancePieces& pieces) {
  const auto scalar = [](double v) { return Eigen::MatrixXd::Constant(1, 1, v); };
  return {
      {"sigma_eps_sq", scalar(pieces.sigma_eps_sq)},
      {"sigma_lambda", pieces.sigma_lambda},
      {"sigma_f", pieces.sigma_f},
      {"sigma_f_i", pieces.sigma_f_i},
      {"sigma_eta", pieces.sigma_eta},
      {"omega1", scalar(pieces.omega1)},
      {"omega2", scalar(pieces.omega2)},
      {"omega3", scalar(pieces.omega3)},
      {"v_lambda", pieces.v_lambda},
      {"sigma_f_obs", pieces.sigma_f_obs},
      {"sigma_f_t_miss", pieces.sigma_f_t_miss},
      {"sigma_lambda_i_obs", pieces.sigma_lambda_i_obs},
      {"sigma_lambda_i_miss", pieces.sigma_lambda_i_miss},
      {"sigma_cov_miss", pieces.sigma_cov_miss},
  };
}

}  // namespace focus
