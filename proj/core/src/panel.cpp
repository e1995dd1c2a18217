#include "focus/panel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "focus/errors.hpp"

namespace focus {

Panel::Panel(Eigen::MatrixXd values, Mask mask)
    : values_(std::move(values)), mask_(std::move(mask)) {
  if (values_.rows() != mask_.rows() || values_.cols() != mask_.cols()) {
    throw Error(ErrorCode::kInvalidArgument, "values and mask differ in shape");
  }
  if (values_.rows() < 1 || values_.cols() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "panel needs N >= 1 and T >= 2");
  }
  for (Eigen::Index t = 0; t < values_.cols(); ++t) {
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
      if (mask_(i, t) > 1) {
        throw Error(ErrorCode::kInvalidArgument, "mask entries must be 0 or 1");
      }
      if (mask_(i, t) == 0) {
        values_(i, t) = 0.0;
      } else if (!std::isfinite(values_(i, t))) {
        throw Error(ErrorCode::kInvalidArgument,
                    "observed entry (" + std::to_string(i) + ", " +
                        std::to_string(t) + ") is not finite");
      }
    }
  }
}

Panel::Panel(Eigen::MatrixXd values)
    : Panel(values, Mask::Ones(values.rows(), values.cols())) {}

Eigen::Index Panel::observed_count() const {
  return mask_.cast<Eigen::Index>().sum();
}

Panel Panel::transposed() const {
  return Panel(values_.transpose(), mask_.transpose());
}

OverlapIndex build_overlap_index(const Panel& panel) {
  const Eigen::MatrixXd w = panel.mask_as_double();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(w.cols(), w.cols());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(w.transpose());
  // Counts are small integers, so the double product is exact.
  OverlapIndex index;
  index.counts = CountMatrix(w.cols(), w.cols());
  for (Eigen::Index t = 0; t < w.cols(); ++t) {
    for (Eigen::Index s = t; s < w.cols(); ++s) {
      const auto c = static_cast<std::int64_t>(std::llround(gram(s, t)));
      index.counts(s, t) = c;
      index.counts(t, s) = c;
    }
  }
  return index;
}

namespace {

// Columns of the mask packed as bitsets for fast quadruple intersections.
class PackedColumns {
 public:
  explicit PackedColumns(const Mask& mask)
      : words_((mask.rows() + 63) / 64),
        bits_(static_cast<std::size_t>(mask.cols() * words_), 0) {
    for (Eigen::Index t = 0; t < mask.cols(); ++t) {
      for (Eigen::Index i = 0; i < mask.rows(); ++i) {
        if (mask(i, t) != 0) {
          bits_[static_cast<std::size_t>(t * words_ + i / 64)] |=
              std::uint64_t{1} << (i % 64);
        }
      }
    }
  }

  std::int64_t count4(Eigen::Index a, Eigen::Index b, Eigen::Index c,
                      Eigen::Index d) const {
    std::int64_t total = 0;
    for (Eigen::Index k = 0; k < words_; ++k) {
      total += std::popcount(word(a, k) & word(b, k) & word(c, k) & word(d, k));
    }
    return total;
  }

 private:
  std::uint64_t word(Eigen::Index col, Eigen::Index k) const {
    return bits_[static_cast<std::size_t>(col * words_ + k)];
  }

  Eigen::Index words_;
  std::vector<std::uint64_t> bits_;
};

}  // namespace

OverlapStats compute_overlap_stats(const Panel& panel, std::size_t quad_samples,
                                   const OverlapStatsOptions& options) {
  const Eigen::Index n = panel.n_units();
  const Eigen::Index t_len = panel.n_times();
  const OverlapIndex index = build_overlap_index(panel);

  for (Eigen::Index t = 0; t < t_len; ++t) {
    for (Eigen::Index s = 0; s <= t; ++s) {
      if (index.counts(s, t) == 0) {
        throw Error(ErrorCode::kZeroOverlap,
                    "columns " + std::to_string(s) + " and " +
                        std::to_string(t) + " share no observed unit");
      }
    }
  }

  OverlapStats stats;
  stats.alpha = index.counts.cast<double>() / static_cast<double>(n);
  stats.nu = stats.alpha.col(t_len - 1);

  const Eigen::MatrixXd w = panel.mask_as_double();
  const Eigen::MatrixXd inv_alpha = stats.alpha.cwiseInverse();
  const Eigen::VectorXd inv_nu = stats.nu.cwiseInverse();
  const double td = static_cast<double>(t_len);
  const double nd = static_cast<double>(n);

  // Each omega factors over units: a quadruple overlap count is a sum over
  // units of a product of mask entries, so the T^4 sum collapses to
  // per-unit quadratic forms in the unit's mask row.
  const Eigen::VectorXd a = w * inv_nu;                                    // sum_s W_is / alpha_{s,T}
  const Eigen::VectorXd b = (w * inv_alpha).cwiseProduct(w).rowwise().sum();  // w_i' (1/alpha) w_i
  const Eigen::VectorXd w_last = w.col(t_len - 1);

  stats.omega1 = w_last.cwiseProduct(a).cwiseProduct(a).sum() / (nd * td * td);
  stats.omega2 = b.cwiseProduct(w_last).cwiseProduct(a).sum() / (nd * td * td * td);

  if (quad_samples == 0 || t_len <= options.exact_cutoff) {
    stats.omega3 = b.squaredNorm() / (nd * td * td * td * td);
    stats.omega3_exact = true;
    stats.omega3_std_error = 0.0;
  } else {
    const PackedColumns packed(panel.mask());
    std::mt19937_64 rng(options.seed);
    std::uniform_int_distribution<Eigen::Index> pick(0, t_len - 1);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t k = 0; k < quad_samples; ++k) {
      const Eigen::Index s = pick(rng);
      const Eigen::Index t = pick(rng);
      const Eigen::Index s2 = pick(rng);
      const Eigen::Index t2 = pick(rng);
      const double beta = static_cast<double>(packed.count4(s, t, s2, t2)) / nd;
      const double term = beta * inv_alpha(s, t) * inv_alpha(s2, t2);
      sum += term;
      sum_sq += term * term;
    }
    const double m = static_cast<double>(quad_samples);
    const double mean = sum / m;
    const double var = quad_samples > 1 ? (sum_sq - m * mean * mean) / (m - 1.0) : 0.0;
    stats.omega3 = mean;
    stats.omega3_std_error = std::sqrt(std::max(var, 0.0) / m);
    stats.omega3_exact = false;
  }
  return stats;
}

}  // namespace focus
