#ifndef FOCUS_PANEL_HPP_
#define FOCUS_PANEL_HPP_

#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

namespace focus {

using Mask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;
using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

// A partially observed N x T panel of outcomes. Rows are units, columns are
// time points. Entries with mask == 0 are unknown: the constructor overwrites
// their stored value with 0 so nothing downstream can depend on it (NaN
// included).
class Panel {
 public:
  Panel(Eigen::MatrixXd values, Mask mask);

  // Fully observed panel.
  explicit Panel(Eigen::MatrixXd values);

  Eigen::Index n_units() const { return values_.rows(); }
  Eigen::Index n_times() const { return values_.cols(); }

  // Observed values with masked entries read as 0.
  const Eigen::MatrixXd& values() const { return values_; }
  const Mask& mask() const { return mask_; }

  bool observed(Eigen::Index unit, Eigen::Index time) const {
    return mask_(unit, time) != 0;
  }

  // The 0/1 mask as doubles, convenient for BLAS-style products.
  Eigen::MatrixXd mask_as_double() const { return mask_.cast<double>(); }

  Eigen::Index observed_count() const;

  // Swap the roles of units and time.
  Panel transposed() const;

 private:
  Eigen::MatrixXd values_;
  Mask mask_;
};

// |Q_{s,t}|: the number of units observed at both s and t.
struct OverlapIndex {
  CountMatrix counts;  // T x T, symmetric
};

OverlapIndex build_overlap_index(const Panel& panel);

struct OverlapStats {
  Eigen::MatrixXd alpha;  // T x T, |Q_{s,t}| / N
  Eigen::VectorXd nu;     // alpha(s, T) for s = 1..T
  double omega1 = 1.0;
  double omega2 = 1.0;
  double omega3 = 1.0;
  double omega3_std_error = 0.0;  // nonzero only when omega3 was sampled
  bool omega3_exact = true;
};

struct OverlapStatsOptions {
  // When T exceeds this and quad_samples > 0, omega3 is estimated from
  // uniformly sampled quadruples instead of the exact per-unit reduction.
  Eigen::Index exact_cutoff = 64;
  std::uint64_t seed = 0x5eed;
};

// Plug-in estimates of the missingness weights omega1..omega3.
// Throws ZeroOverlap if any pair of columns shares no observed unit.
// quad_samples == 0 always computes omega3 exactly (O(N T^2)).
OverlapStats compute_overlap_stats(const Panel& panel,
                                   std::size_t quad_samples = 0,
                                   const OverlapStatsOptions& options = {});

}  // namespace focus

#endif  // FOCUS_PANEL_HPP_
