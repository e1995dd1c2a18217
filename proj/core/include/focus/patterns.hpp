#ifndef FOCUS_PATTERNS_HPP_
#define FOCUS_PATTERNS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "focus/panel.hpp"

namespace focus {

enum class PatternKind { kMcar, kStaggered, kSimultaneous, kFullyObserved };

// One covariate group of the simultaneous-adoption design: a fixed share of
// the group's units loses observation from time ceil(cutover * T) onward.
struct AdoptionGroup {
  double masked_fraction = 0.0;
  double cutover_fraction = 1.0;
};

struct PatternConfig {
  PatternKind kind = PatternKind::kFullyObserved;

  // MCAR observation probability.
  double p = 1.0;

  // Staggered adoption CDF G(t) = P(tau <= t) for t = 1..T. Whatever mass is
  // left at T (1 - G(T)) never adopts. Must be nondecreasing in [0, 1] and
  // have length T.
  std::vector<double> adoption_cdf;

  // Simultaneous adoption, groups keyed on X_i = 1{aux_i >= 0}.
  AdoptionGroup positive_group{0.25, 0.75};
  AdoptionGroup negative_group{0.625, 0.375};

  std::uint64_t seed = 0;

  static PatternConfig mcar(double p, std::uint64_t seed);
  static PatternConfig staggered(std::vector<double> cdf, std::uint64_t seed);
  static PatternConfig simultaneous(std::uint64_t seed);
  static PatternConfig fully_observed();
};

// Draws an N x T observation mask. Simultaneous adoption needs one auxiliary
// real per unit (typically the loading) and throws MissingAux without it.
// Deterministic in (config, n_units, n_times, aux). MCAR entries are drawn
// column by column from the last time backwards, so one seed gives masks
// that agree on their trailing columns for every T.
Mask generate_mask(const PatternConfig& config, Eigen::Index n_units,
                   Eigen::Index n_times,
                   std::optional<std::span<const double>> aux = std::nullopt);

// Number of units out of group_size that receive the masked treatment:
// round-half-to-even of fraction * group_size.
Eigen::Index masked_unit_count(double fraction, Eigen::Index group_size);

// 0-based first masked column for a cutover fraction: ceil(fraction * T) - 1.
Eigen::Index cutover_column(double fraction, Eigen::Index n_times);

}  // namespace focus

#endif  // FOCUS_PATTERNS_HPP_
