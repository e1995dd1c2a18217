#include "focus/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "focus/errors.hpp"

namespace focus {

PatternConfig PatternConfig::mcar(double p, std::uint64_t seed) {
  PatternConfig config;
  config.kind = PatternKind::kMcar;
  config.p = p;
  config.seed = seed;
  return config;
}

PatternConfig PatternConfig::staggered(std::vector<double> cdf, std::uint64_t seed) {
  PatternConfig config;
  config.kind = PatternKind::kStaggered;
  config.adoption_cdf = std::move(cdf);
  config.seed = seed;
  return config;
}

PatternConfig PatternConfig::simultaneous(std::uint64_t seed) {
  PatternConfig config;
  config.kind = PatternKind::kSimultaneous;
  config.seed = seed;
  return config;
}

PatternConfig PatternConfig::fully_observed() { return PatternConfig{}; }

Eigen::Index masked_unit_count(double fraction, Eigen::Index group_size) {
  // nearbyint honours the default FE_TONEAREST mode: ties go to even.
  const double raw = std::nearbyint(fraction * static_cast<double>(group_size));
  return std::clamp<Eigen::Index>(static_cast<Eigen::Index>(raw), 0, group_size);
}

Eigen::Index cutover_column(double fraction, Eigen::Index n_times) {
  // Guard against products like 0.75 * 8 landing a hair above an integer.
  const double x = fraction * static_cast<double>(n_times);
  const double c = std::ceil(x - 1e-9 * std::max(1.0, std::abs(x)));
  return std::clamp<Eigen::Index>(static_cast<Eigen::Index>(c) - 1, 0, n_times);
}

namespace {

void validate(const PatternConfig& config, Eigen::Index n_times) {
  switch (config.kind) {
    case PatternKind::kMcar:
      if (!(config.p > 0.0 && config.p <= 1.0)) {
        throw Error(ErrorCode::kInvalidArgument, "MCAR probability must lie in (0, 1]");
      }
      break;
    case PatternKind::kStaggered: {
      if (static_cast<Eigen::Index>(config.adoption_cdf.size()) != n_times) {
        throw Error(ErrorCode::kInvalidArgument, "adoption_cdf must have length T");
      }
      double prev = 0.0;
      for (double g : config.adoption_cdf) {
        if (g < prev || g > 1.0 || g < 0.0) {
          throw Error(ErrorCode::kInvalidArgument,
                      "adoption_cdf must be nondecreasing in [0, 1]");
        }
        prev = g;
      }
      break;
    }
    case PatternKind::kSimultaneous:
      for (const AdoptionGroup& g : {config.positive_group, config.negative_group}) {
        if (g.masked_fraction < 0.0 || g.masked_fraction > 1.0 ||
            g.cutover_fraction < 0.0 || g.cutover_fraction > 1.0) {
          throw Error(ErrorCode::kInvalidArgument, "adoption group fractions must lie in [0, 1]");
        }
      }
      break;
    case PatternKind::kFullyObserved:
      break;
  }
}

void mask_group(Mask& mask, std::vector<Eigen::Index> units, const AdoptionGroup& group,
                std::mt19937_64& rng) {
  const Eigen::Index n_masked =
      masked_unit_count(group.masked_fraction, static_cast<Eigen::Index>(units.size()));
  std::shuffle(units.begin(), units.end(), rng);
  const Eigen::Index start = cutover_column(group.cutover_fraction, mask.cols());
  for (Eigen::Index k = 0; k < n_masked; ++k) {
    for (Eigen::Index t = start; t < mask.cols(); ++t) {
      mask(units[static_cast<std::size_t>(k)], t) = 0;
    }
  }
}

}  // namespace

Mask generate_mask(const PatternConfig& config, Eigen::Index n_units, Eigen::Index n_times,
                   std::optional<std::span<const double>> aux) {
  if (n_units < 1 || n_times < 1) {
    throw Error(ErrorCode::kInvalidArgument, "mask dimensions must be positive");
  }
  validate(config, n_times);
  std::mt19937_64 rng(config.seed);
  Mask mask = Mask::Ones(n_units, n_times);

  switch (config.kind) {
    case PatternKind::kFullyObserved:
      break;
    case PatternKind::kMcar: {
      std::bernoulli_distribution observe(config.p);
      for (Eigen::Index t = n_times - 1; t >= 0; --t) {
        for (Eigen::Index i = 0; i < n_units; ++i) {
          mask(i, t) = observe(rng) ? 1 : 0;
        }
      }
      break;
    }
    case PatternKind::kStaggered: {
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      for (Eigen::Index i = 0; i < n_units; ++i) {
        // tau = min{t : u < G(t)}, so P(tau <= t) = G(t); no such t means never.
        const double u = unif(rng);
        const auto it = std::upper_bound(config.adoption_cdf.begin(),
                                         config.adoption_cdf.end(), u);
        const Eigen::Index tau = it - config.adoption_cdf.begin();
        for (Eigen::Index t = 0; t < n_times; ++t) {
          mask(i, t) = t >= tau ? 1 : 0;
        }
      }
      break;
    }
    case PatternKind::kSimultaneous: {
      if (!aux || static_cast<Eigen::Index>(aux->size()) != n_units) {
        throw Error(ErrorCode::kMissingAux,
                    "simultaneous adoption needs one auxiliary value per unit");
      }
      std::vector<Eigen::Index> positive;
      std::vector<Eigen::Index> negative;
      for (Eigen::Index i = 0; i < n_units; ++i) {
        ((*aux)[static_cast<std::size_t>(i)] >= 0.0 ? positive : negative).push_back(i);
      }
      mask_group(mask, std::move(positive), config.positive_group, rng);
      mask_group(mask, std::move(negative), config.negative_group, rng);
      break;
    }
  }
  return mask;
}

}  // namespace focus
