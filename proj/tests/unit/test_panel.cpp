#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "focus/errors.hpp"
#include "focus/panel.hpp"
#include "focus/patterns.hpp"
#include "test_util.hpp"

namespace {

using focus::Mask;
using focus::Panel;

Mask mask_from_rows(std::initializer_list<const char*> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto t = static_cast<Eigen::Index>(std::strlen(*rows.begin()));
  Mask m(n, t);
  Eigen::Index i = 0;
  for (const char* row : rows) {
    for (Eigen::Index j = 0; j < t; ++j) m(i, j) = row[j] == '1' ? 1 : 0;
    ++i;
  }
  return m;
}

// Direct quadruple sums over the overlap fractions.
struct BruteOmega {
  double w1 = 0.0, w2 = 0.0, w3 = 0.0;
};

BruteOmega brute_omega(const Mask& w) {
  const Eigen::Index n = w.rows();
  const Eigen::Index t = w.cols();
  const double nd = static_cast<double>(n);
  const double td = static_cast<double>(t);
  auto frac = [&](std::initializer_list<Eigen::Index> cols) {
    double c = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      bool all = true;
      for (Eigen::Index s : cols) all = all && w(i, s) != 0;
      if (all) c += 1.0;
    }
    return c / nd;
  };
  const Eigen::Index last = t - 1;
  BruteOmega o;
  for (Eigen::Index s = 0; s < t; ++s) {
    for (Eigen::Index u = 0; u < t; ++u) {
      o.w1 += frac({s, u, last}) / (frac({s, last}) * frac({u, last}));
      for (Eigen::Index v = 0; v < t; ++v) {
        o.w2 += frac({s, last, u, v}) / (frac({s, last}) * frac({u, v}));
        for (Eigen::Index x = 0; x < t; ++x) {
          o.w3 += frac({s, u, v, x}) / (frac({s, u}) * frac({v, x}));
        }
      }
    }
  }
  o.w1 /= td * td;
  o.w2 /= td * td * td;
  o.w3 /= td * td * td * td;
  return o;
}

TEST(Overlap, FullyObservedCountsEqualN) {
  const Panel panel(Eigen::MatrixXd::Random(3, 4));
  const auto index = focus::build_overlap_index(panel);
  EXPECT_TRUE((index.counts.array() == 3).all());
}

TEST(Overlap, HandEnumeratedCounts) {
  const Panel panel(Eigen::MatrixXd::Ones(3, 4), mask_from_rows({"1100", "0110", "0011"}));
  const auto c = focus::build_overlap_index(panel).counts;
  EXPECT_EQ(c(0, 1), 1);
  EXPECT_EQ(c(1, 2), 1);
  EXPECT_EQ(c(0, 3), 0);
  EXPECT_EQ(c(1, 1), 2);
}

TEST(Overlap, SingleUnit) {
  const Panel panel(Eigen::MatrixXd::Ones(1, 4), mask_from_rows({"1010"}));
  const auto c = focus::build_overlap_index(panel).counts;
  EXPECT_EQ(c(0, 2), 1);
  EXPECT_EQ(c(0, 1), 0);
}

TEST(Overlap, CountsAreSymmetric) {
  const Mask m = focus::generate_mask(focus::PatternConfig::mcar(0.6, 3), 30, 12);
  const auto c = focus::build_overlap_index(Panel(Eigen::MatrixXd::Zero(30, 12), m)).counts;
  EXPECT_EQ(c, c.transpose());
}

TEST(Panel, MaskedValuesAreErased) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Ones(2, 2);
  y(1, 1) = std::numeric_limits<double>::quiet_NaN();
  Mask m = Mask::Ones(2, 2);
  m(1, 1) = 0;
  const Panel panel(y, m);
  EXPECT_EQ(panel.values()(1, 1), 0.0);
  EXPECT_EQ(panel.observed_count(), 3);
}

TEST(Panel, ShapeMismatchThrows) {
  EXPECT_THROW(Panel(Eigen::MatrixXd::Ones(2, 3), Mask::Ones(3, 2)), focus::Error);
}

TEST(Panel, TransposeSwapsRoles) {
  Mask m = Mask::Ones(2, 3);
  m(0, 2) = 0;
  const Panel panel(Eigen::MatrixXd::Random(2, 3), m);
  const Panel tp = panel.transposed();
  EXPECT_EQ(tp.n_units(), 3);
  EXPECT_EQ(tp.mask()(2, 0), 0);
  EXPECT_EQ(tp.values(), panel.values().transpose());
}

TEST(OverlapStats, FullyObservedIsOne) {
  const auto s = focus::compute_overlap_stats(Panel(Eigen::MatrixXd::Random(5, 7)));
  EXPECT_DOUBLE_EQ(s.omega1, 1.0);
  EXPECT_DOUBLE_EQ(s.omega2, 1.0);
  EXPECT_DOUBLE_EQ(s.omega3, 1.0);
}

// Population weights under MCAR(p) at finite T: a set of k distinct columns is
// jointly observed with probability p^k.
BruteOmega mcar_population_omega(double p, Eigen::Index t) {
  auto pk = [p](std::initializer_list<Eigen::Index> cols) {
    std::vector<Eigen::Index> v(cols);
    std::sort(v.begin(), v.end());
    const auto k = std::unique(v.begin(), v.end()) - v.begin();
    return std::pow(p, static_cast<double>(k));
  };
  const double td = static_cast<double>(t);
  const Eigen::Index last = t - 1;
  BruteOmega o;
  for (Eigen::Index s = 0; s < t; ++s) {
    for (Eigen::Index u = 0; u < t; ++u) {
      o.w1 += pk({s, u, last}) / (pk({s, last}) * pk({u, last}));
      for (Eigen::Index v = 0; v < t; ++v) {
        o.w2 += pk({s, last, u, v}) / (pk({s, last}) * pk({u, v}));
        for (Eigen::Index x = 0; x < t; ++x) o.w3 += pk({s, u, v, x}) / (pk({s, u}) * pk({v, x}));
      }
    }
  }
  o.w1 /= td * td;
  o.w2 /= td * td * td;
  o.w3 /= td * td * td * td;
  return o;
}

TEST(OverlapStats, McarLimits) {
  // omega1 -> 1/p and omega2, omega3 -> 1 as T grows; at T = 16 the
  // coinciding-index terms still add O(1/T).
  const BruteOmega pop = mcar_population_omega(0.7, 16);
  EXPECT_NEAR(pop.w1, 1.0 / 0.7, 0.05);
  EXPECT_NEAR(pop.w2, 1.0, 0.15);
  EXPECT_NEAR(pop.w3, 1.0, 0.15);
  const BruteOmega wide = mcar_population_omega(0.7, 48);
  EXPECT_LT(std::abs(wide.w3 - 1.0), std::abs(pop.w3 - 1.0));

  const Mask m = focus::generate_mask(focus::PatternConfig::mcar(0.7, 99), 2000, 16);
  const auto s = focus::compute_overlap_stats(Panel(Eigen::MatrixXd::Zero(2000, 16), m));
  EXPECT_NEAR(s.omega1, pop.w1, 0.03);
  EXPECT_NEAR(s.omega2, pop.w2, 0.03);
  EXPECT_NEAR(s.omega3, pop.w3, 0.03);
}

TEST(OverlapStats, StaggeredAllAdoptedIsOne) {
  const Mask m = focus::generate_mask(
      focus::PatternConfig::staggered(std::vector<double>(6, 1.0), 1), 10, 6);
  const auto s = focus::compute_overlap_stats(Panel(Eigen::MatrixXd::Zero(10, 6), m));
  EXPECT_DOUBLE_EQ(s.omega1, 1.0);
}

TEST(OverlapStats, MatchesBruteForceSums) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Mask m = focus::generate_mask(focus::PatternConfig::mcar(0.75, seed), 25, 6);
    const auto s = focus::compute_overlap_stats(Panel(Eigen::MatrixXd::Zero(25, 6), m));
    const BruteOmega o = brute_omega(m);
    EXPECT_NEAR(s.omega1, o.w1, 1e-12);
    EXPECT_NEAR(s.omega2, o.w2, 1e-12);
    EXPECT_NEAR(s.omega3, o.w3, 1e-12);
    EXPECT_TRUE(s.omega3_exact);
  }
}

TEST(OverlapStats, SampledOmega3NearExact) {
  const Mask m = focus::generate_mask(focus::PatternConfig::mcar(0.6, 8), 40, 80);
  const Panel panel(Eigen::MatrixXd::Zero(40, 80), m);
  const auto exact = focus::compute_overlap_stats(panel);
  const auto sampled = focus::compute_overlap_stats(panel, 200000);
  EXPECT_FALSE(sampled.omega3_exact);
  EXPECT_GT(sampled.omega3_std_error, 0.0);
  EXPECT_NEAR(sampled.omega3, exact.omega3, 5.0 * sampled.omega3_std_error + 1e-3);
  EXPECT_DOUBLE_EQ(sampled.omega1, exact.omega1);
}

TEST(OverlapStats, ZeroOverlapThrows) {
  const Panel panel(Eigen::MatrixXd::Ones(2, 3), mask_from_rows({"110", "011"}));
  try {
    focus::compute_overlap_stats(panel);
    FAIL();
  } catch (const focus::Error& e) {
    EXPECT_EQ(e.code(), focus::ErrorCode::kZeroOverlap);
  }
}

}  // namespace
