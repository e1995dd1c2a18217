#include <vector>

#include <gtest/gtest.h>

#include "focus/errors.hpp"
#include "focus/patterns.hpp"

namespace {

using focus::Mask;
using focus::PatternConfig;

TEST(Patterns, McarOneIsFullyObserved) {
  const Mask m = focus::generate_mask(PatternConfig::mcar(1.0, 5), 6, 9);
  EXPECT_TRUE((m.array() == 1).all());
}

TEST(Patterns, ImmediateAdoptionIsFullyObserved) {
  const Mask m = focus::generate_mask(PatternConfig::staggered(std::vector<double>(7, 1.0), 5), 6, 7);
  EXPECT_TRUE((m.array() == 1).all());
}

TEST(Patterns, RoundingRule) {
  EXPECT_EQ(focus::masked_unit_count(0.625, 4), 2);  // 2.5 -> 2
  EXPECT_EQ(focus::masked_unit_count(0.375, 4), 2);  // 1.5 -> 2
  EXPECT_EQ(focus::masked_unit_count(0.25, 4), 1);
  EXPECT_EQ(focus::masked_unit_count(0.5, 5), 2);    // 2.5 -> 2
  EXPECT_EQ(focus::cutover_column(0.75, 8), 5);
  EXPECT_EQ(focus::cutover_column(0.375, 8), 2);
}

TEST(Patterns, SimultaneousGroups) {
  const std::vector<double> aux{1, 1, 1, 1, -1, -1, -1, -1};
  const Mask m = focus::generate_mask(PatternConfig::simultaneous(4), 8, 8,
                                      std::span<const double>(aux));
  auto masked_from = [&](Eigen::Index i, Eigen::Index col) {
    for (Eigen::Index t = 0; t < 8; ++t) {
      if ((m(i, t) == 0) != (t >= col)) return false;
    }
    return true;
  };
  int top = 0;
  int bottom = 0;
  for (Eigen::Index i = 0; i < 4; ++i) {
    if (masked_from(i, 5)) ++top;
    else EXPECT_TRUE((m.row(i).array() == 1).all());
  }
  for (Eigen::Index i = 4; i < 8; ++i) {
    if (masked_from(i, 2)) ++bottom;
    else EXPECT_TRUE((m.row(i).array() == 1).all());
  }
  EXPECT_EQ(top, 1);
  EXPECT_EQ(bottom, 2);
}

TEST(Patterns, SimultaneousNeedsAux) {
  try {
    focus::generate_mask(PatternConfig::simultaneous(1), 4, 4);
    FAIL();
  } catch (const focus::Error& e) {
    EXPECT_EQ(e.code(), focus::ErrorCode::kMissingAux);
  }
}

TEST(Patterns, StaggeredRowsAreMonotone) {
  std::vector<double> cdf;
  for (int t = 1; t <= 20; ++t) cdf.push_back(0.8 * t / 20.0);
  const Mask m = focus::generate_mask(PatternConfig::staggered(cdf, 17), 50, 20);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index t = 1; t < m.cols(); ++t) {
      EXPECT_GE(m(i, t), m(i, t - 1));
    }
  }
}

TEST(Patterns, SameSeedSameMask) {
  for (const auto& cfg : {PatternConfig::mcar(0.4, 9),
                          PatternConfig::staggered(std::vector<double>{0.1, 0.3, 0.5, 0.9}, 9)}) {
    EXPECT_EQ(focus::generate_mask(cfg, 13, 4), focus::generate_mask(cfg, 13, 4));
  }
  EXPECT_NE(focus::generate_mask(PatternConfig::mcar(0.5, 1), 30, 30),
            focus::generate_mask(PatternConfig::mcar(0.5, 2), 30, 30));
}

TEST(Patterns, McarTrailingColumnsAgreeAcrossLengths) {
  const Mask short_m = focus::generate_mask(PatternConfig::mcar(0.5, 3), 10, 8);
  const Mask long_m = focus::generate_mask(PatternConfig::mcar(0.5, 3), 10, 20);
  EXPECT_EQ(short_m, long_m.rightCols(8));
}

TEST(Patterns, InvalidConfigsThrow) {
  EXPECT_THROW(focus::generate_mask(PatternConfig::mcar(1.5, 0), 3, 3), focus::Error);
  EXPECT_THROW(focus::generate_mask(PatternConfig::staggered({0.5, 0.2, 0.9}, 0), 3, 3),
               focus::Error);
  EXPECT_THROW(focus::generate_mask(PatternConfig::staggered({0.5, 0.9}, 0), 3, 3), focus::Error);
}

}  // namespace
