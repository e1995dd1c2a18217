#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "focus/errors.hpp"
#include "focus/io.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "focus_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

TEST(Io, ReadsToyPanel) {
  const auto data = focus::read_wide_csv(fs::path(FOCUS_DATA_DIR) / "toy_panel.csv");
  EXPECT_EQ(data.panel.n_units(), 8);
  EXPECT_EQ(data.panel.n_times(), 16);
  EXPECT_EQ(data.panel.observed_count(), 8 * 16 - 6);
  EXPECT_EQ(data.unit_labels.front(), "u1");
  EXPECT_EQ(data.time_labels.back(), "t16");
  EXPECT_FALSE(data.panel.observed(1, 3));
  EXPECT_DOUBLE_EQ(data.panel.values()(0, 0), 1.2503);
}

TEST(Io, WideRoundTrip) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  Eigen::MatrixXd y(3, 4);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index t = 0; t < 4; ++t) y(i, t) = u(rng);
  focus::Mask m = focus::Mask::Ones(3, 4);
  m(2, 1) = 0;
  const focus::LabeledPanel data{focus::Panel(y, m), {"a", "b", "c"}, {"x", "y", "z", "w"}};
  const fs::path path = scratch("round.csv");
  focus::write_wide_csv(path, data);
  const auto back = focus::read_wide_csv(path);
  EXPECT_EQ(back.panel.values(), data.panel.values());
  EXPECT_EQ(back.panel.mask(), data.panel.mask());
  EXPECT_EQ(back.unit_labels, data.unit_labels);
  EXPECT_EQ(back.time_labels, data.time_labels);
}

TEST(Io, MaskFileOverrides) {
  const fs::path values = scratch("v.csv");
  const fs::path mask = scratch("m.csv");
  std::ofstream(values) << "unit,t1,t2\na,1,2\nb,3,4\n";
  std::ofstream(mask) << "unit,t1,t2\na,1,0\nb,1,1\n";
  const auto data = focus::read_wide_csv(values, mask);
  EXPECT_FALSE(data.panel.observed(0, 1));
  EXPECT_EQ(data.panel.values()(0, 1), 0.0);
}

TEST(Io, LongFormat) {
  const fs::path path = scratch("long.csv");
  std::ofstream(path) << "unit,time,value,observed\n"
                         "a,1,1.5,1\nb,1,2.5,1\na,2,9,0\nb,2,NA,1\n";
  const auto data = focus::read_long_csv(path);
  ASSERT_EQ(data.panel.n_units(), 2);
  ASSERT_EQ(data.panel.n_times(), 2);
  EXPECT_EQ(data.panel.values()(1, 0), 2.5);
  EXPECT_FALSE(data.panel.observed(0, 1));
  EXPECT_FALSE(data.panel.observed(1, 1));
}

TEST(Io, MissingFileIsIoError) {
  try {
    focus::read_wide_csv(scratch("does_not_exist.csv"));
    FAIL();
  } catch (const focus::Error& e) {
    EXPECT_EQ(e.category(), focus::ErrorCategory::kIo);
  }
}

TEST(Io, RaggedRowRejected) {
  const fs::path path = scratch("ragged.csv");
  std::ofstream(path) << "unit,t1,t2\na,1\n";
  EXPECT_THROW(focus::read_wide_csv(path), focus::Error);
}

TEST(Io, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125}) {
    EXPECT_EQ(std::stod(focus::format_double(v)), v);
  }
  EXPECT_EQ(focus::format_double(2.0), "2");
}

TEST(Errors, CategoriesAndNames) {
  EXPECT_EQ(focus::error_category(focus::ErrorCode::kInvalidArgument), focus::ErrorCategory::kValidation);
  EXPECT_EQ(focus::error_category(focus::ErrorCode::kSingularGram), focus::ErrorCategory::kNumerical);
  EXPECT_EQ(focus::error_category(focus::ErrorCode::kIo), focus::ErrorCategory::kIo);
  const focus::Error e(focus::ErrorCode::kZeroOverlap, "x");
  EXPECT_NE(std::string(e.what()).find(focus::error_code_name(focus::ErrorCode::kZeroOverlap)),
            std::string::npos);
}

}  // namespace
