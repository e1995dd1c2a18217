#ifndef FOCUS_IO_HPP_
#define FOCUS_IO_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "focus/dynamics.hpp"
#include "focus/factors.hpp"
#include "focus/inference.hpp"
#include "focus/panel.hpp"
#include "focus/pipeline.hpp"
#include "focus/sim.hpp"

namespace focus {

struct LabeledPanel {
  Panel panel;
  std::vector<std::string> unit_labels;
  std::vector<std::string> time_labels;
};

// Wide CSV: header "unit,<time labels...>", then one row per unit with its
// label first. Empty cells, NaN and NA mark missing entries. An optional mask
// CSV of the same shape (0/1 cells) overrides the inferred mask.
LabeledPanel read_wide_csv(const std::filesystem::path& path,
                           const std::optional<std::filesystem::path>& mask_path = std::nullopt);

// Long CSV with header unit,time,value,observed. Units and times are ordered
// by first appearance; absent pairs are missing.
LabeledPanel read_long_csv(const std::filesystem::path& path);

void write_wide_csv(const std::filesystem::path& path, const LabeledPanel& data);

// Numeric CSV with the given header; NaN is written as an empty cell.
void write_matrix_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const Eigen::MatrixXd& values,
                      const std::vector<std::string>& row_labels = {});

void write_factors_csv(const std::filesystem::path& path, const FactorModelFit& fit,
                       const std::vector<std::string>& time_labels);
void write_loadings_csv(const std::filesystem::path& path, const FactorModelFit& fit,
                        const std::vector<std::string>& unit_labels);
void write_eigenvalues_csv(const std::filesystem::path& path, const FactorModelFit& fit);
void write_dynamics_csv(const std::filesystem::path& path, const VarDynamics& dyn);
void write_forecasts_csv(const std::filesystem::path& path,
                         const std::vector<ForecastResult>& rows,
                         const std::vector<std::string>& unit_labels);
void write_variance_pieces_csv(const std::filesystem::path& path,
                               const std::vector<std::pair<std::string, Eigen::MatrixXd>>& pieces);
void write_experiment_csv(const std::filesystem::path& path, const ExperimentResult& result);
void write_experiment_summary_csv(const std::filesystem::path& path,
                                  const ExperimentResult& result);
void write_experiment_slopes_csv(const std::filesystem::path& path,
                                 const ExperimentResult& result);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace focus

#endif  // FOCUS_IO_HPP_
