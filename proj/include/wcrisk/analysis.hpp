// Copyright 2026 The wcrisk Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Config-driven end-to-end runs: load, score, cross-fit, report, write.

#ifndef WCRISK_ANALYSIS_HPP_
#define WCRISK_ANALYSIS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wcrisk/dataset.hpp"
#include "wcrisk/estimator.hpp"
#include "wcrisk/frame.hpp"
#include "wcrisk/kernel_ridge.hpp"
#include "wcrisk/losses.hpp"
#include "wcrisk/report.hpp"
#include "wcrisk/spline_basis.hpp"
#include "wcrisk/tuning.hpp"

namespace wcrisk {

inline constexpr int kResultsSchemaVersion = 1;

struct SyntheticSource {
  std::string instance;  // a bundled discrete instance or "toy_sine"
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

struct AnalysisConfig {
  std::optional<std::filesystem::path> dataset_path;  // resolved
  Schema schema;
  std::optional<SyntheticSource> synthetic;

  VariablePartition partition;
  LossSpec loss;
  std::vector<double> alpha_grid = {0.0};

  int k_folds = 5;
  std::optional<std::string> stratify_by;
  std::optional<double> epsilon;
  double ci_level = 0.95;
  std::uint64_t seed = 0;
  TuningGrid grid;
  SplineBasisConfig spline;
  Eigen::Index max_exact_support = 2000;
  Eigen::Index nystrom_landmarks = 400;

  bool characterize = true;
  std::optional<std::string> outcome_column;
  std::vector<std::string> comparison_loss_columns;

  std::filesystem::path output_dir = "wcrisk_out";

  // Structural checks that need no data; throws ConfigError.
  void validate() const;
};

// Relative paths resolve against `base_dir`. Unknown keys are rejected.
// Throws ConfigError.
AnalysisConfig parse_config(const nlohmann::json& doc,
                            const std::filesystem::path& base_dir);
AnalysisConfig load_config(const std::filesystem::path& path);

// Round-trips through parse_config; epsilon is echoed as resolved when
// `resolved_epsilon` is given. output_dir is left out so that results do not
// depend on where they are written.
nlohmann::json config_to_json(const AnalysisConfig& config,
                              std::optional<double> resolved_epsilon = {});

TabularDataset load_analysis_dataset(const AnalysisConfig& config);

struct AnalysisResult {
  RiskCurve curve;
  EvaluationFrame frame;
  nlohmann::json results;  // the results.json document
};

// Validates everything against the data before any fitting.
AnalysisResult run_analysis(const AnalysisConfig& config);

// Writes results.json, curve.csv, h_indicators.csv and the plot CSVs into a
// sibling temp directory, then renames it onto `out_dir`.
void write_outputs(const AnalysisResult& result, const std::filesystem::path& out_dir);

}  // namespace wcrisk

#endif  // WCRISK_ANALYSIS_HPP_
