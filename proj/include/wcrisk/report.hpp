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

#ifndef WCRISK_REPORT_HPP_
#define WCRISK_REPORT_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wcrisk/estimator.hpp"
#include "wcrisk/frame.hpp"

namespace wcrisk {

struct MutableRate {
  std::string column;  // encoded W column, e.g. "ordered" or "ward=3"
  double inside = 0.0;
  std::optional<double> outside;  // unset when the subsample is everything
};

struct MarginalDistance {
  std::string column;  // Z source column
  std::string metric;  // "wasserstein1" or "total_variation"
  double distance = 0.0;
};

struct Correlation {
  std::string column;  // encoded W column
  std::optional<double> value;  // unset when either side is constant
};

struct SubsampleReport {
  double alpha = 0.0;
  std::size_t subsample_size = 0;
  std::vector<MutableRate> mutable_rates;
  std::vector<MarginalDistance> immutable_distances;
  std::vector<Correlation> correlations;  // empty without an outcome
};

// Throws EmptySubsample when h selects no row, DimensionMismatch on length
// errors.
SubsampleReport characterize_subsample(const EvaluationFrame& frame,
                                       std::span<const std::uint8_t> h,
                                       std::optional<std::span<const double>> outcome,
                                       double alpha = 0.0);

// Mean of `alternative` over rows with h = 1.
double compare_on_subsample(std::span<const std::uint8_t> h,
                            std::span<const double> alternative);

// W1 distance between the empirical distributions of `sub` and `full`.
double wasserstein1(std::span<const double> sub, std::span<const double> full);

struct CurvePoint {
  WorstCaseEstimate estimate;
  std::optional<SubsampleReport> report;
  std::vector<std::pair<std::string, double>> comparisons;  // column -> mean
};

struct RiskCurve {
  std::vector<CurvePoint> points;  // ascending alpha
};

// Writes risk_curve.csv, mutable_rates.csv, correlations.csv and
// immutable_distances.csv into `dir`, rows sorted by alpha. Throws IoError.
void emit_plot_data(const RiskCurve& curve, const std::filesystem::path& dir);

}  // namespace wcrisk

#endif  // WCRISK_REPORT_HPP_
