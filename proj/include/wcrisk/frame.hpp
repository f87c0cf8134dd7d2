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

#ifndef WCRISK_FRAME_HPP_
#define WCRISK_FRAME_HPP_

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wcrisk/dataset.hpp"

namespace wcrisk {

// Which columns may shift. Z keeps its marginal, W|Z may change arbitrarily,
// everything else (V) follows P(V | W, Z).
struct VariablePartition {
  std::vector<std::string> immutable_z;
  std::vector<std::string> mutable_w;

  // Names of dataset columns in neither W nor Z.
  std::vector<std::string> dependent_v(const TabularDataset& dataset) const;

  // Throws PartitionError on empty W, duplicate or overlapping names, and
  // ConfigError on names missing from `available`.
  void validate(std::span<const std::string> available) const;
};

struct FoldAssignment {
  int k_folds = 0;
  std::uint64_t seed = 0;
  std::vector<int> fold_id;

  std::vector<std::size_t> fold_sizes() const;
};

// Uniformly random permutation cut into k near-equal chunks (the first n % k
// folds get one extra row). Throws ConfigError unless 2 <= k <= n.
FoldAssignment assign_folds(std::size_t n, int k, std::uint64_t seed);

// Opt-in variant: rows are shuffled within each stratum and dealt round-robin,
// so every fold sees each label in proportion and sizes still differ by <= 1.
FoldAssignment assign_folds_stratified(std::span<const std::int64_t> strata,
                                       int k, std::uint64_t seed);

// One source column as it appears in an encoded feature block.
struct SourceEncoding {
  std::string name;
  ColumnType type = ColumnType::kNumeric;
  std::size_t first = 0;  // first column in the block
  std::size_t width = 1;  // 1 for numeric, #levels for one-hot
  std::vector<std::int64_t> levels;  // sorted level codes (categorical only)
};

struct FeatureBlock {
  Eigen::MatrixXd values;  // rows x encoded columns
  std::vector<SourceEncoding> sources;
  std::vector<std::string> column_names;  // "age", "ward=3", ...

  std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
};

// The estimator's sole input: per-row losses, encoded W and Z blocks, folds.
struct EvaluationFrame {
  Eigen::VectorXd losses;
  FeatureBlock w;
  FeatureBlock z;
  std::vector<int> fold_id;
  int k_folds = 0;
  std::vector<std::size_t> row_ids;

  std::size_t n() const { return static_cast<std::size_t>(losses.size()); }

  // [w | z], the feature matrix for conditional-mean regression.
  Eigen::MatrixXd wz() const;

  // True when every W source is categorical or a 0/1-valued numeric column.
  bool w_all_discrete() const;
};

// Encodes a block in declaration order: numeric columns as-is, categorical
// columns one-hot over their sorted observed levels.
FeatureBlock encode_block(const TabularDataset& dataset,
                          std::span<const std::string> names);

EvaluationFrame build_frame(const TabularDataset& dataset,
                            const VariablePartition& partition,
                            std::span<const double> losses,
                            const FoldAssignment& folds);

}  // namespace wcrisk

#endif  // WCRISK_FRAME_HPP_
