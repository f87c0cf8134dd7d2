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

#include "wcrisk/frame.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "wcrisk/error.hpp"
#include "wcrisk/rng.hpp"

namespace wcrisk {

std::vector<std::string> VariablePartition::dependent_v(
    const TabularDataset& dataset) const {
  std::set<std::string> used(immutable_z.begin(), immutable_z.end());
  used.insert(mutable_w.begin(), mutable_w.end());
  std::vector<std::string> out;
  for (const std::string& name : dataset.column_names()) {
    if (!used.count(name)) out.push_back(name);
  }
  return out;
}

void VariablePartition::validate(std::span<const std::string> available) const {
  if (mutable_w.empty()) {
    throw PartitionError("the mutable set W must name at least one column");
  }
  std::set<std::string> w_seen;
  for (const std::string& name : mutable_w) {
    if (!w_seen.insert(name).second) {
      throw PartitionError("column '" + name + "' is listed twice in W");
    }
  }
  std::set<std::string> z_seen;
  for (const std::string& name : immutable_z) {
    if (!z_seen.insert(name).second) {
      throw PartitionError("column '" + name + "' is listed twice in Z");
    }
    if (w_seen.count(name)) {
      throw PartitionError("column '" + name +
                           "' is in both W (mutable) and Z (immutable)");
    }
  }
  const std::set<std::string> have(available.begin(), available.end());
  for (const auto* group : {&mutable_w, &immutable_z}) {
    for (const std::string& name : *group) {
      if (!have.count(name)) {
        throw ConfigError("partition column '" + name +
                          "' is not in the dataset");
      }
    }
  }
}

std::vector<std::size_t> FoldAssignment::fold_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(std::max(k_folds, 0)));
  for (int f : fold_id) ++sizes[static_cast<std::size_t>(f)];
  return sizes;
}

FoldAssignment assign_folds(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2 || static_cast<std::size_t>(k) > n) {
    throw ConfigError("fold count must satisfy 2 <= k <= n (k=" +
                      std::to_string(k) + ", n=" + std::to_string(n) + ")");
  }
  Rng rng(derive_seed(seed, "folds"));
  const std::vector<std::size_t> perm = rng.permutation(n);
  const std::size_t kk = static_cast<std::size_t>(k);
  const std::size_t base = n / kk;
  const std::size_t extra = n % kk;

  FoldAssignment out{k, seed, std::vector<int>(n)};
  std::size_t pos = 0;
  for (std::size_t f = 0; f < kk; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    for (std::size_t j = 0; j < size; ++j) {
      out.fold_id[perm[pos++]] = static_cast<int>(f);
    }
  }
  return out;
}

FoldAssignment assign_folds_stratified(std::span<const std::int64_t> strata,
                                       int k, std::uint64_t seed) {
  const std::size_t n = strata.size();
  if (k < 2 || static_cast<std::size_t>(k) > n) {
    throw ConfigError("fold count must satisfy 2 <= k <= n (k=" +
                      std::to_string(k) + ", n=" + std::to_string(n) + ")");
  }
  Rng rng(derive_seed(seed, "folds"));
  const std::vector<std::size_t> perm = rng.permutation(n);
  // Stable grouping of the shuffled order by stratum.
  std::vector<std::size_t> order(perm);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return strata[a] < strata[b];
                   });
  FoldAssignment out{k, seed, std::vector<int>(n)};
  for (std::size_t j = 0; j < n; ++j) {
    out.fold_id[order[j]] = static_cast<int>(j % static_cast<std::size_t>(k));
  }
  return out;
}

Eigen::MatrixXd EvaluationFrame::wz() const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n()),
                      w.values.cols() + z.values.cols());
  out << w.values, z.values;
  return out;
}

bool EvaluationFrame::w_all_discrete() const {
  for (const SourceEncoding& src : w.sources) {
    if (src.type == ColumnType::kCategorical) continue;
    const auto col = w.values.col(static_cast<Eigen::Index>(src.first));
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (col[i] != 0.0 && col[i] != 1.0) return false;
    }
  }
  return true;
}

FeatureBlock encode_block(const TabularDataset& dataset,
                          std::span<const std::string> names) {
  FeatureBlock block;
  const std::size_t n = dataset.n_rows();
  std::size_t width = 0;
  for (const std::string& name : names) {
    const Column& col = dataset.column(name);
    SourceEncoding src;
    src.name = name;
    src.type = col.type;
    src.first = width;
    if (col.type == ColumnType::kCategorical) {
      std::set<std::int64_t> levels(col.codes.begin(), col.codes.end());
      src.levels.assign(levels.begin(), levels.end());
      src.width = src.levels.size();
      for (std::int64_t level : src.levels) {
        block.column_names.push_back(name + "=" + std::to_string(level));
      }
    } else {
      src.width = 1;
      block.column_names.push_back(name);
    }
    width += src.width;
    block.sources.push_back(std::move(src));
  }

  block.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                       static_cast<Eigen::Index>(width));
  for (const SourceEncoding& src : block.sources) {
    const Column& col = dataset.column(src.name);
    if (src.type == ColumnType::kNumeric) {
      for (std::size_t i = 0; i < n; ++i) {
        block.values(static_cast<Eigen::Index>(i),
                     static_cast<Eigen::Index>(src.first)) = col.numeric[i];
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        const auto pos = std::lower_bound(src.levels.begin(), src.levels.end(),
                                          col.codes[i]) -
                         src.levels.begin();
        block.values(static_cast<Eigen::Index>(i),
                     static_cast<Eigen::Index>(src.first + pos)) = 1.0;
      }
    }
  }
  return block;
}

EvaluationFrame build_frame(const TabularDataset& dataset,
                            const VariablePartition& partition,
                            std::span<const double> losses,
                            const FoldAssignment& folds) {
  const std::vector<std::string> names = dataset.column_names();
  partition.validate(names);
  const std::size_t n = dataset.n_rows();
  if (losses.size() != n) {
    throw DimensionMismatch("loss vector has " + std::to_string(losses.size()) +
                            " entries for " + std::to_string(n) + " rows");
  }
  if (folds.fold_id.size() != n) {
    throw DimensionMismatch("fold assignment does not cover every row");
  }
  if (folds.k_folds < 2) throw ConfigError("need at least two folds");

  EvaluationFrame frame;
  frame.losses = Eigen::Map<const Eigen::VectorXd>(
      losses.data(), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < frame.losses.size(); ++i) {
    if (!std::isfinite(frame.losses[i])) {
      throw DomainError("non-finite loss at row " + std::to_string(i + 1));
    }
  }
  frame.w = encode_block(dataset, partition.mutable_w);
  frame.z = encode_block(dataset, partition.immutable_z);
  frame.fold_id = folds.fold_id;
  frame.k_folds = folds.k_folds;
  frame.row_ids.resize(n);
  std::iota(frame.row_ids.begin(), frame.row_ids.end(), std::size_t{0});
  return frame;
}

}  // namespace wcrisk
