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

// Shared fixtures for the test binaries.

#ifndef WCRISK_TESTS_SUPPORT_HPP_
#define WCRISK_TESTS_SUPPORT_HPP_

#include <string>
#include <vector>

#include "wcrisk/dataset.hpp"
#include "wcrisk/frame.hpp"
#include "wcrisk/oracles.hpp"

namespace wcrisk::testing_support {

inline EvaluationFrame frame_from(const TabularDataset& data, VariablePartition partition,
                                  const std::string& loss_column, int k,
                                  std::uint64_t fold_seed) {
  const std::vector<double>& losses = data.column(loss_column).numeric;
  return build_frame(data, partition, losses, assign_folds(data.n_rows(), k, fold_seed));
}

// Sampled instance with W = {w} and Z = {z} (or Z empty without strata).
inline EvaluationFrame discrete_frame(const DiscreteInstance& inst, std::size_t n,
                                      std::uint64_t seed, int k = 5) {
  VariablePartition p;
  p.mutable_w = {"w"};
  if (inst.has_z()) p.immutable_z = {"z"};
  return frame_from(sample_discrete_instance(inst, n, seed), p, "loss", k, seed + 1);
}

}  // namespace wcrisk::testing_support

#endif  // WCRISK_TESTS_SUPPORT_HPP_
