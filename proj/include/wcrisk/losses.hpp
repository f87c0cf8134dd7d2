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

#ifndef WCRISK_LOSSES_HPP_
#define WCRISK_LOSSES_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wcrisk/dataset.hpp"

namespace wcrisk {

enum class LossKind { kZeroOne, kBinaryCrossEntropy, kSquaredError, kPrecomputed };

std::string_view loss_kind_name(LossKind kind);
LossKind parse_loss_kind(std::string_view name);

// How per-row losses are obtained from the fixed model's predictions.
// Either prediction+label columns or a precomputed loss column, never both.
struct LossSpec {
  LossKind kind = LossKind::kPrecomputed;
  std::optional<std::string> prediction_column;
  std::optional<std::string> label_column;
  std::optional<std::string> loss_column;
  double clip_epsilon = 1e-12;

  // Throws ConfigError on an inconsistent combination.
  void validate() const;
};

// zero_one: 1 iff prediction code != label code (multiclass codes allowed).
// binary_cross_entropy: -[y ln p~ + (1-y) ln(1-p~)], p~ = clamp(p, eps, 1-eps).
// squared_error: (prediction - label)^2.
// precomputed: the loss column, unchanged.
// Throws DomainError when a prediction or label violates its kind's domain.
std::vector<double> compute_losses(const TabularDataset& dataset,
                                   const LossSpec& spec);

}  // namespace wcrisk

#endif  // WCRISK_LOSSES_HPP_
