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

#include "wcrisk/losses.hpp"

#include <algorithm>
#include <cmath>

#include "wcrisk/error.hpp"

namespace wcrisk {
namespace {

bool is_integral(double v) { return std::isfinite(v) && std::floor(v) == v; }

const Column& require(const TabularDataset& dataset,
                      const std::optional<std::string>& name,
                      std::string_view role) {
  if (!name) throw ConfigError(std::string(role) + " column is not configured");
  if (!dataset.has_column(*name)) {
    throw ConfigError(std::string(role) + " column '" + *name +
                      "' is not in the dataset");
  }
  return dataset.column(*name);
}

std::string at_row(std::size_t i) { return " at row " + std::to_string(i + 1); }

}  // namespace

std::string_view loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::kZeroOne:
      return "zero_one";
    case LossKind::kBinaryCrossEntropy:
      return "binary_cross_entropy";
    case LossKind::kSquaredError:
      return "squared_error";
    case LossKind::kPrecomputed:
      return "precomputed";
  }
  return "unknown";
}

LossKind parse_loss_kind(std::string_view name) {
  for (LossKind k : {LossKind::kZeroOne, LossKind::kBinaryCrossEntropy,
                     LossKind::kSquaredError, LossKind::kPrecomputed}) {
    if (loss_kind_name(k) == name) return k;
  }
  throw ConfigError("unknown loss kind '" + std::string(name) + "'");
}

void LossSpec::validate() const {
  if (kind == LossKind::kPrecomputed) {
    if (!loss_column) {
      throw ConfigError("precomputed loss requires loss_column");
    }
    if (prediction_column || label_column) {
      throw ConfigError(
          "precomputed loss must not set prediction_column or label_column");
    }
  } else {
    if (!prediction_column || !label_column) {
      throw ConfigError(std::string(loss_kind_name(kind)) +
                        " loss requires prediction_column and label_column");
    }
    if (loss_column) {
      throw ConfigError("loss_column is only valid for precomputed losses");
    }
  }
  if (!(clip_epsilon > 0.0 && clip_epsilon < 0.5)) {
    throw ConfigError("clip_epsilon must lie in (0, 0.5)");
  }
}

std::vector<double> compute_losses(const TabularDataset& dataset,
                                   const LossSpec& spec) {
  spec.validate();
  const std::size_t n = dataset.n_rows();
  std::vector<double> losses(n);

  if (spec.kind == LossKind::kPrecomputed) {
    const Column& col = require(dataset, spec.loss_column, "loss");
    for (std::size_t i = 0; i < n; ++i) {
      losses[i] = col.value(i);
      if (!std::isfinite(losses[i])) {
        throw DomainError("non-finite loss" + at_row(i));
      }
    }
    return losses;
  }

  const Column& pred = require(dataset, spec.prediction_column, "prediction");
  const Column& label = require(dataset, spec.label_column, "label");
  switch (spec.kind) {
    case LossKind::kZeroOne:
      for (std::size_t i = 0; i < n; ++i) {
        const double p = pred.value(i);
        const double y = label.value(i);
        if (!is_integral(p) || !is_integral(y)) {
          throw DomainError("zero_one loss needs integer category codes" +
                            at_row(i));
        }
        losses[i] = p != y ? 1.0 : 0.0;
      }
      break;
    case LossKind::kBinaryCrossEntropy: {
      const double eps = spec.clip_epsilon;
      for (std::size_t i = 0; i < n; ++i) {
        const double p = pred.value(i);
        const double y = label.value(i);
        if (!(p >= 0.0 && p <= 1.0)) {
          throw DomainError("prediction outside [0, 1]" + at_row(i));
        }
        if (y != 0.0 && y != 1.0) {
          throw DomainError("binary label must be 0 or 1" + at_row(i));
        }
        // Clamp the probability of the observed label; 1 - p is exact for
        // p >= 0.5, where clamping p itself would round 1 - eps.
        const double q = y == 1.0 ? p : 1.0 - p;
        losses[i] = -std::log(std::clamp(q, eps, 1.0 - eps));
      }
      break;
    }
    case LossKind::kSquaredError:
      for (std::size_t i = 0; i < n; ++i) {
        const double d = pred.value(i) - label.value(i);
        losses[i] = d * d;
        if (!std::isfinite(losses[i])) {
          throw DomainError("non-finite squared error" + at_row(i));
        }
      }
      break;
    case LossKind::kPrecomputed:
      break;
  }
  return losses;
}

}  // namespace wcrisk
