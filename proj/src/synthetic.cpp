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

#include <algorithm>
#include <cmath>

#include "wcrisk/error.hpp"
#include "wcrisk/oracles.hpp"
#include "wcrisk/rng.hpp"

namespace wcrisk {
namespace {

double logistic(double t) {
  return t >= 0.0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
}

}  // namespace

std::int64_t toy_sine_label(double x1, double x2) {
  return x1 > std::sin(2.0 * x2) ? 1 : 0;
}

TabularDataset generate_toy_sine(const ToySineConfig& config) {
  if (config.n < 1) throw ConfigError("toy_sine needs n >= 1");
  Rng rng(derive_seed(config.seed, "toy_sine"));
  Column x1{"x1", ColumnType::kNumeric, {}, {}};
  Column x2{"x2", ColumnType::kNumeric, {}, {}};
  Column y{"y", ColumnType::kCategorical, {}, {}};
  Column pred{"prediction", ColumnType::kNumeric, {}, {}};
  Column loss{"loss", ColumnType::kNumeric, {}, {}};
  constexpr double kClip = 1e-12;
  for (std::size_t i = 0; i < config.n; ++i) {
    const double a = rng.standard_normal();
    const double b = rng.standard_normal();
    const std::int64_t label = toy_sine_label(a, b);
    const double p = logistic(config.b0 + config.b1 * a + config.b2 * b);
    const double pc = std::clamp(p, kClip, 1.0 - kClip);
    x1.numeric.push_back(a);
    x2.numeric.push_back(b);
    y.codes.push_back(label);
    pred.numeric.push_back(p);
    loss.numeric.push_back(label == 1 ? -std::log(pc) : -std::log1p(-pc));
  }
  return TabularDataset({std::move(x1), std::move(x2), std::move(y),
                         std::move(pred), std::move(loss)});
}

TabularDataset generate_toy_sine_fitted(std::size_t n, std::uint64_t seed) {
  ToySineConfig train;
  train.n = n;
  train.seed = derive_seed(seed, "toy_sine_train");
  const TabularDataset sample = generate_toy_sine(train);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), 2);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    x(r, 0) = sample.column("x1").numeric[i];
    x(r, 1) = sample.column("x2").numeric[i];
    y[r] = static_cast<double>(sample.column("y").codes[i]);
  }
  const Eigen::VectorXd b = fit_logistic(x, y);
  ToySineConfig config;
  config.n = n;
  config.seed = seed;
  config.b0 = b[0];
  config.b1 = b[1];
  config.b2 = b[2];
  return generate_toy_sine(config);
}

Eigen::VectorXd fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             int max_iterations) {
  if (x.rows() != y.size() || x.rows() == 0) {
    throw DimensionMismatch("logistic regression: rows do not match labels");
  }
  Eigen::MatrixXd design(x.rows(), x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(design.cols());
  for (int it = 0; it < max_iterations; ++it) {
    const Eigen::VectorXd eta = design * beta;
    Eigen::VectorXd p(eta.size()), w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      p[i] = logistic(eta[i]);
      w[i] = std::max(p[i] * (1.0 - p[i]), 1e-12);
    }
    const Eigen::VectorXd grad = design.transpose() * (y - p);
    Eigen::MatrixXd info = design.transpose() * w.asDiagonal() * design;
    info.diagonal().array() += 1e-10;
    const Eigen::VectorXd step = info.ldlt().solve(grad);
    beta += step;
    if (step.norm() < 1e-10 * (1.0 + beta.norm())) break;
  }
  if (!beta.allFinite()) throw NumericError("logistic regression diverged");
  return beta;
}

}  // namespace wcrisk
