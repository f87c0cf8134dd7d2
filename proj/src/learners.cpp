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

#include "wcrisk/learners.hpp"

namespace wcrisk {

void KernelRidgeLearner::fit(const Eigen::MatrixXd& wz,
                             const Eigen::VectorXd& losses) {
  const TuningResult tuned = tune_kernel_ridge(wz, losses, grid_, options_);
  model_ = fit_kernel_ridge(wz, losses, tuned.selected.gamma,
                            tuned.selected.lambda, options_);
}

Eigen::VectorXd KernelRidgeLearner::predict(const Eigen::MatrixXd& wz) const {
  return predict_kernel_ridge(model_, wz);
}

Hyperparameters KernelRidgeLearner::hyperparameters() const {
  return {{"gamma", model_.bandwidth_gamma},
          {"lambda", model_.ridge_lambda},
          {"nystrom", model_.approximate ? 1.0 : 0.0}};
}

void SplineQuantileLearner::fit(const FeatureBlock& z,
                                const Eigen::VectorXd& targets, double alpha) {
  const SplineBasis basis = SplineBasis::fit(z, basis_);
  const TuningResult tuned =
      tune_quantile_regression(basis, z.values, targets, alpha, grid_, options_);
  model_ = fit_quantile_regression(basis, z.values, targets, alpha,
                                   tuned.selected.lambda, options_);
}

Eigen::VectorXd SplineQuantileLearner::predict(const Eigen::MatrixXd& z) const {
  return predict_quantile(model_, z);
}

Hyperparameters SplineQuantileLearner::hyperparameters() const {
  return {{"lambda", model_.ridge_lambda},
          {"basis_dimension", static_cast<double>(model_.basis.dimension())}};
}

std::vector<std::string> SplineQuantileLearner::warnings() const {
  std::vector<std::string> out = model_.basis.warnings();
  if (!model_.converged) {
    out.push_back("NonConvergence: quantile regression hit the iteration cap");
  }
  return out;
}

LearnerFactory reference_learners(const TuningGrid& grid,
                                  const SplineBasisConfig& basis,
                                  const KernelRidgeOptions& kernel_options) {
  LearnerFactory factory;
  factory.make_mean = [grid, kernel_options](std::uint64_t seed) {
    TuningGrid g = grid;
    g.seed = seed;
    KernelRidgeOptions o = kernel_options;
    o.seed = seed;
    return std::make_unique<KernelRidgeLearner>(std::move(g), o);
  };
  factory.make_quantile = [grid, basis](std::uint64_t seed) {
    TuningGrid g = grid;
    g.seed = seed;
    return std::make_unique<SplineQuantileLearner>(std::move(g), basis);
  };
  return factory;
}

}  // namespace wcrisk
