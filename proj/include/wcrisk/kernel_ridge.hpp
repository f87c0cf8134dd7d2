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

#ifndef WCRISK_KERNEL_RIDGE_HPP_
#define WCRISK_KERNEL_RIDGE_HPP_

#include <Eigen/Dense>
#include <cstdint>

#include "wcrisk/kernels.hpp"

namespace wcrisk {

struct KernelRidgeOptions {
  // Above this many distinct training rows the fit switches from the exact
  // dual solve to a Nystrom approximation on `nystrom_landmarks` rows.
  Eigen::Index max_exact_support = 2000;
  Eigen::Index nystrom_landmarks = 400;
  std::uint64_t seed = 0;  // landmark selection
};

// RBF kernel ridge regression, k(x, x') = exp(-gamma ||x - x'||^2) on
// standardized features, minimizing (1/n) sum (y_i - f(x_i))^2 + lambda ||f||^2.
// Exact fits solve (K + lambda n I) a = y. Identical training rows are merged
// first, which is exact: the merged system is
// (K_u + lambda n diag(1/count)) a_u = mean_y_u over distinct rows u.
struct KernelRidgeModel {
  kernels::RowMatrix support_points;  // standardized
  Eigen::VectorXd dual_weights;
  double bandwidth_gamma = 1.0;
  double ridge_lambda = 0.0;
  Eigen::RowVectorXd feature_mean;
  Eigen::RowVectorXd feature_scale;
  bool approximate = false;  // Nystrom
  Eigen::Index training_rows = 0;
};

// Throws DimensionMismatch on shape errors, ConfigError on gamma <= 0 or
// lambda < 0, SingularSystem if the regularized solve fails.
KernelRidgeModel fit_kernel_ridge(const Eigen::MatrixXd& features,
                                  const Eigen::VectorXd& targets, double gamma,
                                  double lambda,
                                  const KernelRidgeOptions& options = {});

Eigen::VectorXd predict_kernel_ridge(const KernelRidgeModel& model,
                                     const Eigen::MatrixXd& features);

}  // namespace wcrisk

#endif  // WCRISK_KERNEL_RIDGE_HPP_
