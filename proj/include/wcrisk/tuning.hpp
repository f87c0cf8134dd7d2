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

#ifndef WCRISK_TUNING_HPP_
#define WCRISK_TUNING_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "wcrisk/kernel_ridge.hpp"
#include "wcrisk/quantile_regression.hpp"
#include "wcrisk/spline_basis.hpp"

namespace wcrisk {

struct TuningGrid {
  // Kernel gammas are multiplied by 1/d (d = feature count) before use.
  std::vector<double> kernel_gammas = {0.01, 0.1, 1.0, 10.0};
  std::vector<double> kernel_lambdas = {1e-4, 1e-2, 1.0, 1e2};
  std::vector<double> quantile_lambdas = {1e-4, 1e-2, 1.0, 1e2};
  int inner_folds = 5;
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError
};

struct TuningCell {
  double gamma = 0.0;  // 0 for quantile cells
  double lambda = 0.0;
  double score = 0.0;  // mean held-out objective; +inf when the fit failed
};

struct TuningResult {
  TuningCell selected;
  std::vector<TuningCell> cells;  // grid order
};

// Lowest score wins; scores within a relative 1e-12 of the best are ties,
// resolved toward larger lambda, then smaller gamma (wider kernel). The
// choice does not depend on cell order. Throws NumericError when every cell
// failed.
TuningCell select_cell(const std::vector<TuningCell>& cells);

// Grid search over (gamma / d, lambda) by inner-fold held-out MSE. A
// single-cell grid is returned without fitting. Throws InsufficientData when
// n < 2 * inner_folds.
TuningResult tune_kernel_ridge(const Eigen::MatrixXd& features,
                               const Eigen::VectorXd& targets,
                               const TuningGrid& grid,
                               const KernelRidgeOptions& options = {});

// Grid search over quantile_lambdas by inner-fold held-out pinball loss at
// level alpha, on a basis already fitted to the training rows.
TuningResult tune_quantile_regression(const SplineBasis& basis,
                                      const Eigen::MatrixXd& z,
                                      const Eigen::VectorXd& targets,
                                      double alpha, const TuningGrid& grid,
                                      const QuantileSolverOptions& options = {});

}  // namespace wcrisk

#endif  // WCRISK_TUNING_HPP_
