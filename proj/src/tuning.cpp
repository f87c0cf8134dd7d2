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

#include "wcrisk/tuning.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "wcrisk/error.hpp"
#include "wcrisk/frame.hpp"
#include "wcrisk/rng.hpp"

namespace wcrisk {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_grid_values(const std::vector<double>& values, const char* name) {
  if (values.empty()) {
    throw ConfigError(std::string("tuning grid '") + name + "' is empty");
  }
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError(std::string("tuning grid '") + name +
                        "' must hold positive finite values");
    }
  }
}

FoldAssignment inner_folds(Eigen::Index n, const TuningGrid& grid) {
  if (n < 2 * static_cast<Eigen::Index>(grid.inner_folds)) {
    throw InsufficientData("tuning needs at least " +
                           std::to_string(2 * grid.inner_folds) +
                           " rows, got " + std::to_string(n));
  }
  return assign_folds(static_cast<std::size_t>(n), grid.inner_folds,
                      derive_seed(grid.seed, "inner_folds"));
}

// Row indices of fold k (held out) and of the rest.
void split(const FoldAssignment& folds, int k, std::vector<Eigen::Index>& train,
           std::vector<Eigen::Index>& test) {
  train.clear();
  test.clear();
  for (std::size_t i = 0; i < folds.fold_id.size(); ++i) {
    (folds.fold_id[i] == k ? test : train).push_back(static_cast<Eigen::Index>(i));
  }
}

}  // namespace

void TuningGrid::validate() const {
  check_grid_values(kernel_gammas, "kernel_gamma_grid");
  check_grid_values(kernel_lambdas, "kernel_lambda_grid");
  check_grid_values(quantile_lambdas, "quantile_lambda_grid");
  if (inner_folds < 2) throw ConfigError("inner_folds must be >= 2");
}

TuningCell select_cell(const std::vector<TuningCell>& cells) {
  double best = kInf;
  for (const TuningCell& c : cells) best = std::min(best, c.score);
  if (!std::isfinite(best)) {
    throw NumericError("every tuning cell failed to fit");
  }
  const double cutoff = best + 1e-12 * std::fabs(best);
  const TuningCell* pick = nullptr;
  for (const TuningCell& c : cells) {
    if (!(c.score <= cutoff)) continue;
    if (pick == nullptr || c.lambda > pick->lambda ||
        (c.lambda == pick->lambda && c.gamma < pick->gamma)) {
      pick = &c;
    }
  }
  return *pick;
}

TuningResult tune_kernel_ridge(const Eigen::MatrixXd& features,
                               const Eigen::VectorXd& targets,
                               const TuningGrid& grid,
                               const KernelRidgeOptions& options) {
  grid.validate();
  const double d = static_cast<double>(std::max<Eigen::Index>(features.cols(), 1));
  TuningResult result;
  for (double g : grid.kernel_gammas) {
    for (double l : grid.kernel_lambdas) result.cells.push_back({g / d, l, 0.0});
  }
  if (result.cells.size() == 1) {
    result.selected = result.cells.front();
    return result;
  }

  const FoldAssignment folds = inner_folds(features.rows(), grid);
  // Fold subsets are shared by every cell.
  std::vector<Eigen::MatrixXd> train_x, test_x;
  std::vector<Eigen::VectorXd> train_y, test_y;
  std::vector<Eigen::Index> train, test;
  for (int k = 0; k < grid.inner_folds; ++k) {
    split(folds, k, train, test);
    train_x.push_back(features(train, Eigen::all));
    test_x.push_back(features(test, Eigen::all));
    train_y.push_back(targets(train));
    test_y.push_back(targets(test));
  }

  const auto n_cells = static_cast<std::ptrdiff_t>(result.cells.size());
#pragma omp parallel for schedule(dynamic) num_threads(kernels::thread_count())
  for (std::ptrdiff_t c = 0; c < n_cells; ++c) {
    TuningCell& cell = result.cells[static_cast<std::size_t>(c)];
    double total = 0.0;
    try {
      for (int k = 0; k < grid.inner_folds; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        const KernelRidgeModel model = fit_kernel_ridge(
            train_x[ks], train_y[ks], cell.gamma, cell.lambda, options);
        const Eigen::VectorXd pred = predict_kernel_ridge(model, test_x[ks]);
        total += (pred - test_y[ks]).squaredNorm() /
                 static_cast<double>(test_y[ks].size());
      }
      cell.score = total / grid.inner_folds;
      if (!std::isfinite(cell.score)) cell.score = kInf;
    } catch (const Error&) {
      cell.score = kInf;
    }
  }
  result.selected = select_cell(result.cells);
  return result;
}

TuningResult tune_quantile_regression(const SplineBasis& basis,
                                      const Eigen::MatrixXd& z,
                                      const Eigen::VectorXd& targets,
                                      double alpha, const TuningGrid& grid,
                                      const QuantileSolverOptions& options) {
  grid.validate();
  TuningResult result;
  for (double l : grid.quantile_lambdas) result.cells.push_back({0.0, l, 0.0});
  if (result.cells.size() == 1) {
    result.selected = result.cells.front();
    return result;
  }

  const kernels::RowMatrix design = basis.expand(z);
  const FoldAssignment folds = inner_folds(design.rows(), grid);
  std::vector<kernels::RowMatrix> train_x, test_x;
  std::vector<Eigen::VectorXd> train_y, test_y;
  std::vector<Eigen::Index> train, test;
  for (int k = 0; k < grid.inner_folds; ++k) {
    split(folds, k, train, test);
    train_x.push_back(design(train, Eigen::all));
    test_x.push_back(design(test, Eigen::all));
    train_y.push_back(targets(train));
    test_y.push_back(targets(test));
  }

  const auto n_cells = static_cast<std::ptrdiff_t>(result.cells.size());
#pragma omp parallel for schedule(dynamic) num_threads(kernels::thread_count())
  for (std::ptrdiff_t c = 0; c < n_cells; ++c) {
    TuningCell& cell = result.cells[static_cast<std::size_t>(c)];
    double total = 0.0;
    try {
      for (int k = 0; k < grid.inner_folds; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        const QuantileSolution sol = solve_pinball_regression(
            train_x[ks], train_y[ks], alpha, cell.lambda, options);
        total += regularized_pinball_objective(test_x[ks], test_y[ks],
                                               sol.coefficients, alpha, 0.0) /
                 static_cast<double>(test_y[ks].size());
      }
      cell.score = total / grid.inner_folds;
      if (!std::isfinite(cell.score)) cell.score = kInf;
    } catch (const Error&) {
      cell.score = kInf;
    }
  }
  result.selected = select_cell(result.cells);
  return result;
}

}  // namespace wcrisk
