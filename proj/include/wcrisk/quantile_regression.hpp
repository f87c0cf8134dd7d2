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

#ifndef WCRISK_QUANTILE_REGRESSION_HPP_
#define WCRISK_QUANTILE_REGRESSION_HPP_

#include <Eigen/Dense>
#include <span>

#include "wcrisk/frame.hpp"
#include "wcrisk/kernels.hpp"
#include "wcrisk/spline_basis.hpp"

namespace wcrisk {

struct QuantileSolverOptions {
  int max_iterations = 10000;  // Newton steps over all smoothing stages
};

// Minimizer of sum_i rho_alpha(y_i - d_i . beta) + lambda ||beta_{1..}||^2,
// where column 0 of the design is the unpenalized intercept.
//
// The solver minimizes a Huber-smoothed pinball loss with damped Newton steps
// while shrinking the smoothing width, then snaps to the exact piecewise-linear
// optimum by solving the KKT system on the rows that sit on a kink. When the
// optimum is flat along the intercept, the smallest optimal intercept is
// returned; if that direction is unbounded below (alpha = 0), the largest
// intercept at which the objective is still minimal is used instead, which for
// an intercept-only fit is min(y).
struct QuantileSolution {
  Eigen::VectorXd coefficients;
  double objective = 0.0;  // exact regularized objective at `coefficients`
  int iterations = 0;
  bool converged = true;  // false when max_iterations was hit
};

// Throws DimensionMismatch on shape errors and ConfigError on alpha outside
// [0, 1) or a negative lambda.
QuantileSolution solve_pinball_regression(const kernels::RowMatrix& design,
                                          const Eigen::VectorXd& targets,
                                          double alpha, double lambda,
                                          const QuantileSolverOptions& options = {});

double pinball_loss(double u, double alpha);

// Exact regularized objective, evaluated row by row.
double regularized_pinball_objective(const kernels::RowMatrix& design,
                                     const Eigen::VectorXd& targets,
                                     const Eigen::VectorXd& beta, double alpha,
                                     double lambda);

// Smallest order statistic q with #{y <= q} >= alpha n (q = min(y) at alpha 0).
double empirical_lower_quantile(std::span<const double> values, double alpha);

struct QuantileModel {
  Eigen::VectorXd coefficients;  // over basis.column_names()
  double quantile_level = 0.5;
  double ridge_lambda = 0.0;
  SplineBasis basis;
  bool converged = true;
  int iterations = 0;
};

// Expands `z` with a spline basis fitted on `z` itself, then solves.
QuantileModel fit_quantile_regression(const FeatureBlock& z,
                                      const Eigen::VectorXd& targets,
                                      double alpha, double lambda,
                                      const SplineBasisConfig& config,
                                      const QuantileSolverOptions& options = {});

// Same, with an already fitted basis (the tuning loop shares one).
QuantileModel fit_quantile_regression(const SplineBasis& basis,
                                      const Eigen::MatrixXd& z,
                                      const Eigen::VectorXd& targets,
                                      double alpha, double lambda,
                                      const QuantileSolverOptions& options = {});

// Throws DimensionMismatch when `z` does not have the basis input width.
Eigen::VectorXd predict_quantile(const QuantileModel& model,
                                 const Eigen::MatrixXd& z);

}  // namespace wcrisk

#endif  // WCRISK_QUANTILE_REGRESSION_HPP_
