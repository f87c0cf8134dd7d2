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

#include "wcrisk/quantile_regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "wcrisk/error.hpp"

namespace wcrisk {
namespace {

using kernels::PinballGroups;
using kernels::RowMatrix;

constexpr int kStageIterations = 200;

double penalty(const Eigen::VectorXd& beta, double lambda) {
  if (beta.size() <= 1 || lambda == 0.0) return 0.0;
  return lambda * beta.tail(beta.size() - 1).squaredNorm();
}

double exact_objective(const PinballGroups& groups, const Eigen::VectorXd& beta,
                       double alpha, double lambda) {
  return kernels::parallel::pinball_pass(groups, beta, alpha, 0.0, false)
             .objective +
         penalty(beta, lambda);
}

// One-sided derivatives of F_g at c.
struct Slopes {
  double left = 0.0;
  double right = 0.0;
};

Slopes group_slopes(const PinballGroups& groups, Eigen::Index g, double c,
                    double alpha) {
  const auto off = groups.offsets[static_cast<std::size_t>(g)];
  const Eigen::Index n = groups.size(g);
  const double* ys = groups.targets.data() + off;
  const double cs = c - groups.center[g];
  const double below = static_cast<double>(std::lower_bound(ys, ys + n, cs) - ys);
  const double upto = static_cast<double>(std::upper_bound(ys, ys + n, cs) - ys);
  const double equal = upto - below;
  const double above = static_cast<double>(n) - upto;
  return {(1.0 - alpha) * below - alpha * (above + equal),
          (1.0 - alpha) * (below + equal) - alpha * above};
}

// Target of group g nearest to c, unshifted.
double nearest_target(const PinballGroups& groups, Eigen::Index g, double c) {
  const auto off = groups.offsets[static_cast<std::size_t>(g)];
  const Eigen::Index n = groups.size(g);
  const double* ys = groups.targets.data() + off;
  const double cs = c - groups.center[g];
  const Eigen::Index k = std::lower_bound(ys, ys + n, cs) - ys;
  double best = k < n ? ys[k] : ys[n - 1];
  if (k > 0 && std::fabs(ys[k - 1] - cs) < std::fabs(best - cs)) best = ys[k - 1];
  return best + groups.center[g];
}

Eigen::VectorXd fitted_values(const PinballGroups& groups,
                              const Eigen::VectorXd& beta) {
  return groups.design * beta;
}

// Solves the KKT system with the groups within `tol` of a kink held on that
// kink, and the rest kept at their current (linear) slopes.
bool polish(const PinballGroups& groups, double alpha, double lambda,
            double tol, Eigen::VectorXd& beta, double& objective) {
  const Eigen::Index p = groups.design.cols();
  const Eigen::VectorXd c = fitted_values(groups, beta);
  std::vector<Eigen::Index> tight;
  std::vector<double> kink;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p);
  for (Eigen::Index g = 0; g < groups.groups(); ++g) {
    const double y = nearest_target(groups, g, c[g]);
    if (std::fabs(y - c[g]) <= tol) {
      tight.push_back(g);
      kink.push_back(y);
    } else {
      rhs -= groups.design.row(g).transpose() *
             group_slopes(groups, g, c[g], alpha).right;
    }
  }
  const Eigen::Index t = static_cast<Eigen::Index>(tight.size());
  if (t == 0 || p + t > 2000) return false;

  // Unknowns: step in beta, then one multiplier per tight group.
  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(p + t, p + t);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p + t);
  for (Eigen::Index k = 1; k < p; ++k) system(k, k) = 2.0 * lambda;
  b.head(p) = rhs;
  for (Eigen::Index k = 1; k < p; ++k) b[k] -= 2.0 * lambda * beta[k];
  for (Eigen::Index j = 0; j < t; ++j) {
    const auto row = groups.design.row(tight[static_cast<std::size_t>(j)]);
    system.block(0, p + j, p, 1) = row.transpose();
    system.block(p + j, 0, 1, p) = row;
    b[p + j] = kink[static_cast<std::size_t>(j)] - c[tight[static_cast<std::size_t>(j)]];
  }
  const Eigen::VectorXd sol = system.completeOrthogonalDecomposition().solve(b);
  if (!sol.allFinite()) return false;
  const Eigen::VectorXd candidate = beta + sol.head(p);
  const double value = exact_objective(groups, candidate, alpha, lambda);
  if (!(value <= objective)) return false;
  beta = candidate;
  objective = value;
  return true;
}

// Moves the intercept to the left end of a flat optimal segment.
void intercept_tie_break(const PinballGroups& groups, double alpha,
                         double lambda, Eigen::VectorXd& beta,
                         double& objective, double n) {
  const Eigen::VectorXd c = fitted_values(groups, beta);
  double left = 0.0;
  for (Eigen::Index g = 0; g < groups.groups(); ++g) {
    left += group_slopes(groups, g, c[g], alpha).left;
  }
  if (std::fabs(left) > 1e-9 * n) return;

  double down = std::numeric_limits<double>::infinity();
  double up = std::numeric_limits<double>::infinity();
  for (Eigen::Index g = 0; g < groups.groups(); ++g) {
    const auto off = groups.offsets[static_cast<std::size_t>(g)];
    const Eigen::Index size = groups.size(g);
    const double* ys = groups.targets.data() + off;
    const double cs = c[g] - groups.center[g];
    const Eigen::Index k = std::lower_bound(ys, ys + size, cs) - ys;
    if (k > 0) down = std::min(down, cs - ys[k - 1]);
    if (k < size) up = std::min(up, ys[k] - cs);
  }
  Eigen::VectorXd candidate = beta;
  if (std::isfinite(down)) {
    candidate[0] -= down;
  } else if (std::isfinite(up)) {
    candidate[0] += up;
  } else {
    return;
  }
  const double value = exact_objective(groups, candidate, alpha, lambda);
  if (value <= objective + 1e-12 * (1.0 + std::fabs(objective))) {
    beta = candidate;
    objective = std::min(objective, value);
  }
}

void check_inputs(const RowMatrix& design, const Eigen::VectorXd& targets,
                  double alpha, double lambda) {
  if (design.rows() != targets.size()) {
    throw DimensionMismatch("quantile regression: " +
                            std::to_string(design.rows()) +
                            " design rows but " +
                            std::to_string(targets.size()) + " targets");
  }
  if (design.rows() < 1 || design.cols() < 1) {
    throw DimensionMismatch("quantile regression: empty design");
  }
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw ConfigError("quantile level must be in [0, 1)");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("quantile regression: lambda must be non-negative");
  }
  if (!design.allFinite() || !targets.allFinite()) {
    throw DomainError("quantile regression: non-finite input");
  }
}

}  // namespace

double pinball_loss(double u, double alpha) {
  return u * (alpha - (u < 0.0 ? 1.0 : 0.0));
}

double regularized_pinball_objective(const RowMatrix& design,
                                     const Eigen::VectorXd& targets,
                                     const Eigen::VectorXd& beta, double alpha,
                                     double lambda) {
  const Eigen::VectorXd fitted = design * beta;
  double total = 0.0;
  for (Eigen::Index i = 0; i < targets.size(); ++i) {
    total += pinball_loss(targets[i] - fitted[i], alpha);
  }
  return total + penalty(beta, lambda);
}

double empirical_lower_quantile(std::span<const double> values, double alpha) {
  if (values.empty()) throw DimensionMismatch("quantile of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  const double n = static_cast<double>(sorted.size());
  // Guard against alpha * n landing a rounding error above an integer.
  const double rank = std::ceil(alpha * n - 1e-12 * n);
  const auto k = static_cast<std::size_t>(std::max(1.0, rank)) - 1;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k),
                   sorted.end());
  return sorted[k];
}

QuantileSolution solve_pinball_regression(const RowMatrix& design,
                                          const Eigen::VectorXd& targets,
                                          double alpha, double lambda,
                                          const QuantileSolverOptions& options) {
  check_inputs(design, targets, alpha, lambda);
  const Eigen::Index p = design.cols();
  const double n = static_cast<double>(targets.size());
  const PinballGroups groups = kernels::group_pinball_targets(design, targets);

  QuantileSolution out;
  out.coefficients = Eigen::VectorXd::Zero(p);

  // One distinct design row: only c = d . beta matters, and the cheapest
  // beta reaching it puts everything on the intercept.
  if (groups.groups() == 1 && design(0, 0) != 0.0) {
    std::vector<double> ys(targets.data(), targets.data() + targets.size());
    out.coefficients[0] = empirical_lower_quantile(ys, alpha) / design(0, 0);
    out.objective = exact_objective(groups, out.coefficients, alpha, lambda);
    return out;
  }

  const double spread = targets.maxCoeff() - targets.minCoeff();
  const bool has_intercept = (design.col(0).array() == 1.0).all();

  // Start from a lightly ridged least-squares fit.
  {
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd moment = Eigen::VectorXd::Zero(p);
    for (Eigen::Index g = 0; g < groups.groups(); ++g) {
      const double count = static_cast<double>(groups.size(g));
      const Eigen::Index end = groups.offsets[static_cast<std::size_t>(g)] + g + groups.size(g);
      const double sum = groups.prefix[end] + count * groups.center[g];
      const auto d = groups.design.row(g).transpose();
      gram.noalias() += count * d * d.transpose();
      moment += sum * d;
    }
    const double ridge = 1e-8 * (gram.diagonal().mean() + 1.0);
    gram.diagonal().array() += ridge;
    for (Eigen::Index k = 1; k < p; ++k) gram(k, k) += 2.0 * lambda;
    out.coefficients = gram.ldlt().solve(moment);
    if (!out.coefficients.allFinite()) out.coefficients.setZero();
  }

  Eigen::VectorXd& beta = out.coefficients;
  Eigen::MatrixXd pen = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index k = 1; k < p; ++k) pen(k, k) = 2.0 * lambda;

  if (spread > 0.0) {
    const double h_min = 1e-12 * spread;
    double h = 0.25 * spread;
    double damping = 1e-10;
    while (true) {
      for (int it = 0; it < kStageIterations; ++it) {
        if (out.iterations >= options.max_iterations) {
          out.converged = false;
          break;
        }
        const kernels::PinballPass pass =
            kernels::parallel::pinball_pass(groups, beta, alpha, h, true);
        const double obj = pass.objective + penalty(beta, lambda);
        const Eigen::VectorXd grad = pass.gradient + pen * beta;
        Eigen::MatrixXd hess = pass.hessian + pen;
        const double scale = std::max(hess.diagonal().maxCoeff(), n / spread);
        hess.diagonal().array() += damping * scale;
        const Eigen::VectorXd dir = -hess.ldlt().solve(grad);
        const double decrement = -grad.dot(dir);
        ++out.iterations;
        if (!dir.allFinite() || !(decrement > 1e-15 * (1.0 + std::fabs(obj)))) {
          break;
        }
        double t = 1.0;
        bool accepted = false;
        for (int k = 0; k < 60; ++k) {
          const Eigen::VectorXd trial = beta + t * dir;
          const double value =
              kernels::parallel::pinball_pass(groups, trial, alpha, h, false)
                  .objective +
              penalty(trial, lambda);
          if (value <= obj - 1e-4 * t * decrement) {
            beta = trial;
            accepted = true;
            break;
          }
          t *= 0.5;
        }
        if (!accepted) break;
        damping = t == 1.0 ? std::max(damping * 0.1, 1e-14)
                           : std::min(damping * 10.0, 1e6);
      }
      if (!out.converged || h <= h_min) break;
      h = std::max(h * 0.1, h_min);
    }
  }

  double objective = exact_objective(groups, beta, alpha, lambda);
  const double tol_scale = std::max(spread, 1e-300);
  for (double tol : {1e-10, 1e-8, 1e-6}) {
    polish(groups, alpha, lambda, tol * tol_scale, beta, objective);
  }
  if (has_intercept) intercept_tie_break(groups, alpha, lambda, beta, objective, n);
  out.objective = objective;
  return out;
}

QuantileModel fit_quantile_regression(const SplineBasis& basis,
                                      const Eigen::MatrixXd& z,
                                      const Eigen::VectorXd& targets,
                                      double alpha, double lambda,
                                      const QuantileSolverOptions& options) {
  const RowMatrix design = basis.expand(z);
  QuantileSolution sol =
      solve_pinball_regression(design, targets, alpha, lambda, options);
  QuantileModel model;
  model.coefficients = std::move(sol.coefficients);
  model.quantile_level = alpha;
  model.ridge_lambda = lambda;
  model.basis = basis;
  model.converged = sol.converged;
  model.iterations = sol.iterations;
  return model;
}

QuantileModel fit_quantile_regression(const FeatureBlock& z,
                                      const Eigen::VectorXd& targets,
                                      double alpha, double lambda,
                                      const SplineBasisConfig& config,
                                      const QuantileSolverOptions& options) {
  return fit_quantile_regression(SplineBasis::fit(z, config), z.values, targets,
                                 alpha, lambda, options);
}

Eigen::VectorXd predict_quantile(const QuantileModel& model,
                                 const Eigen::MatrixXd& z) {
  if (z.rows() == 0) return Eigen::VectorXd();
  return model.basis.expand(z) * model.coefficients;
}

}  // namespace wcrisk
