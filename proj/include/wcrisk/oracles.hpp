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

// Exact worst-case risk on finite (W, Z) supports, and the synthetic data
// generators the estimator is checked against.

#ifndef WCRISK_ORACLES_HPP_
#define WCRISK_ORACLES_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wcrisk/dataset.hpp"
#include "wcrisk/frame.hpp"
#include "wcrisk/learners.hpp"

namespace wcrisk {

enum class LossNoise {
  kAuto,       // Bernoulli(mu) when every mu is in [0, 1], else Normal
  kBernoulli,
  kNormal,     // Normal(mu, normal_sd)
  kPointMass,  // loss = mu
};

// Cells are indexed (w, z); an instance without Z has one implicit stratum
// and an empty z_levels.
struct DiscreteInstance {
  std::string name;
  std::vector<std::int64_t> w_levels;
  std::vector<std::int64_t> z_levels;
  Eigen::MatrixXd pmf;  // |W| x strata, sums to 1
  Eigen::MatrixXd mu;   // |W| x strata
  LossNoise loss_noise = LossNoise::kAuto;
  double normal_sd = 0.1;

  bool has_z() const { return !z_levels.empty(); }
  Eigen::Index strata() const { return has_z() ? static_cast<Eigen::Index>(z_levels.size()) : 1; }
  Eigen::VectorXd z_marginal() const { return pmf.colwise().sum().transpose(); }

  // Throws ConfigError on shape errors, a pmf that is negative or does not
  // sum to 1 within 1e-12, or a stratum with no mass.
  void validate() const;
};

// Fractional membership h(w, z) of the exact worst (1 - alpha)-subsample:
// per stratum, cells by descending mu until conditional mass 1 - alpha, the
// boundary cell taken fractionally. Ties in mu are filled in w order.
Eigen::MatrixXd exact_selection(const DiscreteInstance& instance, double alpha);

double exact_worst_case_discrete(const DiscreteInstance& instance, double alpha);

struct DualCheck {
  double primal = 0.0;
  double dual = 0.0;
};

// Dual value from a per-stratum minimization over eta at the breakpoints.
DualCheck exact_dual_check(const DiscreteInstance& instance, double alpha);

// Per-stratum threshold t(z) with P(mu + U >= t | z) = 1 - alpha for
// U ~ Unif(0, epsilon); at epsilon = 0 the lower conditional alpha-quantile
// of mu. These are the population eta values.
Eigen::VectorXd exact_thresholds(const DiscreteInstance& instance, double alpha,
                                 double epsilon);

// Worst-case risk of mu + U, computed by integrating each cell's uniform
// block [mu, mu + epsilon] above the stratum threshold.
double exact_noisy_worst_case(const DiscreteInstance& instance, double alpha,
                              double epsilon);

// The same instance with Z folded into W (one stratum), i.e. the shift
// without the per-stratum constraint.
DiscreteInstance unconstrained(const DiscreteInstance& instance);

// Random instance with at most max_cells joint levels (W and Z each at least
// 2 levels unless the budget forbids) and mu uniform on [0, 1].
DiscreteInstance random_instance(std::uint64_t seed, int max_cells = 12,
                                 bool with_z = true);

std::vector<std::string> bundled_instance_names();
// Throws ConfigError for unknown names.
DiscreteInstance bundled_instance(std::string_view name);

// Columns w, z (categorical; z omitted without Z) and loss.
TabularDataset sample_discrete_instance(const DiscreteInstance& instance,
                                        std::size_t n, std::uint64_t seed);

// Learners returning the instance's true mu and population thresholds. They
// read the w and z columns of `frame` (one-hot or code-valued).
LearnerFactory oracle_learners(const DiscreteInstance& instance,
                               const EvaluationFrame& frame, double epsilon);

// exp(rho) = 1 / (1 - alpha)
double rho_from_alpha(double alpha);
double alpha_from_rho(double rho);

struct ToySineConfig {
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  // logistic(b0 + b1 x1 + b2 x2)
  double b0 = 0.0;
  double b1 = 1.0;
  double b2 = 0.0;
};

// [x1 > sin(2 x2)]
std::int64_t toy_sine_label(double x1, double x2);

// x1, x2 ~ N(0, 1), y = [x1 > sin(2 x2)], prediction from the logistic
// classifier, loss = binary cross-entropy (clamped at 1e-12).
TabularDataset generate_toy_sine(const ToySineConfig& config);

// Toy data scored by a logistic classifier fitted on an independent draw of
// the same size (seed stream "toy_sine_train").
TabularDataset generate_toy_sine_fitted(std::size_t n, std::uint64_t seed);

// Unpenalized logistic regression by Newton (IRLS); returns (b0, b1, ...).
Eigen::VectorXd fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             int max_iterations = 100);

}  // namespace wcrisk

#endif  // WCRISK_ORACLES_HPP_
