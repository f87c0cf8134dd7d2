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

// Cross-fitted, debiased estimate of the worst-case risk
//   R_alpha = sup_h E[h mu(W, Z)] / (1 - alpha)  s.t.  E[h | Z] = 1 - alpha,
// through its dual E[(mu - eta)_+ / (1 - alpha) + eta], with eta the
// conditional alpha-quantile of mu given Z.

#ifndef WCRISK_ESTIMATOR_HPP_
#define WCRISK_ESTIMATOR_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wcrisk/frame.hpp"
#include "wcrisk/learners.hpp"

namespace wcrisk {

inline constexpr double kDefaultDiscreteEpsilon = 1e-5;

struct EstimatorConfig {
  double alpha = 0.5;
  // Unset: kDefaultDiscreteEpsilon when any W column is discrete, else 0.
  std::optional<double> epsilon;
  double ci_level = 0.95;
  std::uint64_t seed = 0;  // learner seeds and the noise stream

  void validate() const;  // throws ConfigError
};

double resolve_epsilon(const EstimatorConfig& config,
                       const EvaluationFrame& frame);

struct WorstCaseEstimate {
  double alpha = 0.0;
  double r_hat = 0.0;
  double sigma2_hat = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double ci_level = 0.95;
  double epsilon_used = 0.0;
  std::vector<std::uint8_t> h_indicators;
  Eigen::VectorXd mu_hat;  // empty at alpha = 0 (no nuisance fits)
  Eigen::VectorXd eta_hat;
  Eigen::VectorXd noise;   // u_i; empty when epsilon = 0
  Eigen::VectorXd psi_values;
  std::vector<Hyperparameters> mean_hyperparameters;      // per fold
  std::vector<Hyperparameters> quantile_hyperparameters;  // per fold
  std::vector<std::string> warnings;

  std::size_t subsample_size() const;
};

// sum_i w_i [(mu_i - eta_i)_+ / (1 - alpha) + eta_i]
double dual_objective(std::span<const double> mu, std::span<const double> eta,
                      std::span<const double> weights, double alpha);

// [(mu - eta)_+ + [mu >= eta] (loss - mu)] / (1 - alpha) + eta - r
double score_psi(double loss, double mu, double eta, double alpha, double r);

// Mean of psi^2. With fold labels, the average over folds of the per-fold
// means.
double estimate_variance(const Eigen::VectorXd& psi);
double estimate_variance(const Eigen::VectorXd& psi, std::span<const int> fold_id,
                         int k_folds);

std::pair<double, double> confidence_interval(double r_hat, double sigma2_hat,
                                              std::size_t n, double ci_level);

// Out-of-fold conditional-mean fits, shared by every alpha of a curve.
struct MeanStage {
  std::vector<Eigen::VectorXd> fold_predictions;  // mu_k on all N rows
  Eigen::VectorXd mu_hat;                         // in-fold predictions
  std::vector<Hyperparameters> hyperparameters;
  std::vector<std::string> warnings;
};

MeanStage fit_mean_stage(const EvaluationFrame& frame,
                         const LearnerFactory& learners, std::uint64_t seed);

// u_i ~ Unif(0, epsilon) from a stream independent of the folds.
Eigen::VectorXd draw_noise(std::size_t n, double epsilon, std::uint64_t seed);

WorstCaseEstimate estimate_worst_case(const EvaluationFrame& frame,
                                      const EstimatorConfig& config,
                                      const LearnerFactory& learners);

// Same, reusing mean fits and noise (for curves).
WorstCaseEstimate estimate_worst_case(const EvaluationFrame& frame,
                                      const EstimatorConfig& config,
                                      const LearnerFactory& learners,
                                      const MeanStage& stage,
                                      const Eigen::VectorXd& noise);

// One estimate per alpha; alpha_grid must be strictly increasing in [0, 1).
// config.alpha is ignored.
std::vector<WorstCaseEstimate> risk_curve(const EvaluationFrame& frame,
                                          std::span<const double> alpha_grid,
                                          const EstimatorConfig& config,
                                          const LearnerFactory& learners);

}  // namespace wcrisk

#endif  // WCRISK_ESTIMATOR_HPP_
