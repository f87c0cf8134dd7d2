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

#include "wcrisk/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wcrisk/error.hpp"
#include "wcrisk/rng.hpp"

namespace wcrisk {
namespace {

void add_warning(std::vector<std::string>& out, const std::string& w) {
  if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
}

void check_frame(const EvaluationFrame& frame) {
  const std::size_t n = frame.n();
  const int k = frame.k_folds;
  if (k < 2) throw ConfigError("k_folds must be >= 2");
  if (frame.fold_id.size() != n) {
    throw DimensionMismatch("frame has " + std::to_string(n) + " rows but " +
                            std::to_string(frame.fold_id.size()) +
                            " fold labels");
  }
  if (n < 2 * static_cast<std::size_t>(k)) {
    throw InsufficientData("need at least 2 * k_folds = " +
                           std::to_string(2 * k) + " rows, got " +
                           std::to_string(n));
  }
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int f : frame.fold_id) {
    if (f < 0 || f >= k) throw ConfigError("fold label out of range");
    ++sizes[static_cast<std::size_t>(f)];
  }
  for (std::size_t s : sizes) {
    if (s == 0 || s == n) {
      throw InsufficientData("a cross-fitting fold or its complement is empty");
    }
  }
}

std::vector<Eigen::Index> rows_where(const std::vector<int>& fold_id, int k,
                                     bool in_fold) {
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < fold_id.size(); ++i) {
    if ((fold_id[i] == k) == in_fold) out.push_back(static_cast<Eigen::Index>(i));
  }
  return out;
}

FeatureBlock subset_rows(const FeatureBlock& block,
                         const std::vector<Eigen::Index>& rows) {
  FeatureBlock out;
  out.values = block.values(rows, Eigen::all);
  out.sources = block.sources;
  out.column_names = block.column_names;
  return out;
}

WorstCaseEstimate no_shift_estimate(const EvaluationFrame& frame,
                                    const EstimatorConfig& config) {
  const std::size_t n = frame.n();
  WorstCaseEstimate est;
  est.alpha = 0.0;
  est.ci_level = config.ci_level;
  est.epsilon_used = 0.0;
  est.r_hat = frame.losses.mean();
  est.h_indicators.assign(n, 1);
  est.psi_values = frame.losses.array() - est.r_hat;
  est.sigma2_hat = estimate_variance(est.psi_values);
  std::tie(est.ci_lower, est.ci_upper) =
      confidence_interval(est.r_hat, est.sigma2_hat, n, est.ci_level);
  return est;
}

}  // namespace

void EstimatorConfig::validate() const {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in [0, 1)");
  if (epsilon && (!(*epsilon >= 0.0) || !std::isfinite(*epsilon))) {
    throw ConfigError("epsilon must be a finite value >= 0");
  }
  if (!(ci_level > 0.0 && ci_level < 1.0)) {
    throw ConfigError("ci_level must be in (0, 1)");
  }
}

double resolve_epsilon(const EstimatorConfig& config,
                       const EvaluationFrame& frame) {
  if (config.epsilon) return *config.epsilon;
  for (const SourceEncoding& src : frame.w.sources) {
    if (src.type == ColumnType::kCategorical) return kDefaultDiscreteEpsilon;
    const Eigen::VectorXd col = frame.w.values.col(static_cast<Eigen::Index>(src.first));
    if ((col.array() == 0.0 || col.array() == 1.0).all()) {
      return kDefaultDiscreteEpsilon;
    }
  }
  return 0.0;
}

std::size_t WorstCaseEstimate::subsample_size() const {
  std::size_t s = 0;
  for (std::uint8_t h : h_indicators) s += h;
  return s;
}

double dual_objective(std::span<const double> mu, std::span<const double> eta,
                      std::span<const double> weights, double alpha) {
  if (mu.size() != eta.size() || mu.size() != weights.size()) {
    throw DimensionMismatch("dual objective: mu, eta and weights differ in length");
  }
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in [0, 1)");
  double total = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    total += weights[i] * (std::max(mu[i] - eta[i], 0.0) / (1.0 - alpha) + eta[i]);
  }
  return total;
}

double score_psi(double loss, double mu, double eta, double alpha, double r) {
  const double in = mu >= eta ? 1.0 : 0.0;
  return (std::max(mu - eta, 0.0) + in * (loss - mu)) / (1.0 - alpha) + eta - r;
}

double estimate_variance(const Eigen::VectorXd& psi) {
  if (psi.size() == 0) throw DimensionMismatch("variance of an empty score vector");
  return psi.squaredNorm() / static_cast<double>(psi.size());
}

double estimate_variance(const Eigen::VectorXd& psi,
                         std::span<const int> fold_id, int k_folds) {
  if (psi.size() == 0) throw DimensionMismatch("variance of an empty score vector");
  if (static_cast<std::size_t>(psi.size()) != fold_id.size()) {
    throw DimensionMismatch("variance: fold labels do not match scores");
  }
  std::vector<double> sum(static_cast<std::size_t>(k_folds), 0.0);
  std::vector<double> count(static_cast<std::size_t>(k_folds), 0.0);
  for (std::size_t i = 0; i < fold_id.size(); ++i) {
    const auto k = static_cast<std::size_t>(fold_id[i]);
    sum[k] += psi[static_cast<Eigen::Index>(i)] * psi[static_cast<Eigen::Index>(i)];
    count[k] += 1.0;
  }
  double total = 0.0;
  int used = 0;
  for (std::size_t k = 0; k < sum.size(); ++k) {
    if (count[k] == 0.0) continue;
    total += sum[k] / count[k];
    ++used;
  }
  return total / used;
}

std::pair<double, double> confidence_interval(double r_hat, double sigma2_hat,
                                              std::size_t n, double ci_level) {
  if (!(ci_level > 0.0 && ci_level < 1.0)) {
    throw ConfigError("ci_level must be in (0, 1)");
  }
  if (n == 0 || !(sigma2_hat >= 0.0)) {
    throw DomainError("confidence interval needs n >= 1 and sigma2 >= 0");
  }
  const double z = normal_quantile(1.0 - (1.0 - ci_level) / 2.0);
  const double half = z * std::sqrt(sigma2_hat / static_cast<double>(n));
  return {r_hat - half, r_hat + half};
}

Eigen::VectorXd draw_noise(std::size_t n, double epsilon, std::uint64_t seed) {
  if (epsilon == 0.0) return Eigen::VectorXd();
  Rng rng(derive_seed(seed, "noise"));
  Eigen::VectorXd u(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = epsilon * rng.uniform01();
  return u;
}

MeanStage fit_mean_stage(const EvaluationFrame& frame,
                         const LearnerFactory& learners, std::uint64_t seed) {
  check_frame(frame);
  const Eigen::MatrixXd wz = frame.wz();
  MeanStage stage;
  stage.mu_hat = Eigen::VectorXd::Zero(wz.rows());
  for (int k = 0; k < frame.k_folds; ++k) {
    const std::vector<Eigen::Index> train = rows_where(frame.fold_id, k, false);
    const std::vector<Eigen::Index> test = rows_where(frame.fold_id, k, true);
    std::unique_ptr<MeanLearner> learner =
        learners.make_mean(derive_seed(seed, "mean", static_cast<std::uint64_t>(k)));
    learner->fit(wz(train, Eigen::all), frame.losses(train));
    Eigen::VectorXd pred = learner->predict(wz);
    if (!pred.allFinite()) {
      throw NumericError("conditional-mean fit produced non-finite predictions");
    }
    stage.mu_hat(test) = pred(test);
    stage.fold_predictions.push_back(std::move(pred));
    stage.hyperparameters.push_back(learner->hyperparameters());
  }
  return stage;
}

WorstCaseEstimate estimate_worst_case(const EvaluationFrame& frame,
                                      const EstimatorConfig& config,
                                      const LearnerFactory& learners,
                                      const MeanStage& stage,
                                      const Eigen::VectorXd& noise) {
  config.validate();
  check_frame(frame);
  if (config.alpha == 0.0) return no_shift_estimate(frame, config);

  const double alpha = config.alpha;
  const double epsilon = resolve_epsilon(config, frame);
  const auto n = static_cast<Eigen::Index>(frame.n());
  if (epsilon > 0.0 && noise.size() != n) {
    throw DimensionMismatch("noise draws do not match the frame");
  }
  if (static_cast<int>(stage.fold_predictions.size()) != frame.k_folds) {
    throw DimensionMismatch("mean fits do not match the fold count");
  }

  WorstCaseEstimate est;
  est.alpha = alpha;
  est.ci_level = config.ci_level;
  est.epsilon_used = epsilon;
  est.mu_hat = stage.mu_hat;
  est.eta_hat = Eigen::VectorXd::Zero(n);
  est.psi_values = Eigen::VectorXd::Zero(n);
  est.h_indicators.assign(static_cast<std::size_t>(n), 0);
  if (epsilon > 0.0) est.noise = noise;
  est.mean_hyperparameters = stage.hyperparameters;
  est.warnings = stage.warnings;
  if (epsilon == 0.0 && frame.w_all_discrete()) {
    add_warning(est.warnings,
                "DiscreteW: every W column is discrete and epsilon = 0; the "
                "conditional quantile of mu may be ill-defined");
  }

  double fold_mean_sum = 0.0;
  for (int k = 0; k < frame.k_folds; ++k) {
    const std::vector<Eigen::Index> train = rows_where(frame.fold_id, k, false);
    const std::vector<Eigen::Index> test = rows_where(frame.fold_id, k, true);
    const Eigen::VectorXd& mu_k = stage.fold_predictions[static_cast<std::size_t>(k)];

    Eigen::VectorXd targets = mu_k(train);
    if (epsilon > 0.0) {
      targets += noise(train);
    } else if (targets.maxCoeff() == targets.minCoeff()) {
      add_warning(est.warnings, "DegenerateQuantile: fold " + std::to_string(k) +
                                    " has a constant mean fit and epsilon = 0");
    }
    std::unique_ptr<QuantileLearner> learner = learners.make_quantile(
        derive_seed(config.seed, "quantile", static_cast<std::uint64_t>(k)));
    learner->fit(subset_rows(frame.z, train), targets, alpha);
    const Eigen::VectorXd eta =
        learner->predict(frame.z.values(test, Eigen::all));
    if (eta.size() != static_cast<Eigen::Index>(test.size()) || !eta.allFinite()) {
      throw NumericError("quantile fit produced invalid predictions");
    }
    est.quantile_hyperparameters.push_back(learner->hyperparameters());
    for (const std::string& w : learner->warnings()) add_warning(est.warnings, w);

    double fold_sum = 0.0;
    for (std::size_t j = 0; j < test.size(); ++j) {
      const Eigen::Index i = test[j];
      const double m = est.mu_hat[i] + (epsilon > 0.0 ? noise[i] : 0.0);
      const bool in = m >= eta[static_cast<Eigen::Index>(j)];
      const double e = eta[static_cast<Eigen::Index>(j)];
      // Noise enters the ramp and the indicator; the residual is loss - mu.
      const double phi =
          (std::max(m - e, 0.0) + (in ? frame.losses[i] - est.mu_hat[i] : 0.0)) /
              (1.0 - alpha) +
          e;
      est.eta_hat[i] = e;
      est.h_indicators[static_cast<std::size_t>(i)] = in ? 1 : 0;
      est.psi_values[i] = phi;
      fold_sum += phi;
    }
    fold_mean_sum += fold_sum / static_cast<double>(test.size());
  }
  est.r_hat = fold_mean_sum / frame.k_folds;
  if (!std::isfinite(est.r_hat)) throw NumericError("non-finite risk estimate");
  est.psi_values.array() -= est.r_hat;
  est.sigma2_hat = estimate_variance(est.psi_values, frame.fold_id, frame.k_folds);
  std::tie(est.ci_lower, est.ci_upper) =
      confidence_interval(est.r_hat, est.sigma2_hat, frame.n(), est.ci_level);
  return est;
}

WorstCaseEstimate estimate_worst_case(const EvaluationFrame& frame,
                                      const EstimatorConfig& config,
                                      const LearnerFactory& learners) {
  config.validate();
  check_frame(frame);
  if (config.alpha == 0.0) return no_shift_estimate(frame, config);
  const MeanStage stage = fit_mean_stage(frame, learners, config.seed);
  const Eigen::VectorXd noise =
      draw_noise(frame.n(), resolve_epsilon(config, frame), config.seed);
  return estimate_worst_case(frame, config, learners, stage, noise);
}

std::vector<WorstCaseEstimate> risk_curve(const EvaluationFrame& frame,
                                          std::span<const double> alpha_grid,
                                          const EstimatorConfig& config,
                                          const LearnerFactory& learners) {
  if (alpha_grid.empty()) throw ConfigError("alpha_grid is empty");
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    if (!(alpha_grid[i] >= 0.0 && alpha_grid[i] < 1.0)) {
      throw ConfigError("alpha_grid values must be in [0, 1)");
    }
    if (i > 0 && !(alpha_grid[i] > alpha_grid[i - 1])) {
      throw ConfigError("alpha_grid must be strictly increasing");
    }
  }
  check_frame(frame);
  EstimatorConfig cfg = config;
  cfg.alpha = alpha_grid.back();
  cfg.validate();

  const bool needs_fits = alpha_grid.back() > 0.0;
  MeanStage stage;
  Eigen::VectorXd noise;
  if (needs_fits) {
    stage = fit_mean_stage(frame, learners, config.seed);
    noise = draw_noise(frame.n(), resolve_epsilon(config, frame), config.seed);
  }
  std::vector<WorstCaseEstimate> out;
  for (double alpha : alpha_grid) {
    cfg.alpha = alpha;
    out.push_back(estimate_worst_case(frame, cfg, learners, stage, noise));
  }
  return out;
}

}  // namespace wcrisk
