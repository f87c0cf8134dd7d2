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
#include <memory>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "support.hpp"
#include "wcrisk/error.hpp"
#include "wcrisk/estimator.hpp"
#include "wcrisk/kernels.hpp"
#include "wcrisk/oracles.hpp"
#include "wcrisk/rng.hpp"

namespace wcrisk {
namespace {

using testing_support::discrete_frame;

// mu(w, z) = first W column; eta = a fixed value.
class FirstColumnMean : public MeanLearner {
 public:
  void fit(const Eigen::MatrixXd&, const Eigen::VectorXd&) override {}
  Eigen::VectorXd predict(const Eigen::MatrixXd& wz) const override { return wz.col(0); }
};

class FixedQuantile : public QuantileLearner {
 public:
  explicit FixedQuantile(double eta) : eta_(eta) {}
  void fit(const FeatureBlock&, const Eigen::VectorXd&, double) override {}
  Eigen::VectorXd predict(const Eigen::MatrixXd& z) const override {
    return Eigen::VectorXd::Constant(z.rows(), eta_);
  }

 private:
  double eta_;
};

LearnerFactory fixed_learners(double eta) {
  return {[](std::uint64_t) { return std::make_unique<FirstColumnMean>(); },
          [eta](std::uint64_t) { return std::make_unique<FixedQuantile>(eta); }};
}

// Frame with W = one numeric column equal to `w`, no Z.
EvaluationFrame numeric_frame(const std::vector<double>& losses, const std::vector<double>& w,
                              int k) {
  EvaluationFrame f;
  const auto n = static_cast<Eigen::Index>(losses.size());
  f.losses = Eigen::Map<const Eigen::VectorXd>(losses.data(), n);
  f.w.values = Eigen::Map<const Eigen::VectorXd>(w.data(), n);
  f.w.sources = {SourceEncoding{"w", ColumnType::kNumeric, 0, 1, {}}};
  f.w.column_names = {"w"};
  f.z.values.resize(n, 0);
  f.k_folds = k;
  for (Eigen::Index i = 0; i < n; ++i) {
    f.fold_id.push_back(static_cast<int>(i % k));
    f.row_ids.push_back(static_cast<std::size_t>(i));
  }
  return f;
}

TEST(DualObjective, Examples) {
  const std::vector<double> mu = {0.2, 0.8}, eta = {0.2, 0.2}, w = {0.5, 0.5};
  EXPECT_NEAR(dual_objective(mu, eta, w, 0.5), 0.8, 1e-15);
  const std::vector<double> mu3 = {0.3, 0.1, 0.7}, lo = {0.1, 0.1, 0.1};
  const std::vector<double> w3 = {0.2, 0.5, 0.3};
  EXPECT_NEAR(dual_objective(mu3, lo, w3, 0.0), 0.2 * 0.3 + 0.5 * 0.1 + 0.3 * 0.7, 1e-15);
  const std::vector<double> c = {0.4, 0.4, 0.4};
  for (double a : {0.0, 0.3, 0.9}) EXPECT_NEAR(dual_objective(c, c, w3, a), 0.4, 1e-15);
  EXPECT_THROW(dual_objective(mu, lo, w, 0.5), DimensionMismatch);
}

TEST(ScorePsi, Examples) {
  EXPECT_EQ(score_psi(0.3, 0.3, 0.3, 0.7, 0.3), 0.0);
  EXPECT_NEAR(score_psi(1.0, 0.6, 0.4, 0.5, 0.0), 1.6, 1e-15);
  for (double loss : {0.0, 1.0, 17.0}) {
    EXPECT_EQ(score_psi(loss, 0.2, 0.5, 0.3, 0.1), 0.5 - 0.1);
  }
}

TEST(Variance, Examples) {
  EXPECT_EQ(estimate_variance(Eigen::VectorXd::Zero(5)), 0.0);
  EXPECT_EQ(estimate_variance(Eigen::Vector2d(1.0, -1.0)), 1.0);
  const Eigen::VectorXd psi = Eigen::Vector4d(0.5, -1.5, 2.0, 0.25);
  EXPECT_NEAR(estimate_variance(3.0 * psi), 9.0 * estimate_variance(psi), 1e-14);
  // Per-fold means averaged: fold 0 = {0.5, -1.5, 2.0}, fold 1 = {0.25}.
  const std::vector<int> fold = {0, 0, 0, 1};
  EXPECT_NEAR(estimate_variance(psi, fold, 2), 0.5 * (6.5 / 3 + 0.0625), 1e-15);
}

TEST(ConfidenceInterval, Examples) {
  const auto [lo0, hi0] = confidence_interval(1.5, 0.0, 100, 0.95);
  EXPECT_EQ(lo0, 1.5);
  EXPECT_EQ(hi0, 1.5);
  const auto [lo, hi] = confidence_interval(0.0, 1.0, 1, 0.95);
  EXPECT_NEAR(hi, 1.959964, 1e-6);
  EXPECT_NEAR(lo, -1.959964, 1e-6);
  const auto [lo99, hi99] = confidence_interval(0.0, 1.0, 1, 0.99);
  EXPECT_LT(lo99, lo);
  EXPECT_GT(hi99, hi);
}

TEST(Estimator, AlphaZeroIsPlainMean) {
  const EvaluationFrame f = numeric_frame({0, 1, 1, 0}, {0, 1, 2, 3}, 2);
  EstimatorConfig cfg;
  cfg.alpha = 0.0;
  const WorstCaseEstimate e = estimate_worst_case(f, cfg, fixed_learners(0.0));
  EXPECT_EQ(e.r_hat, 0.5);
  EXPECT_EQ(e.h_indicators, (std::vector<std::uint8_t>{1, 1, 1, 1}));
  EXPECT_EQ(e.sigma2_hat, 0.25);
  EXPECT_EQ(e.mu_hat.size(), 0);
  EXPECT_EQ(e.subsample_size(), 4u);
}

TEST(Estimator, PerfectNuisanceGivesEmpiricalCvar) {
  const std::vector<double> losses = {1, 2, 3, 4};
  const EvaluationFrame f = numeric_frame(losses, losses, 2);
  EstimatorConfig cfg;
  cfg.alpha = 0.5;
  cfg.epsilon = 0.0;
  // Lower 0.5-quantile of {1, 2, 3, 4}.
  const WorstCaseEstimate e = estimate_worst_case(f, cfg, fixed_learners(2.0));
  // Sort and average the top half.
  std::vector<double> s = losses;
  std::sort(s.rbegin(), s.rend());
  EXPECT_NEAR(e.r_hat, (s[0] + s[1]) / 2, 1e-15);
  EXPECT_NEAR(e.r_hat, 3.5, 1e-15);
}

TEST(Estimator, RowTermsFollowTheScore) {
  const EvaluationFrame f = testing_support::discrete_frame(
      bundled_instance("discrete_synthetic"), 2000, 17);
  EstimatorConfig cfg;
  cfg.alpha = 0.6;
  cfg.seed = 4;
  TuningGrid grid;
  grid.inner_folds = 3;
  const WorstCaseEstimate e = estimate_worst_case(f, cfg, reference_learners(grid, {}, {}));
  ASSERT_EQ(e.noise.size(), 2000);
  EXPECT_EQ(e.epsilon_used, kDefaultDiscreteEpsilon);
  std::vector<double> fold_mean(5, 0.0);
  std::vector<double> fold_n(5, 0.0);
  for (Eigen::Index i = 0; i < 2000; ++i) {
    const double m = e.mu_hat[i] + e.noise[i];
    ASSERT_GE(e.noise[i], 0.0);
    ASSERT_LT(e.noise[i], kDefaultDiscreteEpsilon);
    // Indicator and residual term agree.
    const bool in = m >= e.eta_hat[i];
    EXPECT_EQ(e.h_indicators[static_cast<std::size_t>(i)], in ? 1 : 0);
    const double phi = (std::max(m - e.eta_hat[i], 0.0) +
                        (in ? f.losses[i] - e.mu_hat[i] : 0.0)) / (1 - cfg.alpha) +
                       e.eta_hat[i];
    EXPECT_NEAR(e.psi_values[i], phi - e.r_hat, 1e-12);
    fold_mean[f.fold_id[i]] += e.psi_values[i];
    fold_n[f.fold_id[i]] += 1.0;
  }
  // R-hat is the root of the fold-averaged score equation.
  double avg = 0.0;
  for (int k = 0; k < 5; ++k) avg += fold_mean[k] / fold_n[k] / 5;
  EXPECT_LE(std::abs(avg), 1e-10);
  EXPECT_LE(std::abs(e.psi_values.mean()), 1e-10);  // equal fold sizes here
  EXPECT_LE(e.ci_lower, e.r_hat);
  EXPECT_GE(e.ci_upper, e.r_hat);
  EXPECT_GE(e.sigma2_hat, 0.0);
  EXPECT_EQ(e.mean_hyperparameters.size(), 5u);
  EXPECT_EQ(e.quantile_hyperparameters.size(), 5u);
}

TEST(Estimator, DiscreteWWithoutNoiseWarns) {
  const EvaluationFrame f = discrete_frame(bundled_instance("two_point"), 200, 3);
  EstimatorConfig cfg;
  cfg.alpha = 0.5;
  cfg.epsilon = 0.0;
  const WorstCaseEstimate e =
      estimate_worst_case(f, cfg, oracle_learners(bundled_instance("two_point"), f, 0.0));
  ASSERT_FALSE(e.warnings.empty());
  EXPECT_EQ(e.warnings[0].rfind("DiscreteW", 0), 0u);
}

TEST(Estimator, ConstantMeanFitWarns) {
  const std::vector<double> losses = {1, 0, 1, 0, 1, 0};
  const EvaluationFrame f = numeric_frame(losses, {2, 2, 2, 2, 2, 2}, 2);
  EstimatorConfig cfg;
  cfg.alpha = 0.5;
  cfg.epsilon = 0.0;
  const WorstCaseEstimate e = estimate_worst_case(f, cfg, fixed_learners(2.0));
  bool found = false;
  for (const std::string& w : e.warnings) found |= w.rfind("DegenerateQuantile", 0) == 0;
  EXPECT_TRUE(found);
}

TEST(Estimator, TooFewRows) {
  const EvaluationFrame f = numeric_frame({1, 2, 3}, {1, 2, 3}, 2);
  EstimatorConfig cfg;
  EXPECT_THROW(estimate_worst_case(f, cfg, fixed_learners(0.0)), InsufficientData);
}

TEST(Estimator, ConfigValidation) {
  EstimatorConfig cfg;
  cfg.alpha = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.alpha = 0.5;
  cfg.epsilon = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.epsilon = 0.0;
  cfg.ci_level = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Estimator, EpsilonDefaultsFollowW) {
  EstimatorConfig cfg;
  const EvaluationFrame discrete = discrete_frame(bundled_instance("two_point"), 50, 1);
  EXPECT_EQ(resolve_epsilon(cfg, discrete), kDefaultDiscreteEpsilon);
  const EvaluationFrame numeric = numeric_frame({1, 2, 3, 4}, {0.5, 1.5, 2.5, 3.5}, 2);
  EXPECT_EQ(resolve_epsilon(cfg, numeric), 0.0);
  cfg.epsilon = 0.25;
  EXPECT_EQ(resolve_epsilon(cfg, numeric), 0.25);
}

TEST(Estimator, NoiseStreamIsFixedBySeed) {
  const Eigen::VectorXd a = draw_noise(100, 1e-5, 9);
  EXPECT_EQ(a, draw_noise(100, 1e-5, 9));
  EXPECT_NE(a, draw_noise(100, 1e-5, 10));
  EXPECT_EQ(draw_noise(100, 0.0, 9).size(), 0);
  // Scaling epsilon rescales the same uniforms.
  EXPECT_LE((draw_noise(100, 2e-5, 9) - 2.0 * a).cwiseAbs().maxCoeff(), 1e-20);
}

TEST(Estimator, UnconstrainedSubsampleProportion) {
  // Continuous W, Z empty: the selected fraction sits near 1 - alpha.
  Rng rng(77);
  const int n = 4000;
  std::vector<double> w(n), losses(n);
  for (int i = 0; i < n; ++i) {
    w[i] = rng.uniform01();
    losses[i] = w[i] + 0.1 * rng.standard_normal();
  }
  const EvaluationFrame f = numeric_frame(losses, w, 5);
  TuningGrid grid;
  grid.kernel_gammas = {1.0};
  grid.kernel_lambdas = {1e-3};
  grid.quantile_lambdas = {1e-4};
  const std::vector<double> alphas = {0.25, 0.5, 0.9};
  const std::vector<WorstCaseEstimate> curve =
      risk_curve(f, alphas, EstimatorConfig{}, reference_learners(grid, {}, {}));
  for (const WorstCaseEstimate& e : curve) {
    const double frac = static_cast<double>(e.subsample_size()) / n;
    const double band = 4.0 * std::sqrt(e.alpha * (1 - e.alpha) / n) + 2.0 / n;
    EXPECT_NEAR(frac, 1 - e.alpha, band) << e.alpha;
    EXPECT_EQ(e.epsilon_used, 0.0);
  }
}

TEST(RiskCurve, ZeroOnlyGridSkipsFits) {
  const EvaluationFrame f = numeric_frame({0.2, 0.4, 0.9, 0.1}, {1, 2, 3, 4}, 2);
  int calls = 0;
  LearnerFactory counting = fixed_learners(0.0);
  counting.make_mean = [&calls](std::uint64_t) {
    ++calls;
    return std::make_unique<FirstColumnMean>();
  };
  const std::vector<double> grid = {0.0};
  const auto curve = risk_curve(f, grid, EstimatorConfig{}, counting);
  ASSERT_EQ(curve.size(), 1u);
  EXPECT_NEAR(curve[0].r_hat, 0.4, 1e-15);
  EXPECT_EQ(calls, 0);
}

TEST(RiskCurve, GridValidation) {
  const EvaluationFrame f = numeric_frame({0.2, 0.4, 0.9, 0.1}, {1, 2, 3, 4}, 2);
  for (const std::vector<double>& g :
       {std::vector<double>{}, {0.5, 0.4}, {0.2, 0.2}, {0.5, 1.0}, {-0.1}}) {
    EXPECT_THROW(risk_curve(f, g, EstimatorConfig{}, fixed_learners(0.0)), ConfigError);
  }
}

TEST(RiskCurve, DiscreteSyntheticTracksOracle) {
  const DiscreteInstance inst = bundled_instance("discrete_synthetic");
  const EvaluationFrame f = discrete_frame(inst, 8000, 5);
  TuningGrid grid;
  grid.inner_folds = 3;
  const std::vector<double> alphas = {0.0, 0.5, 0.9};
  EstimatorConfig cfg;
  cfg.seed = 8;
  const auto curve = risk_curve(f, alphas, cfg, reference_learners(grid, {}, {}));
  for (std::size_t j = 0; j < alphas.size(); ++j) {
    const double truth = exact_worst_case_discrete(inst, alphas[j]);
    const double half = curve[j].ci_upper - curve[j].r_hat;
    EXPECT_LE(std::abs(curve[j].r_hat - truth), 2.0 * half) << alphas[j];
    if (j > 0) {
      EXPECT_GE(curve[j].r_hat, curve[j - 1].r_hat - 2.0 * half);
      EXPECT_GT(half, curve[j - 1].ci_upper - curve[j - 1].r_hat);
    }
  }
  // mu fits are shared across the grid.
  EXPECT_EQ(curve[1].mu_hat, curve[2].mu_hat);
  EXPECT_EQ(curve[1].noise, curve[2].noise);
}

TEST(RiskCurve, ThreadCountDoesNotChangeResults) {
  const DiscreteInstance inst = bundled_instance("stratified");
  const EvaluationFrame f = discrete_frame(inst, 3000, 6);
  TuningGrid grid;
  grid.inner_folds = 3;
  const std::vector<double> alphas = {0.3, 0.7};
  kernels::set_thread_count(1);
  const auto a = risk_curve(f, alphas, EstimatorConfig{}, reference_learners(grid, {}, {}));
  kernels::set_thread_count(3);
  const auto b = risk_curve(f, alphas, EstimatorConfig{}, reference_learners(grid, {}, {}));
  kernels::set_thread_count(0);
  for (std::size_t j = 0; j < alphas.size(); ++j) {
    EXPECT_EQ(a[j].r_hat, b[j].r_hat);
    EXPECT_EQ(a[j].sigma2_hat, b[j].sigma2_hat);
    EXPECT_EQ(a[j].h_indicators, b[j].h_indicators);
  }
}

}  // namespace
}  // namespace wcrisk
