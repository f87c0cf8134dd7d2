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

// Pluggable nuisance learners. The estimator only needs fit and predict; the
// kernel ridge and spline quantile learners are the defaults.

#ifndef WCRISK_LEARNERS_HPP_
#define WCRISK_LEARNERS_HPP_

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "wcrisk/frame.hpp"
#include "wcrisk/kernel_ridge.hpp"
#include "wcrisk/quantile_regression.hpp"
#include "wcrisk/spline_basis.hpp"
#include "wcrisk/tuning.hpp"

namespace wcrisk {

using Hyperparameters = std::vector<std::pair<std::string, double>>;

// Conditional mean of the loss given [W, Z].
class MeanLearner {
 public:
  virtual ~MeanLearner() = default;
  virtual void fit(const Eigen::MatrixXd& wz, const Eigen::VectorXd& losses) = 0;
  virtual Eigen::VectorXd predict(const Eigen::MatrixXd& wz) const = 0;
  // Selected hyperparameters, for the report.
  virtual Hyperparameters hyperparameters() const { return {}; }
};

// Conditional alpha-quantile of a target given Z.
class QuantileLearner {
 public:
  virtual ~QuantileLearner() = default;
  virtual void fit(const FeatureBlock& z, const Eigen::VectorXd& targets,
                   double alpha) = 0;
  virtual Eigen::VectorXd predict(const Eigen::MatrixXd& z) const = 0;
  virtual Hyperparameters hyperparameters() const { return {}; }
  virtual std::vector<std::string> warnings() const { return {}; }
};

// Each cross-fitting fold gets fresh learners from these factories. The
// argument is a per-fold seed.
struct LearnerFactory {
  std::function<std::unique_ptr<MeanLearner>(std::uint64_t)> make_mean;
  std::function<std::unique_ptr<QuantileLearner>(std::uint64_t)> make_quantile;
};

class KernelRidgeLearner : public MeanLearner {
 public:
  KernelRidgeLearner(TuningGrid grid, KernelRidgeOptions options)
      : grid_(std::move(grid)), options_(options) {}

  void fit(const Eigen::MatrixXd& wz, const Eigen::VectorXd& losses) override;
  Eigen::VectorXd predict(const Eigen::MatrixXd& wz) const override;
  Hyperparameters hyperparameters() const override;

  const KernelRidgeModel& model() const { return model_; }

 private:
  TuningGrid grid_;
  KernelRidgeOptions options_;
  KernelRidgeModel model_;
};

class SplineQuantileLearner : public QuantileLearner {
 public:
  SplineQuantileLearner(TuningGrid grid, SplineBasisConfig basis,
                        QuantileSolverOptions options = {})
      : grid_(std::move(grid)), basis_(std::move(basis)), options_(options) {}

  void fit(const FeatureBlock& z, const Eigen::VectorXd& targets,
           double alpha) override;
  Eigen::VectorXd predict(const Eigen::MatrixXd& z) const override;
  Hyperparameters hyperparameters() const override;
  std::vector<std::string> warnings() const override;

  const QuantileModel& model() const { return model_; }

 private:
  TuningGrid grid_;
  SplineBasisConfig basis_;
  QuantileSolverOptions options_;
  QuantileModel model_;
};

LearnerFactory reference_learners(const TuningGrid& grid,
                                  const SplineBasisConfig& basis,
                                  const KernelRidgeOptions& kernel_options);

}  // namespace wcrisk

#endif  // WCRISK_LEARNERS_HPP_
