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

#include "wcrisk/kernel_ridge.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "wcrisk/error.hpp"
#include "wcrisk/rng.hpp"

namespace wcrisk {
namespace {

kernels::RowMatrix standardize(const Eigen::MatrixXd& x,
                               const Eigen::RowVectorXd& mean,
                               const Eigen::RowVectorXd& scale) {
  kernels::RowMatrix out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    out.col(j) = ((x.col(j).array() - mean[j]) / scale[j]).matrix();
  }
  return out;
}

}  // namespace

KernelRidgeModel fit_kernel_ridge(const Eigen::MatrixXd& features,
                                  const Eigen::VectorXd& targets, double gamma,
                                  double lambda,
                                  const KernelRidgeOptions& options) {
  const Eigen::Index n = features.rows();
  if (n != targets.size()) {
    throw DimensionMismatch("kernel ridge: " + std::to_string(n) +
                            " feature rows but " +
                            std::to_string(targets.size()) + " targets");
  }
  if (n < 1) throw DimensionMismatch("kernel ridge: no training rows");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ConfigError("kernel ridge: gamma must be positive");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("kernel ridge: lambda must be non-negative");
  }

  KernelRidgeModel model;
  model.bandwidth_gamma = gamma;
  model.ridge_lambda = lambda;
  model.training_rows = n;
  const Eigen::Index d = features.cols();
  model.feature_mean = features.colwise().mean();
  model.feature_scale.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double var =
        (features.col(j).array() - model.feature_mean[j]).square().mean();
    model.feature_scale[j] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  const kernels::RowMatrix x =
      standardize(features, model.feature_mean, model.feature_scale);

  const kernels::RowGroups groups = kernels::group_identical_rows(x);
  const Eigen::Index m = static_cast<Eigen::Index>(groups.representative.size());
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index g = groups.group_of[static_cast<std::size_t>(i)];
    counts[g] += 1.0;
    sums[g] += targets[i];
  }
  kernels::RowMatrix unique(m, d);
  for (Eigen::Index g = 0; g < m; ++g) {
    unique.row(g) = x.row(groups.representative[static_cast<std::size_t>(g)]);
  }
  const double scaled_lambda = lambda * static_cast<double>(n);

  if (m <= options.max_exact_support) {
    Eigen::MatrixXd system = kernels::parallel::rbf_cross(unique, unique, gamma);
    system.diagonal().array() += scaled_lambda / counts.array();
    const Eigen::VectorXd rhs = sums.array() / counts.array();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(system);
    if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-13)) {
      throw SingularSystem("kernel ridge: regularized kernel matrix is singular "
                           "(lambda=" + std::to_string(lambda) + ")");
    }
    model.dual_weights = ldlt.solve(rhs);
    model.support_points = std::move(unique);
  } else {
    // Nystrom: f = sum_l b_l k(., x_l) over landmark rows x_l, solving
    // (K_ul^T C K_ul + lambda n K_ll) b = K_ul^T s.
    const Eigen::Index l = std::min(options.nystrom_landmarks, m);
    Rng rng(derive_seed(options.seed, "nystrom"));
    std::vector<std::size_t> perm = rng.permutation(static_cast<std::size_t>(m));
    perm.resize(static_cast<std::size_t>(l));
    std::sort(perm.begin(), perm.end());
    kernels::RowMatrix landmarks(l, d);
    for (Eigen::Index j = 0; j < l; ++j) {
      landmarks.row(j) = unique.row(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(j)]));
    }
    const Eigen::MatrixXd k_ul = kernels::parallel::rbf_cross(unique, landmarks, gamma);
    const Eigen::MatrixXd k_ll = kernels::parallel::rbf_cross(landmarks, landmarks, gamma);
    Eigen::MatrixXd system = k_ul.transpose() * counts.asDiagonal() * k_ul;
    system += scaled_lambda * k_ll;
    system.diagonal().array() += 1e-10 * system.diagonal().mean();
    const Eigen::VectorXd rhs = k_ul.transpose() * sums;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(system);
    if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-15)) {
      throw SingularSystem("kernel ridge: Nystrom system is singular");
    }
    model.dual_weights = ldlt.solve(rhs);
    model.support_points = std::move(landmarks);
    model.approximate = true;
  }
  if (!model.dual_weights.allFinite()) {
    throw SingularSystem("kernel ridge: non-finite dual weights");
  }
  return model;
}

Eigen::VectorXd predict_kernel_ridge(const KernelRidgeModel& model,
                                     const Eigen::MatrixXd& features) {
  if (features.rows() == 0) return Eigen::VectorXd();
  if (features.cols() != model.feature_mean.size()) {
    throw DimensionMismatch("kernel ridge: model expects " +
                            std::to_string(model.feature_mean.size()) +
                            " features, got " +
                            std::to_string(features.cols()));
  }
  const kernels::RowMatrix x =
      standardize(features, model.feature_mean, model.feature_scale);
  return kernels::parallel::rbf_apply(x, model.support_points,
                                      model.dual_weights, model.bandwidth_gamma);
}

}  // namespace wcrisk
