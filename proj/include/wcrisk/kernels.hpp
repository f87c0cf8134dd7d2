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

// Data-parallel inner loops used by the nuisance learners.
//
// Each kernel has a plain serial reference in `kernels::serial` and an OpenMP
// version in `kernels::parallel`. Per-row kernels give bitwise-identical
// output in both. Reductions in the parallel versions are accumulated over
// fixed blocks of kReductionBlock items and combined in block order, so their
// output does not depend on the thread count; they may differ from the
// serial reference in the last few bits.

#ifndef WCRISK_KERNELS_HPP_
#define WCRISK_KERNELS_HPP_

#include <Eigen/Dense>
#include <vector>

namespace wcrisk::kernels {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr Eigen::Index kReductionBlock = 1024;

// Targets of a pinball regression grouped by identical design rows. The
// loss of group g depends on beta only through c_g = design_g . beta, so one
// pass costs O(G log n) rather than O(n p).
struct PinballGroups {
  RowMatrix design;                   // G x p, one row per distinct design row
  std::vector<Eigen::Index> offsets;  // group g owns [offsets[g], offsets[g+1])
  Eigen::VectorXd targets;            // ascending within a group, minus center
  Eigen::VectorXd center;             // per-group shift (a group median)
  // Per-group running sums of shifted targets and their squares; group g's
  // entries start at offsets[g] + g and hold n_g + 1 values.
  Eigen::VectorXd prefix;
  Eigen::VectorXd prefix_sq;

  Eigen::Index groups() const { return design.rows(); }
  Eigen::Index size(Eigen::Index g) const { return offsets[g + 1] - offsets[g]; }
};

PinballGroups group_pinball_targets(const RowMatrix& design,
                                    const Eigen::VectorXd& targets);

// Value and c-derivatives of F_g(c) = sum_{i in g} rho_h(y_i - c).
struct GroupTerm {
  double value = 0.0;
  double slope = 0.0;      // dF/dc (h > 0), or the right derivative when h == 0
  double curvature = 0.0;  // d2F/dc2; 0 when h == 0
};
GroupTerm pinball_group_term(const PinballGroups& groups, Eigen::Index g,
                             double c, double alpha, double h);

// Sums produced by one pass of the smoothed pinball objective over all groups.
struct PinballPass {
  double objective = 0.0;    // sum of rho_h(r_i) (exact pinball when h == 0)
  Eigen::VectorXd gradient;  // d/d(beta): sum_g design_g F_g'(c_g)
  Eigen::MatrixXd hessian;   // sum_g design_g design_g^T F_g''(c_g)
};

// rho_h(u) = (H_h(u) + (2 alpha - 1) u) / 2 with H_h the Huber function of
// width h; h == 0 gives the exact pinball loss u (alpha - [u < 0]).
double smoothed_pinball(double u, double alpha, double h);

// Distinct rows of `rows` in first-appearance order; `group_of[i]` is the
// index of row i's distinct representative.
struct RowGroups {
  std::vector<Eigen::Index> representative;
  std::vector<Eigen::Index> group_of;
};
RowGroups group_identical_rows(const RowMatrix& rows);

namespace serial {

// out(i, j) = exp(-gamma * ||a_i - b_j||^2)
Eigen::MatrixXd rbf_cross(const RowMatrix& a, const RowMatrix& b, double gamma);

// out(i) = sum_j weights(j) * exp(-gamma * ||x_i - support_j||^2)
Eigen::VectorXd rbf_apply(const RowMatrix& x, const RowMatrix& support,
                          const Eigen::VectorXd& weights, double gamma);

PinballPass pinball_pass(const PinballGroups& groups, const Eigen::VectorXd& beta,
                         double alpha, double h, bool with_derivatives);

}  // namespace serial

namespace parallel {

Eigen::MatrixXd rbf_cross(const RowMatrix& a, const RowMatrix& b, double gamma);

Eigen::VectorXd rbf_apply(const RowMatrix& x, const RowMatrix& support,
                          const Eigen::VectorXd& weights, double gamma);

PinballPass pinball_pass(const PinballGroups& groups, const Eigen::VectorXd& beta,
                         double alpha, double h, bool with_derivatives);

}  // namespace parallel

// Caps the OpenMP team size used by the parallel kernels; n <= 0 restores
// the runtime default.
void set_thread_count(int n);
int thread_count();

}  // namespace wcrisk::kernels

#endif  // WCRISK_KERNELS_HPP_
