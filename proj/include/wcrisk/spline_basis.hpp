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

#ifndef WCRISK_SPLINE_BASIS_HPP_
#define WCRISK_SPLINE_BASIS_HPP_

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "wcrisk/frame.hpp"
#include "wcrisk/kernels.hpp"

namespace wcrisk {

struct SplineBasisConfig {
  int degree = 3;
  int knots_per_column = 5;  // interior knots, at empirical quantiles
  // Z source columns (binary) whose indicator multiplies every other term.
  std::vector<std::string> interaction_columns;

  void validate() const;  // throws ConfigError
};

// Clamped B-spline basis on [lo, hi] with the given interior knots.
class BSpline {
 public:
  BSpline(double lo, double hi, std::vector<double> interior, int degree);

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(interior_.size()) + degree_ + 1; }
  double lo() const { return knots_.front(); }
  double hi() const { return knots_.back(); }
  const std::vector<double>& interior_knots() const { return interior_; }

  // Writes size() basis values at x (clamped into [lo, hi]).
  void evaluate(double x, double* out) const;

 private:
  int degree_;
  std::vector<double> interior_;
  std::vector<double> knots_;  // full clamped knot vector
};

// Empirical quantile-placed interior knots, deduplicated and strictly inside
// (min, max) of `values`.
std::vector<double> quantile_knots(std::span<const double> values, int count);

// Fitted design transform for the conditional-quantile regression. Column 0
// of every design is the intercept.
class SplineBasis {
 public:
  enum class TermKind { kSpline, kPassThrough };

  struct Term {
    TermKind kind = TermKind::kPassThrough;
    Eigen::Index input_column = 0;  // column of the encoded Z block
    std::vector<BSpline> spline;    // one element when kind == kSpline
    std::string name;
  };

  // Builds knots from `z` (the encoded Z block). Numeric columns are splined
  // unless they are 0/1 indicators or constant (constant columns pass through
  // and are reported in warnings()). One-hot groups pass through with their
  // first level dropped as the reference.
  static SplineBasis fit(const FeatureBlock& z, const SplineBasisConfig& config);

  // Design with the intercept first; throws DimensionMismatch when `z` does
  // not have the fitted block width.
  kernels::RowMatrix expand(const Eigen::MatrixXd& z) const;

  Eigen::Index input_width() const { return input_width_; }
  // Number of design columns including the intercept.
  Eigen::Index dimension() const;
  const std::vector<std::string>& column_names() const { return names_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  const std::vector<Term>& terms() const { return terms_; }

 private:
  Eigen::Index input_width_ = 0;
  std::vector<Term> terms_;
  // Pairs (indicator design column, other design column) for interactions.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> interactions_;
  std::vector<std::string> names_;
  std::vector<std::string> warnings_;
};

}  // namespace wcrisk

#endif  // WCRISK_SPLINE_BASIS_HPP_
