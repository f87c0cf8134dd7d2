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

#include "wcrisk/spline_basis.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "wcrisk/error.hpp"

namespace wcrisk {

void SplineBasisConfig::validate() const {
  if (degree < 1) throw ConfigError("spline degree must be >= 1");
  if (knots_per_column < 0) {
    throw ConfigError("knots_per_column must be >= 0");
  }
}

BSpline::BSpline(double lo, double hi, std::vector<double> interior, int degree)
    : degree_(degree), interior_(std::move(interior)) {
  if (!(hi > lo)) throw ConfigError("B-spline range must be non-empty");
  if (degree < 1) throw ConfigError("spline degree must be >= 1");
  for (std::size_t i = 0; i < interior_.size(); ++i) {
    if (!(interior_[i] > lo && interior_[i] < hi) ||
        (i > 0 && !(interior_[i] > interior_[i - 1]))) {
      throw ConfigError("interior knots must be strictly increasing in (lo, hi)");
    }
  }
  knots_.assign(static_cast<std::size_t>(degree + 1), lo);
  knots_.insert(knots_.end(), interior_.begin(), interior_.end());
  knots_.insert(knots_.end(), static_cast<std::size_t>(degree + 1), hi);
}

void BSpline::evaluate(double x, double* out) const {
  const int p = degree_;
  const int n_basis = size();
  std::fill(out, out + n_basis, 0.0);
  x = std::clamp(x, lo(), hi());

  // Knot span: knots[span] <= x < knots[span + 1], span in [p, n_basis - 1].
  int span;
  if (x >= hi()) {
    span = n_basis - 1;
  } else {
    const auto it = std::upper_bound(knots_.begin() + p,
                                     knots_.begin() + n_basis, x);
    span = static_cast<int>(it - knots_.begin()) - 1;
  }

  // Cox-de Boor triangle for the p + 1 nonzero functions.
  double basis[32];
  double left[32];
  double right[32];
  basis[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - knots_[static_cast<std::size_t>(span + 1 - j)];
    right[j] = knots_[static_cast<std::size_t>(span + j)] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right[r + 1] + left[j - r];
      const double temp = denom != 0.0 ? basis[r] / denom : 0.0;
      basis[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    basis[j] = saved;
  }
  for (int j = 0; j <= p; ++j) out[span - p + j] = basis[j];
}

std::vector<double> quantile_knots(std::span<const double> values, int count) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> knots;
  if (sorted.empty() || count <= 0) return knots;
  const double lo = sorted.front();
  const double hi = sorted.back();
  const double last = static_cast<double>(sorted.size() - 1);
  for (int j = 1; j <= count; ++j) {
    // Linear interpolation between order statistics.
    const double pos = last * static_cast<double>(j) / (count + 1);
    const auto below = static_cast<std::size_t>(std::floor(pos));
    const std::size_t above = std::min(below + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(below);
    const double q = sorted[below] + frac * (sorted[above] - sorted[below]);
    if (q > lo && q < hi && (knots.empty() || q > knots.back())) {
      knots.push_back(q);
    }
  }
  return knots;
}

SplineBasis SplineBasis::fit(const FeatureBlock& z,
                             const SplineBasisConfig& config) {
  config.validate();
  SplineBasis basis;
  basis.input_width_ = z.values.cols();
  basis.names_.push_back("(intercept)");

  const std::set<std::string> interacting(config.interaction_columns.begin(),
                                          config.interaction_columns.end());
  for (const std::string& name : interacting) {
    const bool known = std::any_of(
        z.sources.begin(), z.sources.end(),
        [&](const SourceEncoding& s) { return s.name == name; });
    if (!known) {
      throw ConfigError("interaction column '" + name + "' is not in Z");
    }
  }

  // Design column index of each term's first output; indicator columns of
  // interacting sources.
  std::vector<Eigen::Index> indicator_cols;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> term_ranges;  // [begin, end)
  std::vector<bool> term_is_interacting;
  Eigen::Index next = 1;

  for (const SourceEncoding& src : z.sources) {
    const bool interacts = interacting.count(src.name) > 0;
    const Eigen::Index begin = next;
    if (src.type == ColumnType::kCategorical) {
      if (interacts && src.width != 2) {
        throw ConfigError("interaction column '" + src.name +
                          "' must be binary");
      }
      for (std::size_t k = 1; k < src.width; ++k) {
        Term t;
        t.kind = TermKind::kPassThrough;
        t.input_column = static_cast<Eigen::Index>(src.first + k);
        t.name = z.column_names[src.first + k];
        basis.names_.push_back(t.name);
        basis.terms_.push_back(std::move(t));
        ++next;
      }
    } else {
      const Eigen::Index col = static_cast<Eigen::Index>(src.first);
      const Eigen::VectorXd x = z.values.col(col);
      const double lo = x.size() ? x.minCoeff() : 0.0;
      const double hi = x.size() ? x.maxCoeff() : 0.0;
      const bool binary =
          (x.array() == 0.0 || x.array() == 1.0).all();
      Term t;
      t.input_column = col;
      t.name = src.name;
      if (interacts && !binary) {
        throw ConfigError("interaction column '" + src.name +
                          "' must be a 0/1 indicator");
      }
      if (binary || !(hi > lo)) {
        if (!(hi > lo)) {
          basis.warnings_.push_back("DegenerateColumn: '" + src.name +
                                    "' is constant; passed through unsplined");
        }
        t.kind = TermKind::kPassThrough;
        basis.names_.push_back(t.name);
        ++next;
      } else {
        std::vector<double> values(x.data(), x.data() + x.size());
        t.kind = TermKind::kSpline;
        t.spline.emplace_back(lo, hi,
                              quantile_knots(values, config.knots_per_column),
                              config.degree);
        const int width = t.spline.front().size();
        for (int k = 0; k < width; ++k) {
          basis.names_.push_back(src.name + "[B" + std::to_string(k) + "]");
        }
        next += width;
      }
      basis.terms_.push_back(std::move(t));
    }
    term_ranges.emplace_back(begin, next);
    term_is_interacting.push_back(interacts);
    if (interacts) indicator_cols.push_back(begin);
  }

  for (Eigen::Index ind : indicator_cols) {
    for (std::size_t s = 0; s < term_ranges.size(); ++s) {
      const auto [b, e] = term_ranges[s];
      if (ind >= b && ind < e) continue;  // not with itself
      for (Eigen::Index c = b; c < e; ++c) {
        basis.interactions_.emplace_back(ind, c);
        basis.names_.push_back(basis.names_[static_cast<std::size_t>(ind)] +
                               ":" + basis.names_[static_cast<std::size_t>(c)]);
      }
    }
  }
  return basis;
}

Eigen::Index SplineBasis::dimension() const {
  return static_cast<Eigen::Index>(names_.size());
}

kernels::RowMatrix SplineBasis::expand(const Eigen::MatrixXd& z) const {
  if (z.cols() != input_width_) {
    throw DimensionMismatch("spline basis: expected " +
                            std::to_string(input_width_) + " Z columns, got " +
                            std::to_string(z.cols()));
  }
  const Eigen::Index n = z.rows();
  const Eigen::Index dim = dimension();
  kernels::RowMatrix design = kernels::RowMatrix::Zero(n, dim);
  design.col(0).setOnes();
  Eigen::Index next = 1;
  for (const Term& t : terms_) {
    if (t.kind == TermKind::kPassThrough) {
      design.col(next) = z.col(t.input_column);
      ++next;
      continue;
    }
    const BSpline& spline = t.spline.front();
    for (Eigen::Index i = 0; i < n; ++i) {
      spline.evaluate(z(i, t.input_column), design.row(i).data() + next);
    }
    next += spline.size();
  }
  for (const auto& [ind, other] : interactions_) {
    design.col(next) = design.col(ind).cwiseProduct(design.col(other));
    ++next;
  }
  return design;
}

}  // namespace wcrisk
