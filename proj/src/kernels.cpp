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

#include "wcrisk/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <unordered_map>

#include "wcrisk/rng.hpp"

namespace wcrisk::kernels {
namespace {

int g_thread_cap = 0;

int team_size() {
  return g_thread_cap > 0 ? g_thread_cap : omp_get_max_threads();
}

inline double squared_distance(const double* a, const double* b,
                               Eigen::Index d) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

inline double apply_row(const double* x, const RowMatrix& support,
                        const Eigen::VectorXd& weights, double gamma) {
  const Eigen::Index d = support.cols();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < support.rows(); ++j) {
    acc += weights[j] *
           std::exp(-gamma * squared_distance(x, support.row(j).data(), d));
  }
  return acc;
}

std::uint64_t hash_row(const double* row, Eigen::Index d) {
  std::uint64_t h = 0x84222325CBF29CE4ULL;
  for (Eigen::Index k = 0; k < d; ++k) {
    const double v = row[k] == 0.0 ? 0.0 : row[k];  // fold -0.0 into 0.0
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    h = splitmix64(h ^ bits);
  }
  return h;
}

PinballPass empty_pass(Eigen::Index p, bool with_derivatives) {
  PinballPass pass;
  const Eigen::Index q = with_derivatives ? p : 0;
  pass.gradient = Eigen::VectorXd::Zero(q);
  pass.hessian = Eigen::MatrixXd::Zero(q, q);
  return pass;
}

// Accumulates groups [begin, end) into `out` (upper triangle of the Hessian).
void pinball_groups(const PinballGroups& groups, const Eigen::VectorXd& beta,
                    double alpha, double h, bool with_derivatives,
                    Eigen::Index begin, Eigen::Index end, PinballPass& out) {
  const Eigen::Index p = groups.design.cols();
  const double* b = beta.data();
  for (Eigen::Index g = begin; g < end; ++g) {
    const double* d = groups.design.row(g).data();
    double c = 0.0;
    for (Eigen::Index k = 0; k < p; ++k) c += d[k] * b[k];
    const GroupTerm term = pinball_group_term(groups, g, c, alpha, h);
    out.objective += term.value;
    if (!with_derivatives) continue;
    for (Eigen::Index k = 0; k < p; ++k) out.gradient[k] += d[k] * term.slope;
    if (term.curvature != 0.0) {
      for (Eigen::Index k = 0; k < p; ++k) {
        const double dk = d[k] * term.curvature;
        for (Eigen::Index l = k; l < p; ++l) out.hessian(k, l) += dk * d[l];
      }
    }
  }
}

void symmetrize_upper(Eigen::MatrixXd& m) {
  for (Eigen::Index k = 0; k < m.rows(); ++k) {
    for (Eigen::Index l = 0; l < k; ++l) m(k, l) = m(l, k);
  }
}

}  // namespace

double smoothed_pinball(double u, double alpha, double h) {
  double huber;
  if (h > 0.0 && std::fabs(u) <= h) {
    huber = u * u / (2.0 * h);
  } else {
    huber = std::fabs(u) - 0.5 * h;
  }
  return 0.5 * (huber + (2.0 * alpha - 1.0) * u);
}

RowGroups group_identical_rows(const RowMatrix& rows) {
  RowGroups groups;
  groups.group_of.resize(static_cast<std::size_t>(rows.rows()));
  std::unordered_map<std::uint64_t, std::vector<Eigen::Index>> buckets;
  buckets.reserve(static_cast<std::size_t>(std::min<Eigen::Index>(rows.rows(), 1 << 16)));
  const Eigen::Index d = rows.cols();
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const double* r = rows.row(i).data();
    auto& bucket = buckets[hash_row(r, d)];
    Eigen::Index found = -1;
    for (Eigen::Index g : bucket) {
      const double* rep =
          rows.row(groups.representative[static_cast<std::size_t>(g)]).data();
      bool same = true;
      for (Eigen::Index k = 0; k < d && same; ++k) same = rep[k] == r[k];
      if (same) {
        found = g;
        break;
      }
    }
    if (found < 0) {
      found = static_cast<Eigen::Index>(groups.representative.size());
      groups.representative.push_back(i);
      bucket.push_back(found);
    }
    groups.group_of[static_cast<std::size_t>(i)] = found;
  }
  return groups;
}

PinballGroups group_pinball_targets(const RowMatrix& design,
                                    const Eigen::VectorXd& targets) {
  const RowGroups rg = group_identical_rows(design);
  const Eigen::Index n_groups = static_cast<Eigen::Index>(rg.representative.size());
  PinballGroups out;
  out.design.resize(n_groups, design.cols());
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(n_groups), 0);
  for (Eigen::Index g : rg.group_of) ++counts[static_cast<std::size_t>(g)];
  out.offsets.assign(static_cast<std::size_t>(n_groups) + 1, 0);
  for (Eigen::Index g = 0; g < n_groups; ++g) {
    out.design.row(g) = design.row(rg.representative[static_cast<std::size_t>(g)]);
    out.offsets[static_cast<std::size_t>(g) + 1] =
        out.offsets[static_cast<std::size_t>(g)] + counts[static_cast<std::size_t>(g)];
  }
  out.targets.resize(targets.size());
  std::vector<Eigen::Index> fill(out.offsets.begin(), out.offsets.end() - 1);
  for (Eigen::Index i = 0; i < targets.size(); ++i) {
    const auto g = static_cast<std::size_t>(rg.group_of[static_cast<std::size_t>(i)]);
    out.targets[fill[g]++] = targets[i];
  }
  out.center.resize(n_groups);
  out.prefix.resize(targets.size() + n_groups);
  out.prefix_sq.resize(targets.size() + n_groups);
  for (Eigen::Index g = 0; g < n_groups; ++g) {
    double* begin = out.targets.data() + out.offsets[static_cast<std::size_t>(g)];
    double* end = out.targets.data() + out.offsets[static_cast<std::size_t>(g) + 1];
    std::sort(begin, end);
    const double center = begin[(end - begin) / 2];
    out.center[g] = center;
    const Eigen::Index base = out.offsets[static_cast<std::size_t>(g)] + g;
    double s = 0.0;
    double s2 = 0.0;
    out.prefix[base] = 0.0;
    out.prefix_sq[base] = 0.0;
    for (double* it = begin; it != end; ++it) {
      *it -= center;
      s += *it;
      s2 += *it * *it;
      const Eigen::Index j = base + (it - begin) + 1;
      out.prefix[j] = s;
      out.prefix_sq[j] = s2;
    }
  }
  return out;
}

GroupTerm pinball_group_term(const PinballGroups& groups, Eigen::Index g,
                             double c, double alpha, double h) {
  const Eigen::Index off = groups.offsets[static_cast<std::size_t>(g)];
  const Eigen::Index n = groups.size(g);
  const double* ys = groups.targets.data() + off;
  const double* pre = groups.prefix.data() + off + g;
  const double* pre_sq = groups.prefix_sq.data() + off + g;
  const double cs = c - groups.center[g];

  // Partition into y < cs - h, |y - cs| <= h, y > cs + h (strict/zero for h=0).
  const Eigen::Index lo = std::lower_bound(ys, ys + n, cs - h) - ys;
  const Eigen::Index hi = std::upper_bound(ys, ys + n, cs + h) - ys;
  const double below = static_cast<double>(lo);
  const double above = static_cast<double>(n - hi);
  const double zone = static_cast<double>(hi - lo);
  const double sum_below = pre[lo] - below * cs;
  const double sum_above = (pre[n] - pre[hi]) - above * cs;

  GroupTerm term;
  if (h > 0.0) {
    const double sum_zone = (pre[hi] - pre[lo]) - zone * cs;
    double sq_zone = 0.0;
    if (hi - lo <= 32) {
      for (Eigen::Index i = lo; i < hi; ++i) {
        const double u = ys[i] - cs;
        sq_zone += u * u;
      }
    } else {
      sq_zone = std::max(0.0, (pre_sq[hi] - pre_sq[lo]) -
                                  2.0 * cs * (pre[hi] - pre[lo]) +
                                  zone * cs * cs);
    }
    term.value = (alpha - 1.0) * sum_below + alpha * sum_above -
                 0.25 * h * (below + above) + sq_zone / (4.0 * h) +
                 (alpha - 0.5) * sum_zone;
    term.slope = (1.0 - alpha) * below - alpha * above -
                 (sum_zone / (2.0 * h) + (alpha - 0.5) * zone);
    term.curvature = zone / (2.0 * h);
  } else {
    term.value = (alpha - 1.0) * sum_below + alpha * sum_above;
    term.slope = (1.0 - alpha) * (below + zone) - alpha * above;
  }
  return term;
}

void set_thread_count(int n) { g_thread_cap = n > 0 ? n : 0; }

int thread_count() { return team_size(); }

namespace serial {

Eigen::MatrixXd rbf_cross(const RowMatrix& a, const RowMatrix& b,
                          double gamma) {
  Eigen::MatrixXd out(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      out(i, j) = std::exp(
          -gamma * squared_distance(a.row(i).data(), b.row(j).data(), a.cols()));
    }
  }
  return out;
}

Eigen::VectorXd rbf_apply(const RowMatrix& x, const RowMatrix& support,
                          const Eigen::VectorXd& weights, double gamma) {
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out[i] = apply_row(x.row(i).data(), support, weights, gamma);
  }
  return out;
}

PinballPass pinball_pass(const PinballGroups& groups,
                         const Eigen::VectorXd& beta, double alpha, double h,
                         bool with_derivatives) {
  PinballPass pass = empty_pass(groups.design.cols(), with_derivatives);
  pinball_groups(groups, beta, alpha, h, with_derivatives, 0, groups.groups(),
                 pass);
  if (with_derivatives) symmetrize_upper(pass.hessian);
  return pass;
}

}  // namespace serial

namespace parallel {

Eigen::MatrixXd rbf_cross(const RowMatrix& a, const RowMatrix& b,
                          double gamma) {
  Eigen::MatrixXd out(a.rows(), b.rows());
  const Eigen::Index n = a.rows();
#pragma omp parallel for schedule(static) num_threads(team_size()) if (n > 256)
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      out(i, j) = std::exp(
          -gamma * squared_distance(a.row(i).data(), b.row(j).data(), a.cols()));
    }
  }
  return out;
}

Eigen::VectorXd rbf_apply(const RowMatrix& x, const RowMatrix& support,
                          const Eigen::VectorXd& weights, double gamma) {
  Eigen::VectorXd out(x.rows());
  const Eigen::Index n = x.rows();
#pragma omp parallel for schedule(static) num_threads(team_size()) if (n > 256)
  for (Eigen::Index i = 0; i < n; ++i) {
    out[i] = apply_row(x.row(i).data(), support, weights, gamma);
  }
  return out;
}

PinballPass pinball_pass(const PinballGroups& groups,
                         const Eigen::VectorXd& beta, double alpha, double h,
                         bool with_derivatives) {
  const Eigen::Index n_groups = groups.groups();
  const Eigen::Index p = groups.design.cols();
  const Eigen::Index blocks = (n_groups + kReductionBlock - 1) / kReductionBlock;
  if (blocks <= 1) {
    return serial::pinball_pass(groups, beta, alpha, h, with_derivatives);
  }
  std::vector<PinballPass> partial(static_cast<std::size_t>(blocks));
#pragma omp parallel for schedule(static) num_threads(team_size())
  for (Eigen::Index blk = 0; blk < blocks; ++blk) {
    PinballPass& part = partial[static_cast<std::size_t>(blk)];
    part = empty_pass(p, with_derivatives);
    const Eigen::Index begin = blk * kReductionBlock;
    const Eigen::Index end = std::min(n_groups, begin + kReductionBlock);
    pinball_groups(groups, beta, alpha, h, with_derivatives, begin, end, part);
  }
  PinballPass pass = empty_pass(p, with_derivatives);
  for (const PinballPass& part : partial) {
    pass.objective += part.objective;
    if (with_derivatives) {
      pass.gradient += part.gradient;
      pass.hessian += part.hessian;
    }
  }
  if (with_derivatives) symmetrize_upper(pass.hessian);
  return pass;
}

}  // namespace parallel
}  // namespace wcrisk::kernels
