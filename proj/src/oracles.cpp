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

#include "wcrisk/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wcrisk/error.hpp"
#include "wcrisk/rng.hpp"

namespace wcrisk {
namespace {

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("alpha must be in [0, 1)");
}

// Conditional masses of stratum s.
Eigen::VectorXd conditional(const DiscreteInstance& inst, Eigen::Index s) {
  const Eigen::VectorXd col = inst.pmf.col(s);
  return col / col.sum();
}

std::vector<Eigen::Index> descending_order(const Eigen::VectorXd& mu) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(mu.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return mu[a] > mu[b]; });
  return order;
}

double stratum_threshold(const Eigen::VectorXd& mu, const Eigen::VectorXd& q,
                         double alpha, double epsilon) {
  if (epsilon == 0.0) {
    std::vector<Eigen::Index> order = descending_order(mu);
    std::reverse(order.begin(), order.end());
    double cum = 0.0;
    double last = mu[order.back()];
    for (Eigen::Index w : order) {
      if (q[w] <= 0.0) continue;
      cum += q[w];
      last = mu[w];
      if (cum >= alpha - 1e-15) return mu[w];
    }
    return last;
  }
  // g(t) = sum_w q_w clamp((mu_w + eps - t) / eps, 0, 1), non-increasing.
  auto g = [&](double t) {
    double s = 0.0;
    for (Eigen::Index w = 0; w < mu.size(); ++w) {
      s += q[w] * std::clamp((mu[w] + epsilon - t) / epsilon, 0.0, 1.0);
    }
    return s;
  };
  std::vector<double> breaks;
  for (Eigen::Index w = 0; w < mu.size(); ++w) {
    if (q[w] <= 0.0) continue;
    breaks.push_back(mu[w]);
    breaks.push_back(mu[w] + epsilon);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  const double target = 1.0 - alpha;
  if (alpha == 0.0) return breaks.front();
  double g_prev = g(breaks.front());
  for (std::size_t j = 1; j < breaks.size(); ++j) {
    const double g_next = g(breaks[j]);
    if (g_next <= target) {
      if (g_prev == g_next) return breaks[j - 1];
      const double frac = (g_prev - target) / (g_prev - g_next);
      return breaks[j - 1] + frac * (breaks[j] - breaks[j - 1]);
    }
    g_prev = g_next;
  }
  return breaks.back();
}

std::int64_t decode(const SourceEncoding& src,
                    const Eigen::Ref<const Eigen::RowVectorXd>& row,
                    Eigen::Index offset) {
  const auto first = offset + static_cast<Eigen::Index>(src.first);
  if (src.type == ColumnType::kNumeric) return std::llround(row[first]);
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < static_cast<Eigen::Index>(src.width); ++k) {
    if (row[first + k] > row[first + best]) best = k;
  }
  return src.levels[static_cast<std::size_t>(best)];
}

Eigen::Index level_index(const std::vector<std::int64_t>& levels,
                         std::int64_t code, const char* what) {
  const auto it = std::find(levels.begin(), levels.end(), code);
  if (it == levels.end()) {
    throw DomainError(std::string("oracle: unknown ") + what + " level " +
                      std::to_string(code));
  }
  return it - levels.begin();
}

class OracleMean : public MeanLearner {
 public:
  OracleMean(DiscreteInstance inst, SourceEncoding w, SourceEncoding z,
             Eigen::Index w_cols)
      : inst_(std::move(inst)), w_(std::move(w)), z_(std::move(z)), w_cols_(w_cols) {}

  void fit(const Eigen::MatrixXd&, const Eigen::VectorXd&) override {}

  Eigen::VectorXd predict(const Eigen::MatrixXd& wz) const override {
    Eigen::VectorXd out(wz.rows());
    for (Eigen::Index i = 0; i < wz.rows(); ++i) {
      const Eigen::RowVectorXd row = wz.row(i);
      const Eigen::Index w = level_index(
          inst_.w_levels, decode(w_, row, 0), "w");
      Eigen::Index s = 0;
      if (inst_.has_z()) {
        s = level_index(inst_.z_levels,
                        decode(z_, row, w_cols_), "z");
      }
      out[i] = inst_.mu(w, s);
    }
    return out;
  }

 private:
  DiscreteInstance inst_;
  SourceEncoding w_;
  SourceEncoding z_;
  Eigen::Index w_cols_;
};

class OracleQuantile : public QuantileLearner {
 public:
  OracleQuantile(DiscreteInstance inst, SourceEncoding z, double epsilon)
      : inst_(std::move(inst)), z_(std::move(z)), epsilon_(epsilon) {}

  void fit(const FeatureBlock&, const Eigen::VectorXd&, double alpha) override {
    thresholds_ = exact_thresholds(inst_, alpha, epsilon_);
  }

  Eigen::VectorXd predict(const Eigen::MatrixXd& z) const override {
    Eigen::VectorXd out(z.rows());
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      Eigen::Index s = 0;
      if (inst_.has_z()) {
        const Eigen::RowVectorXd row = z.row(i);
        s = level_index(inst_.z_levels, decode(z_, row, 0), "z");
      }
      out[i] = thresholds_[s];
    }
    return out;
  }

 private:
  DiscreteInstance inst_;
  SourceEncoding z_;
  double epsilon_;
  Eigen::VectorXd thresholds_;
};

}  // namespace

void DiscreteInstance::validate() const {
  const auto nw = static_cast<Eigen::Index>(w_levels.size());
  if (nw == 0) throw ConfigError("instance needs at least one W level");
  if (pmf.rows() != nw || pmf.cols() != strata() || mu.rows() != nw ||
      mu.cols() != strata()) {
    throw ConfigError("instance tables do not match the level counts");
  }
  if ((pmf.array() < 0.0).any() || !pmf.allFinite() || !mu.allFinite()) {
    throw ConfigError("instance pmf must be finite and non-negative");
  }
  if (std::fabs(pmf.sum() - 1.0) > 1e-12) {
    throw ConfigError("instance pmf must sum to 1");
  }
  for (Eigen::Index s = 0; s < strata(); ++s) {
    if (!(pmf.col(s).sum() > 0.0)) {
      throw ConfigError("every Z level needs positive mass");
    }
  }
}

Eigen::MatrixXd exact_selection(const DiscreteInstance& inst, double alpha) {
  inst.validate();
  check_alpha(alpha);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(inst.pmf.rows(), inst.pmf.cols());
  for (Eigen::Index s = 0; s < inst.strata(); ++s) {
    const Eigen::VectorXd q = conditional(inst, s);
    double remaining = 1.0 - alpha;
    for (Eigen::Index w : descending_order(inst.mu.col(s))) {
      if (remaining <= 0.0) break;
      if (q[w] <= 0.0) continue;
      const double take = std::min(q[w], remaining);
      h(w, s) = take / q[w];
      remaining -= take;
    }
  }
  return h;
}

double exact_worst_case_discrete(const DiscreteInstance& inst, double alpha) {
  const Eigen::MatrixXd h = exact_selection(inst, alpha);
  return (h.array() * inst.pmf.array() * inst.mu.array()).sum() / (1.0 - alpha);
}

DualCheck exact_dual_check(const DiscreteInstance& inst, double alpha) {
  DualCheck out;
  out.primal = exact_worst_case_discrete(inst, alpha);
  const Eigen::VectorXd pz = inst.z_marginal();
  for (Eigen::Index s = 0; s < inst.strata(); ++s) {
    const Eigen::VectorXd q = conditional(inst, s);
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index b = 0; b < q.size(); ++b) {
      const double eta = inst.mu(b, s);
      double f = eta;
      for (Eigen::Index w = 0; w < q.size(); ++w) {
        f += q[w] * std::max(inst.mu(w, s) - eta, 0.0) / (1.0 - alpha);
      }
      best = std::min(best, f);
    }
    out.dual += pz[s] * best;
  }
  return out;
}

Eigen::VectorXd exact_thresholds(const DiscreteInstance& inst, double alpha,
                                 double epsilon) {
  inst.validate();
  check_alpha(alpha);
  if (!(epsilon >= 0.0)) throw DomainError("epsilon must be >= 0");
  Eigen::VectorXd t(inst.strata());
  for (Eigen::Index s = 0; s < inst.strata(); ++s) {
    t[s] = stratum_threshold(inst.mu.col(s), conditional(inst, s), alpha, epsilon);
  }
  return t;
}

double exact_noisy_worst_case(const DiscreteInstance& inst, double alpha,
                              double epsilon) {
  if (epsilon == 0.0) return exact_worst_case_discrete(inst, alpha);
  const Eigen::VectorXd t = exact_thresholds(inst, alpha, epsilon);
  const Eigen::VectorXd pz = inst.z_marginal();
  double total = 0.0;
  for (Eigen::Index s = 0; s < inst.strata(); ++s) {
    const Eigen::VectorXd q = conditional(inst, s);
    double stratum = 0.0;
    for (Eigen::Index w = 0; w < q.size(); ++w) {
      const double lo = std::max(inst.mu(w, s), t[s]);
      const double hi = inst.mu(w, s) + epsilon;
      if (hi > lo) stratum += q[w] * (hi - lo) / epsilon * 0.5 * (hi + lo);
    }
    total += pz[s] * stratum;
  }
  return total / (1.0 - alpha);
}

DiscreteInstance unconstrained(const DiscreteInstance& inst) {
  inst.validate();
  DiscreteInstance out;
  out.name = inst.name + "/unconstrained";
  out.loss_noise = inst.loss_noise;
  out.normal_sd = inst.normal_sd;
  const Eigen::Index cells = inst.pmf.size();
  out.pmf.resize(cells, 1);
  out.mu.resize(cells, 1);
  for (Eigen::Index c = 0; c < cells; ++c) {
    out.w_levels.push_back(c);
    out.pmf(c, 0) = inst.pmf.data()[c];
    out.mu(c, 0) = inst.mu.data()[c];
  }
  return out;
}

DiscreteInstance random_instance(std::uint64_t seed, int max_cells, bool with_z) {
  if (max_cells < 2) throw ConfigError("random instance needs max_cells >= 2");
  Rng rng(derive_seed(seed, "random_instance"));
  const int max_w = with_z ? std::max(2, std::min(4, max_cells / 2)) : std::min(6, max_cells);
  const int nw = 2 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(max_w - 1)));
  int nz = 1;
  if (with_z && max_cells / nw >= 2) {
    nz = 2 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(max_cells / nw - 1)));
  }
  DiscreteInstance inst;
  inst.name = "random/" + std::to_string(seed);
  for (int w = 0; w < nw; ++w) inst.w_levels.push_back(w);
  if (with_z) {
    for (int z = 0; z < nz; ++z) inst.z_levels.push_back(z);
  }
  inst.pmf.resize(nw, nz);
  inst.mu.resize(nw, nz);
  for (Eigen::Index c = 0; c < inst.pmf.size(); ++c) {
    inst.pmf.data()[c] = 0.05 - std::log(rng.uniform_open01());
    inst.mu.data()[c] = rng.uniform01();
  }
  inst.pmf /= inst.pmf.sum();
  return inst;
}

std::vector<std::string> bundled_instance_names() {
  return {"two_point", "stratified", "discrete_synthetic", "lab_ordering"};
}

DiscreteInstance bundled_instance(std::string_view name) {
  DiscreteInstance inst;
  inst.name = std::string(name);
  if (name == "two_point") {
    inst.w_levels = {0, 1};
    inst.pmf.resize(2, 1);
    inst.pmf << 0.5, 0.5;
    inst.mu.resize(2, 1);
    inst.mu << 0.2, 0.8;
  } else if (name == "stratified") {
    inst.w_levels = {0, 1};
    inst.z_levels = {0, 1};
    inst.pmf = Eigen::MatrixXd::Constant(2, 2, 0.25);
    inst.mu.resize(2, 2);
    inst.mu << 0.0, 0.4,
               1.0, 0.6;
  } else if (name == "discrete_synthetic") {
    inst.w_levels = {0, 1, 2};
    inst.z_levels = {0, 1, 2, 3};
    const Eigen::RowVector4d pz(0.3, 0.3, 0.2, 0.2);
    Eigen::Matrix<double, 3, 4> pw;
    pw << 0.50, 0.40, 0.60, 0.30,
          0.30, 0.35, 0.25, 0.40,
          0.20, 0.25, 0.15, 0.30;
    inst.pmf = pw.array().rowwise() * pz.array();
    inst.mu.resize(3, 4);
    inst.mu << 0.10, 0.20, 0.05, 0.15,
               0.35, 0.45, 0.30, 0.50,
               0.70, 0.85, 0.60, 0.90;
  } else if (name == "lab_ordering") {
    // W = test ordered; ordered cells carry the higher loss in every stratum.
    inst.w_levels = {0, 1};
    inst.z_levels = {0, 1, 2, 3};
    const Eigen::RowVector4d pz(0.25, 0.25, 0.25, 0.25);
    const Eigen::RowVector4d ordered(0.2, 0.3, 0.4, 0.5);
    inst.pmf.resize(2, 4);
    inst.pmf.row(0) = (1.0 - ordered.array()) * pz.array();
    inst.pmf.row(1) = ordered.array() * pz.array();
    inst.mu.resize(2, 4);
    inst.mu << 0.05, 0.08, 0.10, 0.12,
               0.30, 0.35, 0.40, 0.50;
  } else {
    throw ConfigError("unknown instance '" + std::string(name) + "'");
  }
  inst.validate();
  return inst;
}

TabularDataset sample_discrete_instance(const DiscreteInstance& inst,
                                        std::size_t n, std::uint64_t seed) {
  inst.validate();
  if (n < 1) throw ConfigError("sample size must be >= 1");
  LossNoise noise = inst.loss_noise;
  const bool unit = (inst.mu.array() >= 0.0).all() && (inst.mu.array() <= 1.0).all();
  if (noise == LossNoise::kAuto) noise = unit ? LossNoise::kBernoulli : LossNoise::kNormal;
  if (noise == LossNoise::kBernoulli && !unit) {
    throw ConfigError("Bernoulli losses need every mu in [0, 1]");
  }

  std::vector<double> cdf(static_cast<std::size_t>(inst.pmf.size()));
  std::partial_sum(inst.pmf.data(), inst.pmf.data() + inst.pmf.size(), cdf.begin());
  Rng rng(derive_seed(seed, "sample_discrete"));
  Column w{"w", ColumnType::kCategorical, {}, {}};
  Column z{"z", ColumnType::kCategorical, {}, {}};
  Column loss{"loss", ColumnType::kNumeric, {}, {}};
  const Eigen::Index nw = inst.pmf.rows();
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform01() * cdf.back();
    auto cell = static_cast<Eigen::Index>(
        std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    cell = std::min<Eigen::Index>(cell, inst.pmf.size() - 1);
    const Eigen::Index wi = cell % nw;
    const Eigen::Index si = cell / nw;
    const double m = inst.mu(wi, si);
    double l = m;
    if (noise == LossNoise::kBernoulli) {
      l = rng.uniform01() < m ? 1.0 : 0.0;
    } else if (noise == LossNoise::kNormal) {
      l = m + inst.normal_sd * rng.standard_normal();
    }
    w.codes.push_back(inst.w_levels[static_cast<std::size_t>(wi)]);
    if (inst.has_z()) z.codes.push_back(inst.z_levels[static_cast<std::size_t>(si)]);
    loss.numeric.push_back(l);
  }
  std::vector<Column> cols;
  cols.push_back(std::move(w));
  if (inst.has_z()) cols.push_back(std::move(z));
  cols.push_back(std::move(loss));
  return TabularDataset(std::move(cols));
}

LearnerFactory oracle_learners(const DiscreteInstance& inst,
                               const EvaluationFrame& frame, double epsilon) {
  inst.validate();
  if (frame.w.sources.size() != 1 ||
      frame.z.sources.size() != (inst.has_z() ? 1u : 0u)) {
    throw ConfigError("oracle learners need one W column and at most one Z column");
  }
  LearnerFactory factory;
  const SourceEncoding w = frame.w.sources.front();
  const SourceEncoding z = inst.has_z() ? frame.z.sources.front() : SourceEncoding{};
  const auto w_cols = static_cast<Eigen::Index>(frame.w.cols());
  factory.make_mean = [inst, w, z, w_cols](std::uint64_t) {
    return std::make_unique<OracleMean>(inst, w, z, w_cols);
  };
  factory.make_quantile = [inst, z, epsilon](std::uint64_t) {
    return std::make_unique<OracleQuantile>(inst, z, epsilon);
  };
  return factory;
}

double rho_from_alpha(double alpha) {
  check_alpha(alpha);
  return -std::log1p(-alpha);
}

double alpha_from_rho(double rho) {
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw DomainError("rho must be >= 0");
  return -std::expm1(-rho);
}

}  // namespace wcrisk
