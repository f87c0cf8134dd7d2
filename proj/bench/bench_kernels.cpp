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

// Serial reference vs OpenMP kernels. Run with OMP_NUM_THREADS set to compare
// team sizes; the parallel path is skipped for small inputs (n <= 256).

#include <benchmark/benchmark.h>

#include "wcrisk/kernels.hpp"
#include "wcrisk/rng.hpp"

namespace wcrisk::kernels {
namespace {

RowMatrix random_rows(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  RowMatrix m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = rng.standard_normal();
  return m;
}

template <bool kParallel>
void BM_RbfCross(benchmark::State& state) {
  const RowMatrix a = random_rows(state.range(0), 4, 1);
  const RowMatrix b = random_rows(400, 4, 2);
  for (auto _ : state) {
    Eigen::MatrixXd k = kParallel ? parallel::rbf_cross(a, b, 0.5) : serial::rbf_cross(a, b, 0.5);
    benchmark::DoNotOptimize(k.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 400);
}

template <bool kParallel>
void BM_RbfApply(benchmark::State& state) {
  const RowMatrix x = random_rows(state.range(0), 4, 3);
  const RowMatrix s = random_rows(2000, 4, 4);
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(2000);
  for (auto _ : state) {
    Eigen::VectorXd y = kParallel ? parallel::rbf_apply(x, s, w, 0.5) : serial::rbf_apply(x, s, w, 0.5);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 2000);
}

template <bool kParallel>
void BM_PinballPass(benchmark::State& state) {
  // Spline-like design: one continuous column makes every row its own group.
  const Eigen::Index n = state.range(0);
  RowMatrix d = random_rows(n, 10, 5);
  d.col(0).setOnes();
  Rng rng(6);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = rng.standard_normal();
  const PinballGroups g = group_pinball_targets(d, y);
  const Eigen::VectorXd beta = Eigen::VectorXd::Constant(10, 0.01);
  for (auto _ : state) {
    PinballPass p = kParallel ? parallel::pinball_pass(g, beta, 0.7, 1e-3, true)
                              : serial::pinball_pass(g, beta, 0.7, 1e-3, true);
    benchmark::DoNotOptimize(p.objective);
  }
  state.SetItemsProcessed(state.iterations() * n);
}

BENCHMARK(BM_RbfCross<false>)->Name("rbf_cross/serial")->Arg(2000)->Arg(8000);
BENCHMARK(BM_RbfCross<true>)->Name("rbf_cross/parallel")->Arg(2000)->Arg(8000);
BENCHMARK(BM_RbfApply<false>)->Name("rbf_apply/serial")->Arg(4000)->Arg(16000);
BENCHMARK(BM_RbfApply<true>)->Name("rbf_apply/parallel")->Arg(4000)->Arg(16000);
BENCHMARK(BM_PinballPass<false>)->Name("pinball_pass/serial")->Arg(16000)->Arg(64000);
BENCHMARK(BM_PinballPass<true>)->Name("pinball_pass/parallel")->Arg(16000)->Arg(64000);

}  // namespace
}  // namespace wcrisk::kernels

BENCHMARK_MAIN();
