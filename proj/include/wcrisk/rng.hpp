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

// Reproducible random streams.
//
// Every stream is a std::mt19937_64 (whose output sequence is fixed by the
// C++ standard) seeded through SplitMix64. Uniforms take the top 53 bits of a
// draw; bounded integers use rejection sampling; normals are the inverse
// normal CDF of a uniform. None of this goes through <random> distributions,
// whose output is implementation-defined, so datasets reproduce bit-for-bit
// across standard libraries.

#ifndef WCRISK_RNG_HPP_
#define WCRISK_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace wcrisk {

std::uint64_t splitmix64(std::uint64_t x);

// Derives an independent seed for a named sub-stream.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream,
                          std::uint64_t index = 0);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform01();

  // Uniform on the open interval (0, 1); used where a quantile transform
  // cannot accept 0.
  double uniform_open01();

  // Uniform integer in [0, bound).
  std::uint64_t uniform_index(std::uint64_t bound);

  double standard_normal();

  // Uniformly random permutation of 0..n-1 (Fisher-Yates).
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

// Inverse of the standard normal CDF (Wichura's AS 241, PPND16), accurate to
// about 1e-16 relative over (0, 1). Returns -inf / +inf at 0 / 1.
double normal_quantile(double p);

double normal_cdf(double x);

}  // namespace wcrisk

#endif  // WCRISK_RNG_HPP_
