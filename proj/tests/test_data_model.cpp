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

#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "wcrisk/dataset.hpp"
#include "wcrisk/error.hpp"
#include "wcrisk/frame.hpp"
#include "wcrisk/losses.hpp"
#include "wcrisk/oracles.hpp"
#include "wcrisk/rng.hpp"

namespace wcrisk {
namespace {

const Schema kAB = {{"a", ColumnType::kNumeric}, {"b", ColumnType::kCategorical}};

TEST(LoadDataset, ParsesTypedColumns) {
  const TabularDataset d = parse_csv("a,b\n1,0\n2,1\n3,0\n", kAB);
  EXPECT_EQ(d.n_rows(), 3u);
  EXPECT_EQ(d.column("a").numeric, (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(d.column("b").codes, (std::vector<std::int64_t>{0, 1, 0}));
}

TEST(LoadDataset, ExtraColumnIsSchemaMismatch) {
  EXPECT_THROW(parse_csv("a,b\n1,0\n", {{"a", ColumnType::kNumeric}}),
               SchemaMismatch);
  EXPECT_THROW(parse_csv("a\n1\n", kAB), SchemaMismatch);
}

TEST(LoadDataset, MalformedCellNamesRowAndColumn) {
  try {
    parse_csv("a,b\n1,0\nx,1\n", kAB);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_EQ(e.column(), "a");
  }
  EXPECT_THROW(parse_csv("a,b\n1,\n", kAB), ParseError);
  EXPECT_THROW(parse_csv("a,b\n1,0.5\n", kAB), ParseError);
  EXPECT_THROW(parse_csv("a,b\nnan,0\n", kAB), ParseError);
}

TEST(LoadDataset, EmptyBodyIsEmptyDataset) {
  EXPECT_THROW(parse_csv("a,b\n", kAB), EmptyDataset);
}

TEST(LoadDataset, QuotedFieldsAndCrlf) {
  const TabularDataset d = parse_csv("\"a\",b\r\n\"1.5\",2\r\n", kAB);
  EXPECT_EQ(d.column("a").numeric[0], 1.5);
  EXPECT_EQ(d.column("b").codes[0], 2);
}

TEST(LoadDataset, MissingFileIsIoError) {
  EXPECT_THROW(load_dataset("/nonexistent/wcrisk.csv", kAB), IoError);
}

TEST(LoadDataset, WriteThenParseRoundTrips) {
  Rng rng(5);
  std::vector<double> a(200);
  std::vector<std::int64_t> b(200);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = rng.standard_normal() * std::pow(10.0, static_cast<double>(i % 40) - 20.0);
    b[i] = static_cast<std::int64_t>(rng.uniform_index(7)) - 3;
  }
  a[0] = 0.1;
  a[1] = -0.0;
  a[2] = std::numeric_limits<double>::denorm_min();
  const TabularDataset d({Column{"a", ColumnType::kNumeric, a, {}},
                          Column{"b", ColumnType::kCategorical, {}, b}});
  std::ostringstream out;
  write_csv(d, out);
  EXPECT_EQ(parse_csv(out.str(), d.schema()), d);
}

TEST(Losses, ZeroOne) {
  const TabularDataset d({Column{"p", ColumnType::kCategorical, {}, {1, 0, 2}},
                          Column{"y", ColumnType::kCategorical, {}, {1, 1, 2}}});
  LossSpec spec{LossKind::kZeroOne, "p", "y", std::nullopt};
  EXPECT_EQ(compute_losses(d, spec), (std::vector<double>{0.0, 1.0, 0.0}));
}

TEST(Losses, CrossEntropyAtOneHalf) {
  const TabularDataset d({Column{"p", ColumnType::kNumeric, {0.5, 0.0, 1.0}, {}},
                          Column{"y", ColumnType::kCategorical, {}, {1, 1, 1}}});
  LossSpec spec{LossKind::kBinaryCrossEntropy, "p", "y", std::nullopt};
  const std::vector<double> l = compute_losses(d, spec);
  EXPECT_NEAR(l[0], 0.6931471805599453, 1e-15);
  // Clamping bounds the loss by -ln(clip).
  EXPECT_NEAR(l[1], -std::log(1e-12), 1e-9);
  EXPECT_NEAR(l[2], 0.0, 1e-11);
}

TEST(Losses, CrossEntropyDomain) {
  const TabularDataset bad_p({Column{"p", ColumnType::kNumeric, {1.5}, {}},
                              Column{"y", ColumnType::kCategorical, {}, {1}}});
  const TabularDataset bad_y({Column{"p", ColumnType::kNumeric, {0.5}, {}},
                              Column{"y", ColumnType::kCategorical, {}, {2}}});
  LossSpec spec{LossKind::kBinaryCrossEntropy, "p", "y", std::nullopt};
  EXPECT_THROW(compute_losses(bad_p, spec), DomainError);
  EXPECT_THROW(compute_losses(bad_y, spec), DomainError);
}

TEST(Losses, PrecomputedPassesThrough) {
  const TabularDataset d({Column{"l", ColumnType::kNumeric, {0.3, 0.7}, {}}});
  LossSpec spec{LossKind::kPrecomputed, std::nullopt, std::nullopt, "l"};
  EXPECT_EQ(compute_losses(d, spec), (std::vector<double>{0.3, 0.7}));
}

TEST(Losses, SpecValidation) {
  LossSpec both{LossKind::kPrecomputed, "p", "y", "l"};
  EXPECT_THROW(both.validate(), ConfigError);
  LossSpec no_loss{LossKind::kPrecomputed, std::nullopt, std::nullopt, std::nullopt};
  EXPECT_THROW(no_loss.validate(), ConfigError);
  LossSpec clip{LossKind::kBinaryCrossEntropy, "p", "y", std::nullopt, 0.5};
  EXPECT_THROW(clip.validate(), ConfigError);
}

TEST(Losses, CrossEntropyRangeOnToyData) {
  ToySineConfig cfg;
  cfg.n = 2000;
  cfg.b1 = 40.0;  // steep, so some predictions saturate
  const TabularDataset d = generate_toy_sine(cfg);
  LossSpec spec{LossKind::kBinaryCrossEntropy, "prediction", "y", std::nullopt};
  for (double l : compute_losses(d, spec)) {
    ASSERT_TRUE(std::isfinite(l));
    ASSERT_GE(l, 0.0);
    ASSERT_LE(l, -std::log(1e-12) + 1e-9);
  }
}

TEST(Folds, OneRowPerFold) {
  const FoldAssignment f = assign_folds(10, 10, 1);
  for (std::size_t s : f.fold_sizes()) EXPECT_EQ(s, 1u);
}

TEST(Folds, NearEqualSizes) {
  std::vector<std::size_t> sizes = assign_folds(10, 3, 1).fold_sizes();
  std::sort(sizes.begin(), sizes.end());
  EXPECT_EQ(sizes, (std::vector<std::size_t>{3, 3, 4}));
}

TEST(Folds, DeterministicPartition) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 50 + 7 * seed;
    const int k = 2 + static_cast<int>(seed % 6);
    const FoldAssignment a = assign_folds(n, k, seed);
    EXPECT_EQ(a.fold_id, assign_folds(n, k, seed).fold_id);
    const std::vector<std::size_t> sizes = a.fold_sizes();
    EXPECT_EQ(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}), n);
    const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
    EXPECT_LE(*hi - *lo, 1u);
    for (int id : a.fold_id) {
      EXPECT_GE(id, 0);
      EXPECT_LT(id, k);
    }
  }
  EXPECT_NE(assign_folds(100, 5, 1).fold_id, assign_folds(100, 5, 2).fold_id);
}

TEST(Folds, BadK) {
  EXPECT_THROW(assign_folds(10, 1, 0), ConfigError);
  EXPECT_THROW(assign_folds(3, 4, 0), ConfigError);
}

TEST(Folds, StratifiedBalancesRareLabel) {
  std::vector<std::int64_t> labels(1000, 0);
  for (std::size_t i = 0; i < 21; ++i) labels[i * 47] = 1;
  const FoldAssignment f = assign_folds_stratified(labels, 5, 3);
  std::vector<int> positives(5, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) positives[f.fold_id[i]] += labels[i];
  for (int p : positives) EXPECT_GE(p, 4);
  const std::vector<std::size_t> sizes = f.fold_sizes();
  const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
  EXPECT_LE(*hi - *lo, 1u);
}

TabularDataset toy(std::size_t n) {
  ToySineConfig cfg;
  cfg.n = n;
  cfg.seed = 11;
  return generate_toy_sine(cfg);
}

TEST(BuildFrame, UnconstrainedToyPartition) {
  const TabularDataset d = toy(50);
  const std::vector<double> losses(50, 1.0);
  const EvaluationFrame f = build_frame(d, VariablePartition{{}, {"x1", "x2"}}, losses,
                                        assign_folds(50, 5, 0));
  EXPECT_EQ(f.z.values.cols(), 0);
  ASSERT_EQ(f.w.values.cols(), 2);
  EXPECT_EQ(f.w.values(7, 0), d.column("x1").numeric[7]);
  EXPECT_EQ(f.w.values(7, 1), d.column("x2").numeric[7]);
  EXPECT_EQ(f.wz().cols(), 2);
}

TEST(BuildFrame, ConditionalToyPartition) {
  const TabularDataset d = toy(50);
  const std::vector<double> losses(50, 1.0);
  const EvaluationFrame f = build_frame(d, VariablePartition{{"x1"}, {"x2"}}, losses,
                                        assign_folds(50, 5, 0));
  ASSERT_EQ(f.z.values.cols(), 1);
  ASSERT_EQ(f.w.values.cols(), 1);
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_EQ(f.z.values(static_cast<Eigen::Index>(i), 0), d.column("x1").numeric[i]);
    EXPECT_EQ(f.w.values(static_cast<Eigen::Index>(i), 0), d.column("x2").numeric[i]);
    EXPECT_EQ(f.row_ids[i], i);
  }
  EXPECT_FALSE(f.w_all_discrete());
}

TEST(BuildFrame, OverlapIsPartitionError) {
  const TabularDataset d = toy(10);
  const std::vector<double> losses(10, 1.0);
  EXPECT_THROW(build_frame(d, VariablePartition{{"x1"}, {"x1", "x2"}}, losses,
                           assign_folds(10, 2, 0)),
               PartitionError);
  EXPECT_THROW(build_frame(d, VariablePartition{{"x1"}, {}}, losses,
                           assign_folds(10, 2, 0)),
               PartitionError);
  EXPECT_THROW(build_frame(d, VariablePartition{{}, {"nope"}}, losses,
                           assign_folds(10, 2, 0)),
               ConfigError);
}

TEST(BuildFrame, OneHotRowsSumToOne) {
  const TabularDataset d = sample_discrete_instance(
      bundled_instance("discrete_synthetic"), 500, 4);
  const std::vector<double>& losses = d.column("loss").numeric;
  const EvaluationFrame f = build_frame(d, VariablePartition{{"z"}, {"w"}}, losses,
                                        assign_folds(500, 5, 0));
  EXPECT_TRUE(f.w_all_discrete());
  for (const FeatureBlock* block : {&f.w, &f.z}) {
    for (const SourceEncoding& src : block->sources) {
      ASSERT_EQ(src.type, ColumnType::kCategorical);
      ASSERT_EQ(src.levels.size(), src.width);
      const Eigen::VectorXd sums =
          block->values.middleCols(static_cast<Eigen::Index>(src.first),
                                   static_cast<Eigen::Index>(src.width))
              .rowwise()
              .sum();
      EXPECT_TRUE((sums.array() == 1.0).all());
    }
  }
  EXPECT_EQ(f.w.column_names.front().rfind("w=", 0), 0u);
}

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  Rng a(derive_seed(1, "noise")), b(derive_seed(1, "noise")), c(derive_seed(1, "folds"));
  const std::uint64_t x = a.next_u64();
  EXPECT_EQ(x, b.next_u64());
  EXPECT_NE(x, c.next_u64());
  EXPECT_NE(derive_seed(1, "mean", 0), derive_seed(1, "mean", 1));
}

TEST(Rng, NormalQuantileInvertsCdf) {
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
  for (double p : {1e-10, 0.001, 0.2, 0.5, 0.7, 0.999}) {
    EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-14 + 1e-12 * p);
  }
}

}  // namespace
}  // namespace wcrisk
