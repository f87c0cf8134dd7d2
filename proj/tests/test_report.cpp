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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gtest/gtest.h"
#include "support.hpp"
#include "wcrisk/analysis.hpp"
#include "wcrisk/error.hpp"
#include "wcrisk/oracles.hpp"
#include "wcrisk/report.hpp"

namespace wcrisk {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing_support::discrete_frame;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() /
                     ("wcrisk_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<std::uint8_t> select_where(const Eigen::VectorXd& col) {
  std::vector<std::uint8_t> h(static_cast<std::size_t>(col.size()));
  for (Eigen::Index i = 0; i < col.size(); ++i) h[static_cast<std::size_t>(i)] = col[i] == 1.0;
  return h;
}

TEST(Wasserstein, KnownDistances) {
  const std::vector<double> a = {0, 1, 2, 3}, b = {0, 1, 2, 3};
  EXPECT_EQ(wasserstein1(a, b), 0.0);
  const std::vector<double> shifted = {1, 2, 3, 4};
  EXPECT_NEAR(wasserstein1(shifted, a), 1.0, 1e-15);
  // Point mass at 0 against uniform {0, 1, 2, 3}: mean |x| = 1.5.
  const std::vector<double> zero = {0};
  EXPECT_NEAR(wasserstein1(zero, a), 1.5, 1e-15);
}

TEST(Characterize, FullSubsampleHasZeroDistance) {
  const EvaluationFrame f = discrete_frame(bundled_instance("discrete_synthetic"), 600, 1);
  const std::vector<std::uint8_t> h(600, 1);
  const SubsampleReport r = characterize_subsample(f, h, std::nullopt, 0.0);
  EXPECT_EQ(r.subsample_size, 600u);
  ASSERT_EQ(r.immutable_distances.size(), 1u);
  EXPECT_EQ(r.immutable_distances[0].metric, "total_variation");
  EXPECT_EQ(r.immutable_distances[0].distance, 0.0);
  for (const MutableRate& m : r.mutable_rates) EXPECT_FALSE(m.outside.has_value());
  EXPECT_TRUE(r.correlations.empty());
}

TEST(Characterize, SelectingOnWGivesUnitRate) {
  const EvaluationFrame f = discrete_frame(bundled_instance("lab_ordering"), 800, 2);
  ASSERT_EQ(f.w.column_names[1], "w=1");
  const std::vector<std::uint8_t> h = select_where(f.w.values.col(1));
  const std::vector<double> loss(f.losses.data(), f.losses.data() + f.n());
  const SubsampleReport r = characterize_subsample(f, h, loss, 0.5);
  EXPECT_EQ(r.mutable_rates[1].inside, 1.0);
  EXPECT_EQ(*r.mutable_rates[1].outside, 0.0);
  // w=1 is constant inside, so its correlation is undefined.
  EXPECT_FALSE(r.correlations[1].value.has_value());
  EXPECT_GE(r.immutable_distances[0].distance, 0.0);
}

TEST(Characterize, NumericZUsesWasserstein) {
  ToySineConfig cfg;
  cfg.n = 400;
  const TabularDataset d = generate_toy_sine(cfg);
  const EvaluationFrame f = testing_support::frame_from(
      d, VariablePartition{{"x1"}, {"x2"}}, "loss", 4, 0);
  std::vector<std::uint8_t> h(400, 0);
  std::vector<double> sub, full(d.column("x1").numeric);
  for (std::size_t i = 0; i < 400; ++i) {
    if (d.column("x2").numeric[i] > 0) {
      h[i] = 1;
      sub.push_back(d.column("x1").numeric[i]);
    }
  }
  const SubsampleReport r = characterize_subsample(f, h, std::nullopt);
  EXPECT_EQ(r.immutable_distances[0].metric, "wasserstein1");
  EXPECT_EQ(r.immutable_distances[0].distance, wasserstein1(sub, full));
}

TEST(Characterize, Errors) {
  const EvaluationFrame f = discrete_frame(bundled_instance("two_point"), 50, 2);
  EXPECT_THROW(characterize_subsample(f, std::vector<std::uint8_t>(50, 0), std::nullopt),
               EmptySubsample);
  EXPECT_THROW(characterize_subsample(f, std::vector<std::uint8_t>(49, 1), std::nullopt),
               DimensionMismatch);
}

TEST(Characterize, OrderingRateRisesWithAlpha) {
  // Oracle selection sets: per stratum, the worst cells have w = 1.
  const DiscreteInstance inst = bundled_instance("lab_ordering");
  const EvaluationFrame f = discrete_frame(inst, 20000, 3);
  const double eps = 1e-5;
  double prev = 0.0;
  for (double alpha : {0.0, 0.2, 0.4, 0.6, 0.8, 0.95}) {
    EstimatorConfig cfg;
    cfg.alpha = alpha;
    cfg.epsilon = eps;
    const WorstCaseEstimate e = estimate_worst_case(f, cfg, oracle_learners(inst, f, eps));
    const SubsampleReport r = characterize_subsample(f, e.h_indicators, std::nullopt, alpha);
    EXPECT_GE(r.mutable_rates[1].inside, prev - 1e-12) << alpha;
    prev = r.mutable_rates[1].inside;
  }
  EXPECT_GT(prev, 0.99);
}

TEST(Compare, Identities) {
  const EvaluationFrame f = discrete_frame(bundled_instance("lab_ordering"), 500, 4);
  EstimatorConfig cfg;
  cfg.alpha = 0.5;
  const WorstCaseEstimate e =
      estimate_worst_case(f, cfg, oracle_learners(bundled_instance("lab_ordering"), f, 1e-5));
  const std::vector<double> loss(f.losses.data(), f.losses.data() + f.n());
  double sum = 0.0;
  for (std::size_t i = 0; i < loss.size(); ++i) sum += e.h_indicators[i] * loss[i];
  EXPECT_NEAR(compare_on_subsample(e.h_indicators, loss), sum / e.subsample_size(), 1e-15);
  EXPECT_EQ(compare_on_subsample(e.h_indicators, std::vector<double>(500, 0.0)), 0.0);
  const std::vector<double> w1(f.w.values.col(1).data(), f.w.values.col(1).data() + 500);
  const SubsampleReport r = characterize_subsample(f, e.h_indicators, std::nullopt, 0.5);
  EXPECT_NEAR(compare_on_subsample(e.h_indicators, w1), r.mutable_rates[1].inside, 1e-15);
  EXPECT_THROW(compare_on_subsample(std::vector<std::uint8_t>(500, 0), loss), EmptySubsample);
}

RiskCurve tiny_curve(std::vector<double> alphas) {
  RiskCurve c;
  for (double a : alphas) {
    CurvePoint p;
    p.estimate.alpha = a;
    p.estimate.r_hat = 0.5 + a;
    p.estimate.h_indicators = {1, 0, 1};
    SubsampleReport r;
    r.alpha = a;
    r.subsample_size = 2;
    r.mutable_rates = {{"w", 0.25, 0.5}};
    r.immutable_distances = {{"z", "wasserstein1", a}};
    r.correlations = {{"w", std::nullopt}};
    p.report = r;
    c.points.push_back(p);
  }
  return c;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream s(text);
  for (std::string line; std::getline(s, line);) out.push_back(line);
  return out;
}

TEST(EmitPlotData, SinglePointHasHeaderAndOneRow) {
  const fs::path dir = scratch_dir("emit1");
  emit_plot_data(tiny_curve({0.5}), dir);
  for (const char* f : {"risk_curve.csv", "mutable_rates.csv", "correlations.csv",
                        "immutable_distances.csv"}) {
    EXPECT_EQ(lines(slurp(dir / f)).size(), 2u) << f;
  }
  EXPECT_EQ(lines(slurp(dir / "risk_curve.csv"))[0],
            "alpha,rho,r_hat,ci_lo,ci_hi,sigma2,subsample_size");
  fs::remove_all(dir);
}

TEST(EmitPlotData, RowsSortedByAlpha) {
  const fs::path dir = scratch_dir("emit3");
  RiskCurve c = tiny_curve({0.9, 0.1, 0.5});
  emit_plot_data(c, dir);
  const std::vector<std::string> rows = lines(slurp(dir / "risk_curve.csv"));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[1].rfind("0.1,", 0), 0u);
  EXPECT_EQ(rows[2].rfind("0.5,", 0), 0u);
  EXPECT_EQ(rows[3].rfind("0.9,", 0), 0u);
  EXPECT_THROW(emit_plot_data(c, "/proc/wcrisk/none"), IoError);
  fs::remove_all(dir);
}

json small_config() {
  return json::parse(R"({
    "dataset": {"synthetic": {"instance": "lab_ordering", "n": 600, "seed": 3}},
    "partition": {"mutable": ["w"], "immutable": ["z"]},
    "loss": {"kind": "precomputed", "loss_column": "loss"},
    "alpha_grid": [0.0, 0.5],
    "estimator": {"k_folds": 3, "seed": 9, "inner_folds": 3,
                  "kernel_gamma_grid": [1.0], "kernel_lambda_grid": [0.01],
                  "quantile_lambda_grid": [0.01, 1.0]},
    "report": {"outcome_column": "loss", "comparison_loss_columns": ["loss"]}
  })");
}

TEST(Analysis, AlphaZeroMatchesMeanLoss) {
  json doc = small_config();
  doc["alpha_grid"] = {0.0};
  const AnalysisResult r = run_analysis(parse_config(doc, "."));
  const double mean = r.frame.losses.mean();
  EXPECT_NEAR(r.results["curve"][0]["r_hat"].get<double>(), mean, 1e-12);
  EXPECT_EQ(r.results["schema_version"], kResultsSchemaVersion);
}

TEST(Analysis, ConfigEchoRoundTrips) {
  const AnalysisConfig cfg = parse_config(small_config(), ".");
  const json echo = config_to_json(cfg, 1e-5);
  EXPECT_EQ(echo["estimator"]["epsilon"], 1e-5);
  EXPECT_EQ(echo["estimator"]["ci_level"], 0.95);  // defaulted, still echoed
  const AnalysisConfig again = parse_config(echo, ".");
  EXPECT_EQ(config_to_json(again, 1e-5), echo);
}

TEST(Analysis, RejectsBadConfigs) {
  auto expect_config_error = [](json doc) {
    EXPECT_THROW(parse_config(doc, ".").validate(), ConfigError) << doc.dump();
  };
  json unknown = small_config();
  unknown["estimator"]["kfolds"] = 5;
  expect_config_error(unknown);
  json grid = small_config();
  grid["alpha_grid"] = {0.5, 0.2};
  expect_config_error(grid);
  json alpha = small_config();
  alpha["alpha_grid"] = {0.0, 1.0};
  expect_config_error(alpha);
  json folds = small_config();
  folds["estimator"]["k_folds"] = 1;
  expect_config_error(folds);

  json overlap = small_config();
  overlap["partition"]["immutable"] = {"w"};
  try {
    run_analysis(parse_config(overlap, "."));
    FAIL();
  } catch (const PartitionError& e) {
    EXPECT_NE(std::string(e.what()).find("'w'"), std::string::npos);
  }
}

TEST(Analysis, WritesOutputsAndReplacesTarget) {
  const fs::path dir = scratch_dir("outputs");
  const AnalysisResult r = run_analysis(parse_config(small_config(), "."));
  write_outputs(r, dir / "run");
  for (const char* f : {"results.json", "curve.csv", "h_indicators.csv", "risk_curve.csv"}) {
    EXPECT_TRUE(fs::exists(dir / "run" / f)) << f;
  }
  EXPECT_FALSE(fs::exists(dir / "run.partial"));
  const json doc = json::parse(slurp(dir / "run" / "results.json"));
  ASSERT_EQ(doc["curve"].size(), 2u);
  const json& p = doc["curve"][1];
  EXPECT_LE(p["ci"]["lower"].get<double>(), p["r_hat"].get<double>());
  EXPECT_EQ(p["comparisons"]["loss"].get<double>() > 0.0, true);
  // Rows of h_indicators: header plus N per alpha.
  EXPECT_EQ(lines(slurp(dir / "run" / "h_indicators.csv")).size(), 1u + 2 * 600);
  // A second write replaces the directory wholesale.
  write_outputs(r, dir / "run");
  EXPECT_EQ(slurp(dir / "run" / "results.json"), doc.dump(2) + "\n");
  fs::remove_all(dir);
}

TEST(Analysis, CsvDatasetWithRelativePath) {
  const fs::path dir = scratch_dir("csv");
  {
    std::ofstream out(dir / "data.csv");
    write_csv(sample_discrete_instance(bundled_instance("stratified"), 300, 1), out);
  }
  const json doc = json::parse(R"({
    "dataset": {"path": "data.csv",
                "schema": {"w": "categorical", "z": "categorical", "loss": "numeric"}},
    "partition": {"mutable": ["w"], "immutable": ["z"]},
    "loss": {"kind": "precomputed", "loss_column": "loss"},
    "alpha_grid": [0.0]
  })");
  const AnalysisConfig cfg = parse_config(doc, dir);
  EXPECT_EQ(*cfg.dataset_path, dir / "data.csv");
  EXPECT_EQ(load_analysis_dataset(cfg).n_rows(), 300u);
  fs::remove_all(dir);
}

// ---- CLI ------------------------------------------------------------------

struct CliRun {
  int exit_code;
  std::string out;
};

CliRun run_cli(const std::string& args) {
  const std::string cmd = std::string(WCRISK_CLI) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int status = pclose(pipe);
  return {WEXITSTATUS(status), out};
}

fs::path write_config(const fs::path& dir, const json& doc) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << doc.dump(2);
  return p;
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch_dir("cli_codes");
  EXPECT_EQ(run_cli("").exit_code, 2);
  json grid = small_config();
  grid["alpha_grid"] = {0.5, 0.2};
  const CliRun bad = run_cli("analyze --config " + write_config(dir, grid).string());
  EXPECT_EQ(bad.exit_code, 2);
  const json err = json::parse(bad.out);
  EXPECT_EQ(err["error"], "ConfigError");

  json missing = small_config();
  missing["dataset"] = json::parse(R"({"path": "nope.csv", "schema": {"w": "numeric"}})");
  EXPECT_NE(run_cli("analyze --config " + write_config(dir, missing).string()).exit_code, 0);

  {
    std::ofstream(dir / "bad.csv") << "w,z,loss\n1,0,x\n";
  }
  json parse = small_config();
  parse["dataset"] = json::parse(
      R"({"path": "bad.csv", "schema": {"w": "categorical", "z": "categorical", "loss": "numeric"}})");
  const CliRun data = run_cli("analyze --config " + write_config(dir, parse).string());
  EXPECT_EQ(data.exit_code, 3);
  EXPECT_EQ(json::parse(data.out)["error"], "ParseError");

  // Nothing left behind on failure.
  EXPECT_FALSE(fs::exists(dir / "wcrisk_out"));
  fs::remove_all(dir);
}

TEST(Cli, OracleAndSynth) {
  const CliRun o = run_cli("oracle --instance two_point --alpha 0.5 --epsilon 0.1");
  ASSERT_EQ(o.exit_code, 0);
  const json doc = json::parse(o.out);
  EXPECT_NEAR(doc["worst_case"].get<double>(), 0.8, 1e-15);
  EXPECT_NEAR(doc["noisy_worst_case"].get<double>(), 0.85, 1e-15);
  EXPECT_NEAR(doc["rho"].get<double>(), std::log(2.0), 1e-15);
  EXPECT_EQ(run_cli("oracle --instance nope --alpha 0.5").exit_code, 2);

  const CliRun s = run_cli("synth --instance stratified --n 50 --seed 4");
  ASSERT_EQ(s.exit_code, 0);
  std::stringstream want;
  write_csv(sample_discrete_instance(bundled_instance("stratified"), 50, 4), want);
  EXPECT_EQ(s.out, want.str());
}

TEST(Cli, AnalyzeIsDeterministicAcrossThreads) {
  const fs::path dir = scratch_dir("cli_det");
  const fs::path cfg = write_config(dir, small_config());
  ASSERT_EQ(run_cli("analyze --config " + cfg.string() + " --out " + (dir / "a").string() +
                    " --threads 1").exit_code, 0);
  ASSERT_EQ(run_cli("analyze --config " + cfg.string() + " --out " + (dir / "b").string() +
                    " --threads 3").exit_code, 0);
  for (const char* f : {"results.json", "curve.csv", "h_indicators.csv", "risk_curve.csv",
                        "mutable_rates.csv", "correlations.csv", "immutable_distances.csv"}) {
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
  // Overrides land in the echoed config.
  ASSERT_EQ(run_cli("analyze --config " + cfg.string() + " --out " + (dir / "c").string() +
                    " --seed 77 --alpha-grid 0,0.3").exit_code, 0);
  const json c = json::parse(slurp(dir / "c" / "results.json"));
  EXPECT_EQ(c["config"]["estimator"]["seed"], 77);
  EXPECT_EQ(c["config"]["alpha_grid"], json::parse("[0.0, 0.3]"));
  fs::remove_all(dir);
}

}  // namespace
}  // namespace wcrisk
