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

// wcrisk analyze | synth | oracle

#include <CLI11.hpp>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "wcrisk/analysis.hpp"
#include "wcrisk/dataset.hpp"
#include "wcrisk/error.hpp"
#include "wcrisk/kernels.hpp"
#include "wcrisk/oracles.hpp"

namespace {

using nlohmann::json;

void print_error(const std::string& type, const std::string& kind,
                 const std::string& message) {
  const json line = {{"error", type}, {"kind", kind}, {"message", message}};
  std::cerr << line.dump() << std::endl;
}

std::vector<double> parse_alpha_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    const std::string item = text.substr(start, end - start);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw wcrisk::ConfigError("--alpha-grid: cannot parse '" + item + "'");
    }
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

int run_analyze(const std::string& config_path, const std::optional<std::string>& out,
                const std::optional<std::uint64_t>& seed,
                const std::optional<std::string>& alpha_grid, int threads) {
  wcrisk::AnalysisConfig cfg = wcrisk::load_config(config_path);
  if (out) cfg.output_dir = *out;
  if (seed) cfg.seed = *seed;
  if (alpha_grid) cfg.alpha_grid = parse_alpha_list(*alpha_grid);
  cfg.validate();
  wcrisk::kernels::set_thread_count(threads);

  const wcrisk::AnalysisResult result = wcrisk::run_analysis(cfg);
  wcrisk::write_outputs(result, cfg.output_dir);
  for (const wcrisk::CurvePoint& p : result.curve.points) {
    const wcrisk::WorstCaseEstimate& e = p.estimate;
    std::printf("alpha=%-6g r_hat=%.6f ci=[%.6f, %.6f] n_sub=%zu\n", e.alpha, e.r_hat,
                e.ci_lower, e.ci_upper, e.subsample_size());
  }
  for (const auto& w : result.results.at("warnings")) {
    std::fprintf(stderr, "warning: %s\n", w.get<std::string>().c_str());
  }
  std::printf("wrote %s\n", cfg.output_dir.string().c_str());
  return 0;
}

int run_synth(const std::string& instance, std::size_t n, std::uint64_t seed,
              const std::optional<std::string>& out) {
  const wcrisk::TabularDataset data =
      instance == "toy_sine"
          ? wcrisk::generate_toy_sine_fitted(n, seed)
          : wcrisk::sample_discrete_instance(wcrisk::bundled_instance(instance), n, seed);
  if (out) {
    wcrisk::write_csv(data, std::filesystem::path(*out));
  } else {
    wcrisk::write_csv(data, std::cout);
  }
  return 0;
}

int run_oracle(const std::string& name, double alpha, double epsilon) {
  const wcrisk::DiscreteInstance inst = wcrisk::bundled_instance(name);
  json out = {{"instance", name},
              {"alpha", alpha},
              {"rho", wcrisk::rho_from_alpha(alpha)},
              {"worst_case", wcrisk::exact_worst_case_discrete(inst, alpha)},
              {"unconstrained", wcrisk::exact_worst_case_discrete(wcrisk::unconstrained(inst), alpha)}};
  if (alpha > 0.0) out["dual"] = wcrisk::exact_dual_check(inst, alpha).dual;
  const Eigen::VectorXd t = wcrisk::exact_thresholds(inst, alpha, epsilon);
  out["thresholds"] = std::vector<double>(t.data(), t.data() + t.size());
  if (epsilon > 0.0) {
    out["epsilon"] = epsilon;
    out["noisy_worst_case"] = wcrisk::exact_noisy_worst_case(inst, alpha, epsilon);
  }
  std::cout << out.dump(2) << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Worst-case risk of a fixed model under conditional distribution shift"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> alpha_grid;
  int threads = 0;
  CLI::App* analyze = app.add_subcommand("analyze", "Run a configured analysis");
  analyze->add_option("--config", config_path, "Analysis config (JSON)")->required();
  analyze->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  analyze->add_option("--seed", seed, "Estimator seed (overrides estimator.seed)");
  analyze->add_option("--alpha-grid", alpha_grid, "Comma-separated alphas");
  analyze->add_option("--threads", threads, "OpenMP threads (0 = runtime default)")
      ->check(CLI::NonNegativeNumber);

  std::string instance;
  std::size_t n = 0;
  std::uint64_t synth_seed = 0;
  std::optional<std::string> synth_out;
  CLI::App* synth = app.add_subcommand("synth", "Emit a bundled synthetic dataset as CSV");
  synth->add_option("--instance", instance, "Instance name")->required();
  synth->add_option("--n", n, "Row count")->required();
  synth->add_option("--seed", synth_seed, "Sampling seed")->required();
  synth->add_option("--out", synth_out, "Output file (default: stdout)");

  std::string oracle_instance;
  double alpha = 0.0;
  double epsilon = 0.0;
  CLI::App* oracle = app.add_subcommand("oracle", "Print exact worst-case values");
  oracle->add_option("--instance", oracle_instance, "Bundled discrete instance")->required();
  oracle->add_option("--alpha", alpha, "Shift level in [0, 1)")->required();
  oracle->add_option("--epsilon", epsilon, "Uniform noise width (default 0)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("UsageError", "config", e.what());
    return wcrisk::exit_code_for(wcrisk::ErrorKind::kConfig);
  }

  try {
    if (*analyze) return run_analyze(config_path, out_dir, seed, alpha_grid, threads);
    if (*synth) return run_synth(instance, n, synth_seed, synth_out);
    if (*oracle) return run_oracle(oracle_instance, alpha, epsilon);
  } catch (const wcrisk::Error& e) {
    print_error(e.type(), wcrisk::error_kind_name(e.kind()), e.what());
    return wcrisk::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    print_error("InternalError", "internal", e.what());
    return 1;
  }
  return 0;
}
