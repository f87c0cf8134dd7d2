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

#include "wcrisk/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "wcrisk/error.hpp"
#include "wcrisk/learners.hpp"
#include "wcrisk/oracles.hpp"

namespace wcrisk {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!obj.is_object()) throw ConfigError("'" + where + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + key + "' in '" + where + "'");
    }
  }
}

template <typename T>
T read(const json& obj, const std::string& key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("'" + where + "." + key + "' is missing or has the wrong type");
  }
}

template <typename T>
void read_opt(const json& obj, const std::string& key, const std::string& where,
              T& out) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  out = read<T>(obj, key, where);
}

template <typename T>
void read_opt(const json& obj, const std::string& key, const std::string& where,
              std::optional<T>& out) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  out = read<T>(obj, key, where);
}

json hyper_json(const Hyperparameters& h) {
  json out = json::object();
  for (const auto& [k, v] : h) out[k] = v;
  return out;
}

json opt_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

json report_json(const SubsampleReport& r) {
  json rates = json::array();
  for (const MutableRate& m : r.mutable_rates) {
    rates.push_back({{"column", m.column}, {"inside", m.inside}, {"outside", opt_json(m.outside)}});
  }
  json dists = json::array();
  for (const MarginalDistance& d : r.immutable_distances) {
    dists.push_back({{"column", d.column}, {"metric", d.metric}, {"distance", d.distance}});
  }
  json corr = json::array();
  for (const Correlation& c : r.correlations) {
    corr.push_back({{"column", c.column}, {"correlation", opt_json(c.value)},
                    {"defined", c.value.has_value()}});
  }
  return {{"subsample_size", r.subsample_size},
          {"mutable_rates", rates},
          {"immutable_distances", dists},
          {"within_subsample_correlations", corr}};
}

std::vector<double> column_values(const TabularDataset& data, const std::string& name) {
  const Column& col = data.column(name);
  std::vector<double> out(col.size());
  for (std::size_t i = 0; i < col.size(); ++i) out[i] = col.value(i);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.flush();
  if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace

void AnalysisConfig::validate() const {
  if (dataset_path.has_value() == synthetic.has_value()) {
    throw ConfigError("dataset needs exactly one of 'path' or 'synthetic'");
  }
  if (dataset_path && schema.empty()) throw ConfigError("dataset.schema is required with a path");
  if (synthetic && synthetic->n < 1) throw ConfigError("dataset.synthetic.n must be >= 1");
  if (partition.mutable_w.empty()) throw PartitionError("W (mutable) must not be empty");
  loss.validate();
  if (alpha_grid.empty()) throw ConfigError("alpha_grid is empty");
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    if (!(alpha_grid[i] >= 0.0 && alpha_grid[i] < 1.0)) {
      throw ConfigError("alpha_grid values must be in [0, 1)");
    }
    if (i > 0 && !(alpha_grid[i] > alpha_grid[i - 1])) {
      throw ConfigError("alpha_grid must be strictly increasing");
    }
  }
  if (k_folds < 2) throw ConfigError("estimator.k_folds must be >= 2");
  EstimatorConfig est;
  est.epsilon = epsilon;
  est.ci_level = ci_level;
  est.validate();
  grid.validate();
  spline.validate();
  if (max_exact_support < 1 || nystrom_landmarks < 1) {
    throw ConfigError("max_exact_support and nystrom_landmarks must be >= 1");
  }
}

AnalysisConfig parse_config(const json& doc, const fs::path& base_dir) {
  AnalysisConfig cfg;
  check_keys(doc, {"dataset", "partition", "loss", "alpha_grid", "estimator", "report",
                   "output_dir"},
             "config");

  const json& ds = doc.contains("dataset") ? doc.at("dataset") : json();
  check_keys(ds, {"path", "schema", "synthetic"}, "dataset");
  if (ds.contains("path")) {
    fs::path p = read<std::string>(ds, "path", "dataset");
    cfg.dataset_path = p.is_absolute() ? p : base_dir / p;
  }
  if (ds.contains("schema")) {
    const json& schema = ds.at("schema");
    if (!schema.is_object()) throw ConfigError("'dataset.schema' must be an object");
    for (const auto& [name, type] : schema.items()) {
      if (!type.is_string()) throw ConfigError("schema type of '" + name + "' must be a string");
      try {
        cfg.schema[name] = parse_column_type(type.get<std::string>());
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
    }
  }
  if (ds.contains("synthetic")) {
    const json& syn = ds.at("synthetic");
    check_keys(syn, {"instance", "n", "seed"}, "dataset.synthetic");
    SyntheticSource src;
    src.instance = read<std::string>(syn, "instance", "dataset.synthetic");
    src.n = read<std::size_t>(syn, "n", "dataset.synthetic");
    read_opt(syn, "seed", "dataset.synthetic", src.seed);
    cfg.synthetic = src;
  }

  const json& part = doc.contains("partition") ? doc.at("partition") : json();
  check_keys(part, {"mutable", "immutable"}, "partition");
  cfg.partition.mutable_w = read<std::vector<std::string>>(part, "mutable", "partition");
  read_opt(part, "immutable", "partition", cfg.partition.immutable_z);

  const json& loss = doc.contains("loss") ? doc.at("loss") : json();
  check_keys(loss, {"kind", "prediction_column", "label_column", "loss_column", "clip_epsilon"},
             "loss");
  try {
    cfg.loss.kind = parse_loss_kind(read<std::string>(loss, "kind", "loss"));
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  read_opt(loss, "prediction_column", "loss", cfg.loss.prediction_column);
  read_opt(loss, "label_column", "loss", cfg.loss.label_column);
  read_opt(loss, "loss_column", "loss", cfg.loss.loss_column);
  read_opt(loss, "clip_epsilon", "loss", cfg.loss.clip_epsilon);

  read_opt(doc, "alpha_grid", "config", cfg.alpha_grid);

  if (doc.contains("estimator")) {
    const json& est = doc.at("estimator");
    check_keys(est, {"k_folds", "epsilon", "ci_level", "seed", "stratify_by", "inner_folds",
                     "kernel_gamma_grid", "kernel_lambda_grid", "quantile_lambda_grid",
                     "spline", "max_exact_support", "nystrom_landmarks"},
               "estimator");
    read_opt(est, "k_folds", "estimator", cfg.k_folds);
    read_opt(est, "epsilon", "estimator", cfg.epsilon);
    read_opt(est, "ci_level", "estimator", cfg.ci_level);
    read_opt(est, "seed", "estimator", cfg.seed);
    read_opt(est, "stratify_by", "estimator", cfg.stratify_by);
    read_opt(est, "inner_folds", "estimator", cfg.grid.inner_folds);
    read_opt(est, "kernel_gamma_grid", "estimator", cfg.grid.kernel_gammas);
    read_opt(est, "kernel_lambda_grid", "estimator", cfg.grid.kernel_lambdas);
    read_opt(est, "quantile_lambda_grid", "estimator", cfg.grid.quantile_lambdas);
    read_opt(est, "max_exact_support", "estimator", cfg.max_exact_support);
    read_opt(est, "nystrom_landmarks", "estimator", cfg.nystrom_landmarks);
    if (est.contains("spline")) {
      const json& sp = est.at("spline");
      check_keys(sp, {"degree", "knots", "interaction_columns"}, "estimator.spline");
      read_opt(sp, "degree", "estimator.spline", cfg.spline.degree);
      read_opt(sp, "knots", "estimator.spline", cfg.spline.knots_per_column);
      read_opt(sp, "interaction_columns", "estimator.spline", cfg.spline.interaction_columns);
    }
  }
  if (doc.contains("report")) {
    const json& rep = doc.at("report");
    check_keys(rep, {"characterize", "outcome_column", "comparison_loss_columns"}, "report");
    read_opt(rep, "characterize", "report", cfg.characterize);
    read_opt(rep, "outcome_column", "report", cfg.outcome_column);
    read_opt(rep, "comparison_loss_columns", "report", cfg.comparison_loss_columns);
  }
  if (doc.contains("output_dir")) {
    fs::path p = read<std::string>(doc, "output_dir", "config");
    cfg.output_dir = p.is_absolute() ? p : base_dir / p;
  } else {
    cfg.output_dir = base_dir / cfg.output_dir;
  }
  cfg.validate();
  return cfg;
}

AnalysisConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc, fs::absolute(path).parent_path());
}

json config_to_json(const AnalysisConfig& cfg, std::optional<double> resolved_epsilon) {
  json ds = json::object();
  if (cfg.dataset_path) {
    ds["path"] = cfg.dataset_path->generic_string();
    json schema = json::object();
    for (const auto& [name, type] : cfg.schema) schema[name] = std::string(column_type_name(type));
    ds["schema"] = schema;
  }
  if (cfg.synthetic) {
    ds["synthetic"] = {{"instance", cfg.synthetic->instance},
                       {"n", cfg.synthetic->n},
                       {"seed", cfg.synthetic->seed}};
  }
  json loss = {{"kind", std::string(loss_kind_name(cfg.loss.kind))},
               {"clip_epsilon", cfg.loss.clip_epsilon}};
  if (cfg.loss.prediction_column) loss["prediction_column"] = *cfg.loss.prediction_column;
  if (cfg.loss.label_column) loss["label_column"] = *cfg.loss.label_column;
  if (cfg.loss.loss_column) loss["loss_column"] = *cfg.loss.loss_column;
  const std::optional<double> eps = resolved_epsilon ? resolved_epsilon : cfg.epsilon;
  json est = {{"k_folds", cfg.k_folds},
              {"epsilon", opt_json(eps)},
              {"ci_level", cfg.ci_level},
              {"seed", cfg.seed},
              {"stratify_by", cfg.stratify_by ? json(*cfg.stratify_by) : json(nullptr)},
              {"inner_folds", cfg.grid.inner_folds},
              {"kernel_gamma_grid", cfg.grid.kernel_gammas},
              {"kernel_lambda_grid", cfg.grid.kernel_lambdas},
              {"quantile_lambda_grid", cfg.grid.quantile_lambdas},
              {"spline", {{"degree", cfg.spline.degree},
                          {"knots", cfg.spline.knots_per_column},
                          {"interaction_columns", cfg.spline.interaction_columns}}},
              {"max_exact_support", cfg.max_exact_support},
              {"nystrom_landmarks", cfg.nystrom_landmarks}};
  json report = {{"characterize", cfg.characterize},
                 {"outcome_column", cfg.outcome_column ? json(*cfg.outcome_column) : json(nullptr)},
                 {"comparison_loss_columns", cfg.comparison_loss_columns}};
  return {{"dataset", ds},
          {"partition", {{"mutable", cfg.partition.mutable_w},
                         {"immutable", cfg.partition.immutable_z}}},
          {"loss", loss},
          {"alpha_grid", cfg.alpha_grid},
          {"estimator", est},
          {"report", report}};
}

TabularDataset load_analysis_dataset(const AnalysisConfig& cfg) {
  if (cfg.dataset_path) return load_dataset(*cfg.dataset_path, cfg.schema);
  const SyntheticSource& src = *cfg.synthetic;
  if (src.instance == "toy_sine") return generate_toy_sine_fitted(src.n, src.seed);
  return sample_discrete_instance(bundled_instance(src.instance), src.n, src.seed);
}

AnalysisResult run_analysis(const AnalysisConfig& cfg) {
  cfg.validate();
  const TabularDataset data = load_analysis_dataset(cfg);

  // Everything below up to risk_curve is cheap validation against the data.
  const std::vector<std::string> names = data.column_names();
  cfg.partition.validate(names);
  for (const std::optional<std::string>& col :
       {cfg.outcome_column, cfg.stratify_by}) {
    if (col && !data.has_column(*col)) {
      throw ConfigError("column '" + *col + "' is not in the dataset");
    }
  }
  for (const std::string& col : cfg.comparison_loss_columns) {
    if (!data.has_column(col)) throw ConfigError("column '" + col + "' is not in the dataset");
  }
  const std::vector<double> losses = compute_losses(data, cfg.loss);
  const std::size_t n = data.n_rows();
  if (static_cast<std::size_t>(2 * cfg.k_folds) > n) {
    throw InsufficientData("need at least 2 * k_folds = " + std::to_string(2 * cfg.k_folds) +
                           " rows, got " + std::to_string(n));
  }
  FoldAssignment folds;
  if (cfg.stratify_by) {
    const Column& col = data.column(*cfg.stratify_by);
    std::vector<std::int64_t> strata(n);
    for (std::size_t i = 0; i < n; ++i) strata[i] = std::llround(col.value(i));
    folds = assign_folds_stratified(strata, cfg.k_folds, cfg.seed);
  } else {
    folds = assign_folds(n, cfg.k_folds, cfg.seed);
  }

  AnalysisResult result;
  result.frame = build_frame(data, cfg.partition, losses, folds);
  const EvaluationFrame& frame = result.frame;
  std::vector<std::vector<double>> comparisons;
  for (const std::string& col : cfg.comparison_loss_columns) {
    comparisons.push_back(column_values(data, col));
    for (double v : comparisons.back()) {
      if (!std::isfinite(v)) throw DomainError("comparison column '" + col + "' is not finite");
    }
  }
  std::optional<std::vector<double>> outcome;
  if (cfg.outcome_column) outcome = column_values(data, *cfg.outcome_column);

  EstimatorConfig est;
  est.epsilon = cfg.epsilon;
  est.ci_level = cfg.ci_level;
  est.seed = cfg.seed;
  const double epsilon = resolve_epsilon(est, frame);
  KernelRidgeOptions kopt;
  kopt.max_exact_support = cfg.max_exact_support;
  kopt.nystrom_landmarks = cfg.nystrom_landmarks;
  const LearnerFactory learners = reference_learners(cfg.grid, cfg.spline, kopt);

  const std::vector<WorstCaseEstimate> estimates =
      risk_curve(frame, cfg.alpha_grid, est, learners);

  json curve = json::array();
  std::vector<std::string> warnings;
  for (const WorstCaseEstimate& e : estimates) {
    CurvePoint point;
    point.estimate = e;
    if (cfg.characterize) {
      std::optional<std::span<const double>> out_span;
      if (outcome) out_span = std::span<const double>(*outcome);
      point.report = characterize_subsample(frame, e.h_indicators, out_span, e.alpha);
    }
    json cmp = json::object();
    for (std::size_t c = 0; c < comparisons.size(); ++c) {
      const double v = compare_on_subsample(e.h_indicators, comparisons[c]);
      point.comparisons.emplace_back(cfg.comparison_loss_columns[c], v);
      cmp[cfg.comparison_loss_columns[c]] = v;
    }
    json mean_h = json::array(), quant_h = json::array();
    for (const Hyperparameters& h : e.mean_hyperparameters) mean_h.push_back(hyper_json(h));
    for (const Hyperparameters& h : e.quantile_hyperparameters) quant_h.push_back(hyper_json(h));
    for (const std::string& w : e.warnings) {
      if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) warnings.push_back(w);
    }
    curve.push_back({{"alpha", e.alpha},
                     {"rho", rho_from_alpha(e.alpha)},
                     {"r_hat", e.r_hat},
                     {"sigma2", e.sigma2_hat},
                     {"ci", {{"level", e.ci_level}, {"lower", e.ci_lower}, {"upper", e.ci_upper}}},
                     {"subsample_size", e.subsample_size()},
                     {"epsilon_used", e.epsilon_used},
                     {"nuisance", {{"mean", mean_h}, {"quantile", quant_h}}},
                     {"warnings", e.warnings},
                     {"report", point.report ? report_json(*point.report) : json(nullptr)},
                     {"comparisons", cmp}});
    result.curve.points.push_back(std::move(point));
  }
  result.results = {{"schema_version", kResultsSchemaVersion},
                    {"config", config_to_json(cfg, epsilon)},
                    {"n_rows", n},
                    {"warnings", warnings},
                    {"curve", curve}};
  return result;
}

void write_outputs(const AnalysisResult& result, const fs::path& out_dir) {
  const fs::path target = fs::absolute(out_dir).lexically_normal();
  const fs::path tmp = target.parent_path() / (target.filename().string() + ".partial");
  try {
    fs::create_directories(target.parent_path());
    fs::remove_all(tmp);
    fs::create_directories(tmp);

    write_text(tmp / "results.json", result.results.dump(2) + "\n");

    std::ostringstream curve;
    curve << "alpha,r_hat,ci_lo,ci_hi,sigma2\n";
    std::ostringstream h;
    h << "row_id,alpha,h\n";
    for (const CurvePoint& p : result.curve.points) {
      const WorstCaseEstimate& e = p.estimate;
      curve << format_double(e.alpha) << ',' << format_double(e.r_hat) << ','
            << format_double(e.ci_lower) << ',' << format_double(e.ci_upper) << ','
            << format_double(e.sigma2_hat) << '\n';
      const std::string a = format_double(e.alpha);
      for (std::size_t i = 0; i < e.h_indicators.size(); ++i) {
        h << result.frame.row_ids[i] << ',' << a << ',' << int(e.h_indicators[i]) << '\n';
      }
    }
    write_text(tmp / "curve.csv", curve.str());
    write_text(tmp / "h_indicators.csv", h.str());
    emit_plot_data(result.curve, tmp);

    fs::remove_all(target);
    fs::rename(tmp, target);
  } catch (const fs::filesystem_error& e) {
    std::error_code ignored;
    fs::remove_all(tmp, ignored);
    throw IoError(e.what());
  } catch (...) {
    std::error_code ignored;
    fs::remove_all(tmp, ignored);
    throw;
  }
}

}  // namespace wcrisk
