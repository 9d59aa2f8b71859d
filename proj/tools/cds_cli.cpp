// Copyright 2026 The CDS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// cds: consistent data selection outlier detection from the command line.
//
//   cds prepare  raw file or synthetic N:M -> prepared.csv (features + label)
//   cds score    prepared.csv               -> scores.csv
//   cds split    scores.csv                 -> pools.csv, histogram.csv
//   cds detect   prepared.csv + pools.csv   -> report.txt, report.csv, points.csv, model.json
//   cds run      all of the above in one go
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 convergence failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cds/dataset.hpp"
#include "cds/ensemble.hpp"
#include "cds/errors.hpp"
#include "cds/pipeline.hpp"
#include "cds/pool_split.hpp"
#include "cds/text.hpp"

namespace fs = std::filesystem;

namespace
{

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitConvergence = 4;

struct Common
{
  std::string out_dir = ".";
  unsigned threads = 0;
};

struct InputArgs
{
  std::string input;
  std::string preset;
  std::string missing = "?";
  std::string label_col;
  std::vector<std::string> skip_cols;
  char delimiter = ',';
  bool header = false;
  double group_threshold = 0.05;
  std::vector<std::string> outlier_classes;
};

struct PrepareArgs
{
  InputArgs in;
  std::string synthetic;
  std::size_t dims = 10;
  std::uint64_t seed = 1;
  std::string output;
};

struct ScoreArgs
{
  std::string input;
  std::string preset;
  std::vector<int> k;
  std::uint64_t seed = 0;
  int max_iter = 300;
  double tol = 1e-6;
  bool zscore = false;
  std::string output;
};

struct SplitArgs
{
  std::string scores;
  std::string input;
  std::string preset;
  std::optional<double> theta;
  std::string comparator;
  double bucket_width = 0.1;
  bool suggest = false;
  double suggest_min_pool = 0.01;
};

struct DetectArgs
{
  std::string input;
  std::string pools;
  std::string classifier = "svm";
  double nu = 0.5;
  std::string kernel = "polynomial";
  int degree = 3;
  double gamma = 0.0;
  double coef0 = 0.0;
  double svm_tol = 1e-3;
  int max_passes = 1000;
  std::size_t gram_cache = 8192;
  double shrinkage = 0.1;
  std::optional<double> ridge;
  double quantile = 0.975;
  bool standardize = false;
  bool score_consistent = false;
};

fs::path output_path(const Common & common, const std::string & explicit_path, const char * default_name)
{
  if (!explicit_path.empty()) {
    return explicit_path;
  }
  fs::create_directories(common.out_dir);
  return fs::path(common.out_dir) / default_name;
}

std::ofstream open_out(const fs::path & path)
{
  std::ofstream out(path);
  if (!out) {
    throw cds::DataError("cannot write " + path.string());
  }
  return out;
}

/// Prepared files carry a header; the label column is used when present.
cds::Dataset load_prepared(const std::string & path)
{
  std::ifstream probe(path);
  if (!probe) {
    throw cds::DataError("cannot open " + path);
  }
  std::string first;
  std::getline(probe, first);
  const auto header = cds::text::split(first, ',');
  cds::LoadOptions opts;
  opts.has_header = true;
  if (!header.empty() && header.back() == "label") {
    opts.label_column = "label";
  }
  return cds::load_delimited(path, opts);
}

cds::Dataset load_raw(const InputArgs & args)
{
  cds::LoadOptions load;
  cds::GroupingOptions grouping;
  if (!args.preset.empty()) {
    const auto & p = cds::find_preset(args.preset);
    load = p.load;
    grouping = p.grouping;
  }
  load.delimiter = args.delimiter;
  load.has_header = args.header;
  load.missing_token = args.missing;
  if (!args.label_col.empty()) {
    load.label_column = args.label_col;
  }
  if (!args.skip_cols.empty()) {
    load.skip_columns = args.skip_cols;
  }
  grouping.threshold_fraction = args.group_threshold;
  if (!args.outlier_classes.empty()) {
    grouping.outlier_classes = args.outlier_classes;
  }
  auto ds = cds::load_delimited(args.input, load);
  for (const auto & w : ds.warnings) {
    std::cerr << "warning: " << w << '\n';
  }
  if (!ds.labels) {
    return ds;
  }
  auto grouped = cds::group_outlier_classes(ds, grouping);
  std::cerr << "grouped " << grouped.truth.m << " outliers out of " << grouped.dataset.size()
            << " points\n";
  return std::move(grouped.dataset);
}

cds::Dataset prepare_dataset(const PrepareArgs & args)
{
  if (!args.synthetic.empty()) {
    const auto parts = cds::text::split(args.synthetic, ':');
    const auto a = parts.size() == 2 ? cds::text::parse_real(parts[0]) : std::nullopt;
    const auto b = parts.size() == 2 ? cds::text::parse_real(parts[1]) : std::nullopt;
    if (!a || !b || *a < 1 || *b < 1) {
      throw cds::ConfigError("--synthetic expects N_CONSISTENT:N_OUTLIER, got '" + args.synthetic + "'");
    }
    cds::SyntheticOptions opts;
    opts.n_consistent = static_cast<std::size_t>(*a);
    opts.n_outlier = static_cast<std::size_t>(*b);
    opts.dims = args.dims;
    opts.seed = args.seed;
    return cds::generate_synthetic(opts);
  }
  if (args.in.input.empty()) {
    throw cds::ConfigError("prepare needs --input or --synthetic");
  }
  return load_raw(args.in);
}

cds::EnsembleConfig ensemble_config(const ScoreArgs & args, const Common & common)
{
  cds::EnsembleConfig config;
  config.k_schedule = args.k;
  if (config.k_schedule.empty() && !args.preset.empty()) {
    config.k_schedule = cds::find_preset(args.preset).k_schedule;
  }
  if (config.k_schedule.empty()) {
    throw cds::ConfigError("no k schedule: pass --k or --preset");
  }
  config.base_seed = args.seed;
  config.kmeans.max_iter = args.max_iter;
  config.kmeans.tol = args.tol;
  config.threads = common.threads;
  return config;
}

cds::ConsistencyScores run_score(const cds::Dataset & ds, const ScoreArgs & args, const Common & common)
{
  const auto config = ensemble_config(args, common);
  if (args.zscore) {
    cds::Dataset scaled = ds;
    scaled.points = cds::standardize(ds.points, ds.points);
    return cds::score_ensemble(scaled, config);
  }
  return cds::score_ensemble(ds, config);
}

std::pair<double, cds::Comparator> resolve_threshold(
  const SplitArgs & args, const cds::ConsistencyScores & scores)
{
  std::optional<cds::Preset> preset;
  if (!args.preset.empty()) {
    preset = cds::find_preset(args.preset);
  }
  double theta = 0.0;
  if (args.theta) {
    theta = *args.theta;
  } else if (args.suggest) {
    theta = cds::suggest_threshold(scores, args.suggest_min_pool);
    std::cerr << "suggested threshold (largest score gap heuristic): " << cds::text::format_real(theta)
              << '\n';
  } else if (preset) {
    theta = preset->theta;
  } else {
    throw cds::ConfigError("no threshold: pass --theta, --suggest or --preset");
  }
  cds::Comparator comparator = preset ? preset->comparator : cds::Comparator::StrictGreater;
  if (!args.comparator.empty()) {
    comparator = cds::parse_comparator(args.comparator);
  }
  if (!(theta >= -1.0 && theta <= 1.0)) {
    throw cds::ConfigError("theta must lie in [-1, 1]");
  }
  return {theta, comparator};
}

void write_split_outputs(
  const cds::PoolSplit & split, const cds::ConsistencyScores & scores, const cds::Dataset * labelled,
  double bucket_width, const Common & common)
{
  std::vector<int> labels;
  if (labelled != nullptr && labelled->labels) {
    labels = cds::labels_for(*labelled, scores.ids);
  }
  const auto hist = cds::bucket_histogram(scores, labels, bucket_width);
  cds::save_pools(split, output_path(common, "", "pools.csv"));
  cds::save_histogram(hist, output_path(common, "", "histogram.csv"));
  std::cerr << "consistent " << split.consistent_ids.size() << ", inconsistent "
            << split.inconsistent_ids.size() << '\n';
}

cds::ClassifierConfig classifier_config(const DetectArgs & args)
{
  cds::ClassifierConfig config;
  config.kind = cds::parse_classifier_kind(args.classifier);
  config.svm.nu = args.nu;
  config.svm.kernel.kind = cds::parse_kernel_kind(args.kernel);
  config.svm.kernel.degree = args.degree;
  config.svm.kernel.gamma = args.gamma;
  config.svm.kernel.coef0 = args.coef0;
  config.svm.tol = args.svm_tol;
  config.svm.max_passes = args.max_passes;
  config.svm.gram_cache_cap = args.gram_cache;
  config.gaussian.shrinkage = args.shrinkage;
  config.gaussian.ridge = args.ridge;
  config.gaussian.quantile = args.quantile;
  config.standardize = args.standardize;
  config.score_consistent_pool = args.score_consistent;
  return config;
}

void write_detect_outputs(const cds::DetectionReport & report, const Common & common)
{
  {
    auto out = open_out(output_path(common, "", "report.txt"));
    cds::write_report_text(report, out);
  }
  {
    auto out = open_out(output_path(common, "", "report.csv"));
    cds::write_report_summary(report, out);
  }
  {
    auto out = open_out(output_path(common, "", "points.csv"));
    cds::write_report_points(report, out);
  }
  {
    auto out = open_out(output_path(common, "", "model.json"));
    if (report.svm_model) {
      cds::write_ocsvm_model(*report.svm_model, out);
    } else if (report.gaussian_model) {
      cds::write_gaussian_model(*report.gaussian_model, out);
    }
  }
  cds::write_report_text(report, std::cout);
}

void add_input_options(CLI::App * cmd, InputArgs & a)
{
  cmd->add_option("--missing", a.missing, "Missing-value token")->capture_default_str();
  cmd->add_option("--label-col", a.label_col, "Label column: name, 0-based index, first or last");
  cmd->add_option("--skip-cols", a.skip_cols, "Columns to ignore (names or indices)")->delimiter(',');
  cmd->add_option("--delimiter", a.delimiter, "Field delimiter")->capture_default_str();
  cmd->add_flag("--header", a.header, "Input has a header row");
  cmd->add_option("--group-threshold", a.group_threshold, "Classes below this fraction become outliers")
    ->check(CLI::Range(0.0, 1.0))
    ->capture_default_str();
  cmd->add_option("--outlier-class", a.outlier_classes, "Explicit outlier class (repeatable)");
}

void add_score_options(CLI::App * cmd, ScoreArgs & a)
{
  cmd->add_option("--k", a.k, "k schedule, comma separated")->delimiter(',');
  cmd->add_option("--seed", a.seed, "Base seed for the k-means runs")->capture_default_str();
  cmd->add_option("--max-iter", a.max_iter, "Lloyd iteration cap")->capture_default_str();
  cmd->add_option("--tol", a.tol, "Relative centroid-shift tolerance")->capture_default_str();
  cmd->add_flag("--zscore", a.zscore, "Standardise features before clustering");
}

void add_split_options(CLI::App * cmd, SplitArgs & a)
{
  cmd->add_option("--theta", a.theta, "Consistency threshold in [-1, 1]")->check(CLI::Range(-1.0, 1.0));
  cmd->add_option("--comparator", a.comparator, "gt (score > theta) or ge (score >= theta)")
    ->check(CLI::IsMember({"gt", "ge"}));
  cmd->add_option("--bucket-width", a.bucket_width, "Histogram bucket width")
    ->check(CLI::Range(1e-6, 2.0))
    ->capture_default_str();
  cmd->add_flag("--suggest", a.suggest, "Pick theta at the widest score gap (heuristic)");
  cmd->add_option("--suggest-min-pool", a.suggest_min_pool, "Smallest share of points either side of a suggested cut")
    ->check(CLI::Range(0.0, 0.49))
    ->capture_default_str();
}

void add_detect_options(CLI::App * cmd, DetectArgs & a)
{
  cmd->add_option("--classifier", a.classifier, "svm or gaussian")
    ->check(CLI::IsMember({"svm", "gaussian"}))
    ->capture_default_str();
  cmd->add_option("--nu", a.nu, "SVM nu")->check(CLI::Range(1e-9, 1.0))->capture_default_str();
  cmd->add_option("--kernel", a.kernel, "polynomial, rbf or linear")->capture_default_str();
  cmd->add_option("--degree", a.degree, "Polynomial degree")->capture_default_str();
  cmd->add_option("--gamma", a.gamma, "Kernel gamma (0 = 1/d)")->capture_default_str();
  cmd->add_option("--coef0", a.coef0, "Polynomial coef0")->capture_default_str();
  cmd->add_option("--svm-tol", a.svm_tol, "KKT tolerance")->capture_default_str();
  cmd->add_option("--max-passes", a.max_passes, "SVM iteration budget in training-set sizes")
    ->capture_default_str();
  cmd->add_option("--gram-cache", a.gram_cache, "Largest training set with a cached kernel matrix")
    ->capture_default_str();
  cmd->add_option("--shrinkage", a.shrinkage, "Gaussian covariance shrinkage")
    ->check(CLI::Range(0.0, 1.0))
    ->capture_default_str();
  cmd->add_option("--ridge", a.ridge, "Gaussian ridge (default 1e-6 trace/d)");
  cmd->add_option("--quantile", a.quantile, "Chi-square quantile for the distance threshold")
    ->check(CLI::Range(1e-9, 1.0 - 1e-12))
    ->capture_default_str();
  cmd->add_flag("--standardize", a.standardize, "z-score with consistent-pool statistics");
  cmd->add_flag("--score-consistent", a.score_consistent, "Also score the consistent pool (audit)");
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Consistent data selection outlier detection"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI configuration file; flags override it");

  Common common;
  app.add_option("--out-dir", common.out_dir, "Directory for output files")
    ->envname("CDS_OUTPUT_DIR")
    ->capture_default_str();
  app.add_option("--threads", common.threads, "Worker threads (0 = all cores)")->envname("CDS_THREADS");

  PrepareArgs prep;
  auto * prepare = app.add_subcommand("prepare", "Load and label a dataset, or generate a synthetic one");
  prepare->add_option("--input", prep.in.input, "Raw delimited input file");
  prepare->add_option("--preset", prep.in.preset, "ionosphere, arrhythmia or musk load settings");
  add_input_options(prepare, prep.in);
  prepare->add_option("--synthetic", prep.synthetic, "Generate N_CONSISTENT:N_OUTLIER points");
  prepare->add_option("--dims", prep.dims, "Synthetic dimension")->capture_default_str();
  prepare->add_option("--seed", prep.seed, "Synthetic seed")->capture_default_str();
  prepare->add_option("--output", prep.output, "Output file (default <out-dir>/prepared.csv)");

  ScoreArgs score_args;
  auto * score = app.add_subcommand("score", "Ensemble k-means consistency scores");
  score->add_option("--input", score_args.input, "Prepared dataset")->required();
  score->add_option("--preset", score_args.preset, "Use the preset k schedule");
  add_score_options(score, score_args);
  score->add_option("--output", score_args.output, "Output file (default <out-dir>/scores.csv)");

  SplitArgs split_args;
  auto * split = app.add_subcommand("split", "Threshold scores into consistent/inconsistent pools");
  split->add_option("--scores", split_args.scores, "Score file from 'score'")->required();
  split->add_option("--input", split_args.input, "Prepared dataset (labels for the histogram)");
  split->add_option("--preset", split_args.preset, "Use the preset threshold and comparator");
  add_split_options(split, split_args);

  DetectArgs detect_args;
  auto * detect = app.add_subcommand("detect", "Train a one-class model on the consistent pool");
  detect->add_option("--input", detect_args.input, "Prepared dataset")->required();
  detect->add_option("--pools", detect_args.pools, "Pool file from 'split'")->required();
  add_detect_options(detect, detect_args);

  InputArgs run_in;
  ScoreArgs run_score_args;
  SplitArgs run_split_args;
  DetectArgs run_detect_args;
  auto * run = app.add_subcommand("run", "Full pipeline: prepare (with --preset), score, split, detect");
  run->add_option("--input", run_in.input, "Dataset: raw with --preset, otherwise prepared")->required();
  run->add_option("--preset", run_in.preset, "ionosphere, arrhythmia or musk");
  add_input_options(run, run_in);
  add_score_options(run, run_score_args);
  add_split_options(run, run_split_args);
  add_detect_options(run, run_detect_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp & e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp & e) {
    return app.exit(e);
  } catch (const CLI::ParseError & e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*prepare) {
      const auto ds = prepare_dataset(prep);
      cds::save_delimited(ds, output_path(common, prep.output, "prepared.csv"));
    } else if (*score) {
      const auto ds = load_prepared(score_args.input);
      const auto scores = run_score(ds, score_args, common);
      cds::save_scores(scores, output_path(common, score_args.output, "scores.csv"));
    } else if (*split) {
      const auto scores = cds::load_scores(split_args.scores);
      const auto [theta, comparator] = resolve_threshold(split_args, scores);
      const auto pools = cds::split_pools(scores, theta, comparator);
      std::optional<cds::Dataset> ds;
      if (!split_args.input.empty()) {
        ds = load_prepared(split_args.input);
      }
      write_split_outputs(pools, scores, ds ? &*ds : nullptr, split_args.bucket_width, common);
    } else if (*detect) {
      const auto ds = load_prepared(detect_args.input);
      const auto pools = cds::load_pools(detect_args.pools);
      write_detect_outputs(cds::detect(ds, pools, classifier_config(detect_args)), common);
    } else if (*run) {
      cds::Dataset ds;
      if (!run_in.preset.empty()) {
        ds = load_raw(run_in);
        cds::save_delimited(ds, output_path(common, "", "prepared.csv"));
      } else {
        ds = load_prepared(run_in.input);
      }
      run_score_args.preset = run_in.preset;
      run_split_args.preset = run_in.preset;
      const auto scores = run_score(ds, run_score_args, common);
      cds::save_scores(scores, output_path(common, "", "scores.csv"));
      // Continue from the serialised scores so 'run' and the staged commands agree byte for byte.
      const auto reloaded = cds::load_scores(output_path(common, "", "scores.csv"));
      const auto [theta, comparator] = resolve_threshold(run_split_args, reloaded);
      const auto pools = cds::split_pools(reloaded, theta, comparator);
      write_split_outputs(pools, reloaded, &ds, run_split_args.bucket_width, common);
      write_detect_outputs(cds::detect(ds, pools, classifier_config(run_detect_args)), common);
    }
  } catch (const cds::ConfigError & e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const cds::ConvergenceError & e) {
    std::cerr << "convergence failure: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const cds::DataError & e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::filesystem::filesystem_error & e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
