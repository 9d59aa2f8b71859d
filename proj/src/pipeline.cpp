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

#include "cds/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "cds/errors.hpp"
#include "cds/text.hpp"

namespace cds
{

std::string to_string(ClassifierKind kind)
{
  return kind == ClassifierKind::Gaussian ? "gaussian" : "svm";
}

ClassifierKind parse_classifier_kind(const std::string & s)
{
  if (s == "gaussian") {
    return ClassifierKind::Gaussian;
  }
  if (s == "svm") {
    return ClassifierKind::Svm;
  }
  throw ConfigError("classifier must be 'gaussian' or 'svm', got '" + s + "'");
}

PoolCounts evaluate_split(const PoolSplit & split, const Dataset & labelled)
{
  PoolCounts counts;
  for (const int label : labels_for(labelled, split.consistent_ids)) {
    ++(label == 1 ? counts.consistent_positive : counts.consistent_negative);
  }
  for (const int label : labels_for(labelled, split.inconsistent_ids)) {
    ++(label == 1 ? counts.inconsistent_positive : counts.inconsistent_negative);
  }
  return counts;
}

namespace
{

std::string describe_scores(const PoolSplit & split)
{
  std::vector<double> s;
  for (const auto & [id, score] : split.scores) {
    s.push_back(score);
  }
  if (s.empty()) {
    return "no scores";
  }
  std::sort(s.begin(), s.end());
  auto q = [&](double p) { return s[static_cast<std::size_t>(p * static_cast<double>(s.size() - 1))]; };
  std::ostringstream os;
  os << "score min " << text::format_real(q(0.0)) << ", q25 " << text::format_real(q(0.25))
     << ", median " << text::format_real(q(0.5)) << ", q75 " << text::format_real(q(0.75))
     << ", max " << text::format_real(q(1.0));
  return os.str();
}

}  // namespace

DetectionReport detect(const Dataset & dataset, const PoolSplit & split, const ClassifierConfig & config)
{
  if (split.size() != static_cast<std::size_t>(dataset.size())) {
    throw DataError("pool split does not cover the dataset");
  }
  if (split.consistent_ids.empty()) {
    throw EmptyPoolError(
      "empty consistent pool at threshold " + consistent_split_label(split.theta, split.comparator) +
      "; " + describe_scores(split));
  }

  DetectionReport report;
  report.theta = split.theta;
  report.comparator = split.comparator;
  report.classifier = config.kind;
  report.consistent_size = split.consistent_ids.size();
  report.inconsistent_size = split.inconsistent_ids.size();

  const Dataset train = dataset.select(split.consistent_ids);
  const Dataset test = dataset.select(split.inconsistent_ids);
  Eigen::MatrixXd train_x = train.points;
  Eigen::MatrixXd test_x = test.points;
  if (config.standardize) {
    test_x = standardize(test.points, train.points);
    train_x = standardize(train.points, train.points);
  }

  OneClassPrediction test_pred;
  std::optional<OneClassPrediction> train_pred;
  if (config.kind == ClassifierKind::Gaussian) {
    report.gaussian_model = fit_gaussian(train_x, config.gaussian);
    test_pred = gaussian_predict(test_x, *report.gaussian_model);
    if (config.score_consistent_pool) {
      train_pred = gaussian_predict(train_x, *report.gaussian_model);
    }
  } else {
    report.svm_model = ocsvm_train(train_x, config.svm);
    test_pred = ocsvm_predict(test_x, *report.svm_model);
    if (config.score_consistent_pool) {
      train_pred = ocsvm_predict(train_x, *report.svm_model);
    }
  }
  report.flagged = test_pred.outlier_count();

  std::unordered_map<PointId, double> score_of;
  for (const auto & [id, s] : split.scores) {
    score_of.emplace(id, s);
  }
  std::unordered_map<PointId, std::pair<Pool, std::size_t>> where;
  for (std::size_t i = 0; i < split.consistent_ids.size(); ++i) {
    where.emplace(split.consistent_ids[i], std::pair{Pool::Consistent, i});
  }
  for (std::size_t i = 0; i < split.inconsistent_ids.size(); ++i) {
    where.emplace(split.inconsistent_ids[i], std::pair{Pool::Inconsistent, i});
  }

  const auto n = static_cast<std::size_t>(dataset.size());
  report.ids = dataset.ids;
  report.scores.resize(n);
  report.pools.resize(n);
  report.final_labels.resize(n);
  report.classifier_values.assign(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t r = 0; r < n; ++r) {
    const auto id = dataset.ids[r];
    const auto it = where.find(id);
    const auto sit = score_of.find(id);
    if (it == where.end() || sit == score_of.end()) {
      throw DataError("point id " + std::to_string(id) + " missing from the pool split");
    }
    const auto [pool, pos] = it->second;
    report.scores[r] = sit->second;
    report.pools[r] = pool;
    const auto e = static_cast<Eigen::Index>(pos);
    if (pool == Pool::Inconsistent) {
      report.final_labels[r] = test_pred.verdicts[pos];
      report.classifier_values[r] = test_pred.values(e);
    } else {
      report.final_labels[r] = Verdict::Inlier;
      if (train_pred) {
        report.classifier_values[r] = train_pred->values(e);
      }
    }
  }

  if (dataset.labels) {
    report.pool_counts = evaluate_split(split, dataset);
    const auto truth = labels_for(dataset, split.inconsistent_ids);
    Confusion c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const bool flagged = test_pred.verdicts[i] == Verdict::Outlier;
      const bool outlier = truth[i] == 0;
      if (flagged) {
        ++(outlier ? c.true_outliers_flagged : c.false_positives);
      } else {
        ++(outlier ? c.misses : c.inliers_passed);
      }
    }
    report.confusion = c;
  }
  return report;
}

DetectionReport run_pipeline(
  const Dataset & dataset, const EnsembleConfig & ensemble, double theta, Comparator comparator,
  const ClassifierConfig & classifier)
{
  const auto scores = score_ensemble(dataset, ensemble);
  const auto split = split_pools(scores, theta, comparator);
  return detect(dataset, split, classifier);
}

void write_report_text(const DetectionReport & report, std::ostream & out)
{
  const auto in_label = consistent_split_label(report.theta, report.comparator);
  const auto out_label = inconsistent_split_label(report.theta, report.comparator);
  out << "points: " << report.ids.size() << '\n'
      << "consistent pool (" << in_label << "): " << report.consistent_size << '\n'
      << "inconsistent pool (" << out_label << "): " << report.inconsistent_size << '\n';
  if (report.pool_counts) {
    const auto & c = *report.pool_counts;
    const int split_w = static_cast<int>(std::max<std::size_t>({10, in_label.size(), out_label.size()})) + 2;
    auto row = [&](const std::string & a, const std::string & b, const std::string & p, const std::string & q) {
      out << std::left << std::setw(20) << a << std::setw(split_w) << b << std::setw(13) << p << q << std::right
          << '\n';
    };
    out << '\n';
    row("Data Set", "Data Split", "# Positives", "# Negative");
    row("Consistent Pool", in_label, std::to_string(c.consistent_positive), std::to_string(c.consistent_negative));
    row("Inconsistent Pool", out_label, std::to_string(c.inconsistent_positive),
        std::to_string(c.inconsistent_negative));
  }
  out << '\n' << "classifier: " << to_string(report.classifier) << '\n'
      << "flagged in inconsistent pool: " << report.flagged << '\n';
  if (report.confusion) {
    const auto & c = *report.confusion;
    out << "true outliers flagged: " << c.true_outliers_flagged << '\n'
        << "false positives: " << c.false_positives << '\n'
        << "missed outliers: " << c.misses << '\n'
        << "inliers passed: " << c.inliers_passed << '\n';
  }
}

void write_report_summary(const DetectionReport & report, std::ostream & out)
{
  out << "metric,value\n"
      << "points," << report.ids.size() << '\n'
      << "theta," << text::format_real(report.theta) << '\n'
      << "comparator," << to_string(report.comparator) << '\n'
      << "classifier," << to_string(report.classifier) << '\n'
      << "consistent_size," << report.consistent_size << '\n'
      << "inconsistent_size," << report.inconsistent_size << '\n'
      << "flagged," << report.flagged << '\n';
  if (report.pool_counts) {
    const auto & c = *report.pool_counts;
    out << "consistent_positive," << c.consistent_positive << '\n'
        << "consistent_negative," << c.consistent_negative << '\n'
        << "inconsistent_positive," << c.inconsistent_positive << '\n'
        << "inconsistent_negative," << c.inconsistent_negative << '\n';
  }
  if (report.confusion) {
    const auto & c = *report.confusion;
    out << "true_outliers_flagged," << c.true_outliers_flagged << '\n'
        << "false_positives," << c.false_positives << '\n'
        << "missed_outliers," << c.misses << '\n'
        << "inliers_passed," << c.inliers_passed << '\n';
  }
}

void write_report_points(const DetectionReport & report, std::ostream & out)
{
  out << "id,avg_sim_score,pool,final_label,classifier_value\n";
  for (std::size_t r = 0; r < report.ids.size(); ++r) {
    out << report.ids[r] << ',' << text::format_real(report.scores[r]) << ','
        << (report.pools[r] == Pool::Consistent ? "consistent" : "inconsistent") << ','
        << (report.final_labels[r] == Verdict::Outlier ? "outlier" : "inlier") << ',';
    if (!std::isnan(report.classifier_values[r])) {
      out << text::format_real(report.classifier_values[r]);
    }
    out << '\n';
  }
}

const Preset & find_preset(std::string_view name)
{
  static const std::array<Preset, 3> presets = [] {
    LoadOptions uci;
    uci.label_column = "last";
    uci.missing_token = "?";

    Preset ionosphere{"ionosphere", {10, 15, 20, 25, 30, 50, 100, 150, 200, 300}, 0.1,
                      Comparator::GreaterOrEqual, uci, {}};
    Preset arrhythmia{"arrhythmia", {5, 6, 8, 10, 12, 14, 16, 20, 25, 30, 50, 100}, 0.95,
                      Comparator::StrictGreater, uci, {}};
    LoadOptions musk_load = uci;
    musk_load.skip_columns = {"0", "1"};  // molecule and conformation names
    Preset musk{"musk", {10, 15, 20, 25, 30, 50, 100, 150, 200, 300, 500, 800, 1000, 1500}, 0.4,
                Comparator::StrictGreater, musk_load, {}};
    return std::array<Preset, 3>{ionosphere, arrhythmia, musk};
  }();
  for (const auto & p : presets) {
    if (p.name == name) {
      return p;
    }
  }
  throw ConfigError("unknown preset '" + std::string(name) + "' (ionosphere, arrhythmia, musk)");
}

}  // namespace cds
