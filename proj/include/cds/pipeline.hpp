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

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cds/dataset.hpp"
#include "cds/ensemble.hpp"
#include "cds/occ_gaussian.hpp"
#include "cds/occ_svm.hpp"
#include "cds/pool_split.hpp"

namespace cds
{

enum class ClassifierKind
{
  Gaussian,
  Svm,
};

std::string to_string(ClassifierKind kind);
ClassifierKind parse_classifier_kind(const std::string & s);

struct ClassifierConfig
{
  ClassifierKind kind = ClassifierKind::Svm;
  GaussianOptions gaussian;
  OcsvmOptions svm;
  /// z-score features with consistent-pool statistics before fitting.
  bool standardize = false;
  /// Also run the classifier over the consistent pool (audit only; their
  /// final label stays inlier).
  bool score_consistent_pool = false;
};

/// Positives (label 1) and negatives (label 0) per pool.
struct PoolCounts
{
  std::size_t consistent_positive = 0;
  std::size_t consistent_negative = 0;
  std::size_t inconsistent_positive = 0;
  std::size_t inconsistent_negative = 0;
};

PoolCounts evaluate_split(const PoolSplit & split, const Dataset & labelled);

/// Confusion over the inconsistent pool, outliers being the positive class.
struct Confusion
{
  std::size_t true_outliers_flagged = 0;
  std::size_t false_positives = 0;  ///< consistent-class points flagged
  std::size_t misses = 0;           ///< true outliers passed as inliers
  std::size_t inliers_passed = 0;

  std::size_t total() const { return true_outliers_flagged + false_positives + misses + inliers_passed; }
};

enum class Pool
{
  Consistent,
  Inconsistent,
};

struct DetectionReport
{
  double theta = 0.0;
  Comparator comparator = Comparator::StrictGreater;
  ClassifierKind classifier = ClassifierKind::Svm;
  std::size_t consistent_size = 0;
  std::size_t inconsistent_size = 0;
  std::size_t flagged = 0;  ///< outliers flagged in the inconsistent pool
  std::optional<PoolCounts> pool_counts;
  std::optional<Confusion> confusion;

  // per point, in dataset row order
  std::vector<PointId> ids;
  std::vector<double> scores;
  std::vector<Pool> pools;
  std::vector<Verdict> final_labels;
  std::vector<double> classifier_values;  ///< NaN where the classifier was not run

  std::optional<GaussianModel> gaussian_model;
  std::optional<OcsvmModel> svm_model;
};

/// Trains on the consistent pool of `split` and labels the inconsistent pool.
DetectionReport detect(const Dataset & dataset, const PoolSplit & split, const ClassifierConfig & config);

/// score_ensemble -> split_pools -> detect.
DetectionReport run_pipeline(
  const Dataset & dataset, const EnsembleConfig & ensemble, double theta, Comparator comparator,
  const ClassifierConfig & classifier);

/// Human-readable summary with the pool table.
void write_report_text(const DetectionReport & report, std::ostream & out);
/// "metric,value" rows.
void write_report_summary(const DetectionReport & report, std::ostream & out);
/// "id,avg_sim_score,pool,final_label,classifier_value" rows.
void write_report_points(const DetectionReport & report, std::ostream & out);

/// Experiment setup for one of the bundled benchmark datasets.
struct Preset
{
  std::string name;
  std::vector<int> k_schedule;
  double theta = 0.0;
  Comparator comparator = Comparator::StrictGreater;
  LoadOptions load;
  GroupingOptions grouping;
};

/// "ionosphere", "arrhythmia" or "musk"; throws ConfigError otherwise.
const Preset & find_preset(std::string_view name);

}  // namespace cds
