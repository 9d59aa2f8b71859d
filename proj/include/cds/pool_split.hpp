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

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cds/dataset.hpp"
#include "cds/ensemble.hpp"

namespace cds
{

enum class Comparator
{
  StrictGreater,   ///< consistent iff score > theta
  GreaterOrEqual,  ///< consistent iff score >= theta
};

/// "gt" / "ge"
std::string to_string(Comparator c);
Comparator parse_comparator(const std::string & s);

/// Split labels for report tables, e.g. ">=0.1" and "<0.1".
std::string consistent_split_label(double theta, Comparator c);
std::string inconsistent_split_label(double theta, Comparator c);

struct PoolSplit
{
  double theta = 0.0;
  Comparator comparator = Comparator::StrictGreater;
  std::vector<PointId> consistent_ids;    ///< ascending
  std::vector<PointId> inconsistent_ids;  ///< ascending
  /// Score per id, carried along so later stages can rank and report.
  std::vector<std::pair<PointId, double>> scores;

  std::size_t size() const { return consistent_ids.size() + inconsistent_ids.size(); }
};

inline bool is_consistent(double score, double theta, Comparator c)
{
  return c == Comparator::StrictGreater ? score > theta : score >= theta;
}

PoolSplit split_pools(const ConsistencyScores & scores, double theta, Comparator comparator);

/// Heuristic: midpoint of the widest gap between adjacent sorted scores,
/// considering only cuts that leave at least max(1, floor(min_pool_fraction n))
/// points on each side.
double suggest_threshold(const ConsistencyScores & scores, double min_pool_fraction = 0.01);

/// "id,avg_sim_score,pool,split", rows in descending score order.
void write_pools(const PoolSplit & split, std::ostream & out);
void save_pools(const PoolSplit & split, const std::filesystem::path & path);
PoolSplit read_pools(std::istream & in);
PoolSplit load_pools(const std::filesystem::path & path);

struct ScoreHistogram
{
  std::vector<double> edges;  ///< ascending, size = buckets + 1
  bool labelled = false;
  std::vector<std::size_t> count_label1;
  std::vector<std::size_t> count_label0;
  std::vector<std::size_t> count_total;

  std::size_t buckets() const { return count_total.size(); }
};

/**
 * Buckets of width `bucket_width` laid down from 1 towards -1, each closed on
 * the right: (1 - w, 1], (1 - 2w, 1 - w], ..., with the last one also taking
 * -1. `labels` (1/0) is aligned with `scores.ids`; pass it empty for totals only.
 */
ScoreHistogram bucket_histogram(
  const ConsistencyScores & scores, std::span<const int> labels, double bucket_width = 0.1);

/// Binary labels of `dataset` re-ordered to follow `ids`.
std::vector<int> labels_for(const Dataset & dataset, std::span<const PointId> ids);

/// "bucket_low,bucket_high,count_label1,count_label0,count_total"; label
/// columns are left empty for unlabelled data.
void write_histogram(const ScoreHistogram & hist, std::ostream & out);
void save_histogram(const ScoreHistogram & hist, const std::filesystem::path & path);

}  // namespace cds
