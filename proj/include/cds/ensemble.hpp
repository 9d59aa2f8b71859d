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

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "cds/dataset.hpp"
#include "cds/errors.hpp"
#include "cds/kmeans.hpp"

namespace cds
{

/**
 * Cosine of the angle between two vectors, clamped to [-1, 1].
 *
 * A zero vector has no direction: against a non-zero vector the result is 0,
 * and two zero vectors compare as identical (1).
 */
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_similarity(
  const Eigen::MatrixBase<DerivedA> & u, const Eigen::MatrixBase<DerivedB> & v)
{
  using Scalar = typename DerivedA::Scalar;
  if (u.size() != v.size()) {
    throw ConfigError("cosine_similarity: dimension mismatch");
  }
  const Scalar nu = u.norm();
  const Scalar nv = v.norm();
  if (nu == Scalar(0) || nv == Scalar(0)) {
    return (nu == Scalar(0) && nv == Scalar(0)) ? Scalar(1) : Scalar(0);
  }
  const Scalar c = u.cwiseProduct(v).sum() / (nu * nv);
  return std::clamp(c, Scalar(-1), Scalar(1));
}

/**
 * Mean pairwise cosine similarity of the rows of `centroids` (one centroid
 * per row), taken over all k(k-1)/2 unordered pairs.
 */
template <typename Derived>
typename Derived::Scalar avg_sim_score(const Eigen::MatrixBase<Derived> & centroids)
{
  using Scalar = typename Derived::Scalar;
  const Eigen::Index k = centroids.rows();
  if (k < 2) {
    throw ConfigError("avg_sim_score: need at least two centroids");
  }
  Scalar sum(0);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = a + 1; b < k; ++b) {
      sum += cosine_similarity(centroids.row(a), centroids.row(b));
    }
  }
  return sum / static_cast<Scalar>(k * (k - 1) / 2);
}

struct EnsembleConfig
{
  std::vector<int> k_schedule;
  std::uint64_t base_seed = 0;
  KMeansOptions kmeans;
  /// Worker threads for the independent runs; 0 = hardware concurrency.
  unsigned threads = 0;
  /// Keep every ClusteringResult in the output for audit.
  bool retain_runs = false;

  /// Throws ConfigError unless the schedule is usable for n points.
  void validate(Eigen::Index n) const;
};

struct ConsistencyScores
{
  std::vector<PointId> ids;
  Eigen::VectorXd scores;
  std::vector<int> k_schedule;
  std::vector<ClusteringResult> runs;  ///< empty unless retain_runs

  Eigen::Index size() const { return scores.size(); }

  /// The |K| centroids (one per row) the i-th point was assigned to. Needs retained runs.
  Eigen::MatrixXd centroids_of(Eigen::Index i) const;

  /// Positions ordered by descending score, ties by ascending id.
  std::vector<Eigen::Index> descending_order() const;
};

/// Runs k-means once per k in the schedule and scores every point by the
/// pairwise similarity of the centroids it was assigned to.
ConsistencyScores score_ensemble(const Dataset & dataset, const EnsembleConfig & config);

/// Builds scores from already-fitted runs (one per schedule entry, same point order).
ConsistencyScores score_from_runs(std::span<const PointId> ids, std::span<const ClusteringResult> runs);

/// "id,avg_sim_score" rows sorted by descending score.
void write_scores(const ConsistencyScores & scores, std::ostream & out);
void save_scores(const ConsistencyScores & scores, const std::filesystem::path & path);
ConsistencyScores read_scores(std::istream & in);
ConsistencyScores load_scores(const std::filesystem::path & path);

}  // namespace cds
