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

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "cds/dataset.hpp"

namespace cds
{

struct KMeansOptions
{
  int max_iter = 300;
  /// Stop once ||C_new - C_old||_F / ||C_old||_F drops below this.
  double tol = 1e-6;
};

struct ClusteringResult
{
  int k = 0;
  Eigen::MatrixXd centroids;     ///< k x d, one centroid per row
  Eigen::VectorXi assignment;    ///< cluster index per point
  double inertia = 0.0;          ///< sum of squared distances to assigned centroids
  int iterations_run = 0;
  std::uint64_t seed = 0;
  /// Inertia after each (assign, update) iteration; non-increasing.
  std::vector<double> inertia_history;
};

/// Index of the nearest centroid (squared Euclidean) for every row of
/// `points`; exact ties go to the lowest index.
Eigen::VectorXi assign_nearest(const Eigen::MatrixXd & points, const Eigen::MatrixXd & centroids);

/// Lloyd's algorithm from a k-means++ start. Deterministic for a given seed;
/// empty clusters are re-seeded with the point farthest from its centroid.
ClusteringResult kmeans_fit(
  const Eigen::MatrixXd & points, int k, std::uint64_t seed, const KMeansOptions & options = {});

inline ClusteringResult kmeans_fit(
  const Dataset & dataset, int k, std::uint64_t seed, const KMeansOptions & options = {})
{
  return kmeans_fit(dataset.points, k, seed, options);
}

/// Per-run seed mixed from a base seed and k; independent of schedule order.
std::uint64_t derive_seed(std::uint64_t base_seed, int k);

/// Audit record: k, seed, iterations, inertia, centroids.
void write_clustering(const ClusteringResult & result, std::ostream & out);

}  // namespace cds
