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

#include "cds/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <random>
#include <string>

#include <json.hpp>

#include "cds/errors.hpp"

namespace cds
{

namespace
{

std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr Eigen::Index kAssignBlock = 512;

Eigen::MatrixXd kmeans_plus_plus(const Eigen::MatrixXd & points, int k, std::mt19937_64 & rng)
{
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd centroids(k, points.cols());
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);

  auto pick_uniform_unchosen = [&]() {
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!chosen[static_cast<std::size_t>(i)]) {
        free.push_back(i);
      }
    }
    std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
    return free[pick(rng)];
  };

  Eigen::Index first = pick_uniform_unchosen();
  chosen[static_cast<std::size_t>(first)] = true;
  centroids.row(0) = points.row(first);
  Eigen::VectorXd d2 = (points.rowwise() - points.row(first)).rowwise().squaredNorm();

  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index next = -1;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      const double target = u(rng);
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (d2(i) <= 0.0) {
          continue;
        }
        acc += d2(i);
        next = i;
        if (acc > target) {
          break;
        }
      }
    }
    if (next < 0) {
      next = pick_uniform_unchosen();
    }
    chosen[static_cast<std::size_t>(next)] = true;
    centroids.row(c) = points.row(next);
    d2 = d2.cwiseMin((points.rowwise() - points.row(next)).rowwise().squaredNorm());
  }
  return centroids;
}

double total_cost(
  const Eigen::MatrixXd & points, const Eigen::MatrixXd & centroids, const Eigen::VectorXi & assignment)
{
  double cost = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    cost += (points.row(i) - centroids.row(assignment(i))).squaredNorm();
  }
  return cost;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base_seed, int k)
{
  return splitmix64(base_seed ^ splitmix64(static_cast<std::uint64_t>(k)));
}

Eigen::VectorXi assign_nearest(const Eigen::MatrixXd & points, const Eigen::MatrixXd & centroids)
{
  if (points.cols() != centroids.cols()) {
    throw ConfigError("assign_nearest: point and centroid dimensions differ");
  }
  if (centroids.rows() < 1) {
    throw ConfigError("assign_nearest: no centroids");
  }
  const Eigen::Index n = points.rows();
  const Eigen::Index k = centroids.rows();
  const Eigen::VectorXd c_norm = centroids.rowwise().squaredNorm();
  const double c_norm_max = c_norm.maxCoeff();
  Eigen::VectorXi assignment(n);

  // The expanded form |x|^2 - 2 x.c + |c|^2 shortlists candidates cheaply;
  // the winner is then settled on exact squared differences so ties resolve
  // to the lowest index regardless of GEMM rounding.
  for (Eigen::Index start = 0; start < n; start += kAssignBlock) {
    const Eigen::Index rows = std::min(kAssignBlock, n - start);
    const Eigen::MatrixXd cross = points.middleRows(start, rows) * centroids.transpose();
    for (Eigen::Index r = 0; r < rows; ++r) {
      const Eigen::Index i = start + r;
      const double x_norm = points.row(i).squaredNorm();
      Eigen::VectorXd approx = (c_norm - 2.0 * cross.row(r).transpose()).array() + x_norm;
      const double best_approx = approx.minCoeff();
      const double slack = 1e-9 * (x_norm + c_norm_max) + 1e-300;
      int best = -1;
      double best_exact = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < k; ++j) {
        if (approx(j) > best_approx + slack) {
          continue;
        }
        const double exact = (points.row(i) - centroids.row(j)).squaredNorm();
        if (exact < best_exact) {
          best_exact = exact;
          best = static_cast<int>(j);
        }
      }
      assignment(i) = best;
    }
  }
  return assignment;
}

ClusteringResult kmeans_fit(
  const Eigen::MatrixXd & points, int k, std::uint64_t seed, const KMeansOptions & options)
{
  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();
  if (k < 1) {
    throw ConfigError("k-means: k must be at least 1");
  }
  if (k > n) {
    throw ConfigError(
      "k-means: k = " + std::to_string(k) + " exceeds the number of points (" + std::to_string(n) + ")");
  }
  if (options.max_iter < 1 || !(options.tol >= 0.0)) {
    throw ConfigError("k-means: max_iter must be >= 1 and tol >= 0");
  }

  std::mt19937_64 rng(seed);
  ClusteringResult result;
  result.k = k;
  result.seed = seed;
  Eigen::MatrixXd centroids = kmeans_plus_plus(points, k, rng);
  Eigen::VectorXi assignment;

  for (int iter = 0; iter < options.max_iter; ++iter) {
    assignment = assign_nearest(points, centroids);

    Eigen::MatrixXd updated = Eigen::MatrixXd::Zero(k, d);
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      updated.row(assignment(i)) += points.row(i);
      ++counts(assignment(i));
    }
    for (int c = 0; c < k; ++c) {
      if (counts(c) > 0) {
        updated.row(c) /= static_cast<double>(counts(c));
      }
    }

    bool repaired = false;
    if ((counts.array() == 0).any()) {
      repaired = true;
      Eigen::VectorXd dist(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        dist(i) = (points.row(i) - updated.row(assignment(i))).squaredNorm();
      }
      for (int c = 0; c < k; ++c) {
        if (counts(c) != 0) {
          continue;
        }
        Eigen::Index far = -1;
        for (Eigen::Index i = 0; i < n; ++i) {
          if (counts(assignment(i)) >= 2 && (far < 0 || dist(i) > dist(far))) {
            far = i;
          }
        }
        --counts(assignment(far));
        assignment(far) = c;
        counts(c) = 1;
        dist(far) = 0.0;
        updated.row(c) = points.row(far);
      }
    }

    result.inertia_history.push_back(total_cost(points, updated, assignment));
    const double base = centroids.norm();
    const double moved = (updated - centroids).norm();
    const double shift = base > 0.0 ? moved / base : moved;
    centroids = std::move(updated);
    result.iterations_run = iter + 1;
    if (!repaired && shift <= options.tol) {
      break;
    }
  }

  result.centroids = std::move(centroids);
  result.assignment = std::move(assignment);
  result.inertia = result.inertia_history.back();
  return result;
}

void write_clustering(const ClusteringResult & result, std::ostream & out)
{
  nlohmann::json j;
  j["k"] = result.k;
  j["seed"] = result.seed;
  j["iterations_run"] = result.iterations_run;
  j["inertia"] = result.inertia;
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < result.centroids.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < result.centroids.cols(); ++c) {
      row.push_back(result.centroids(r, c));
    }
    rows.push_back(std::move(row));
  }
  j["centroids"] = std::move(rows);
  out << j.dump(2) << '\n';
}

}  // namespace cds
