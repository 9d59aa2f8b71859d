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

#include "cds/ensemble.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <numeric>
#include <set>
#include <string>
#include <thread>

#include "cds/text.hpp"

namespace cds
{

namespace
{
constexpr const char * kScoresHeader = "id,avg_sim_score";
}

void EnsembleConfig::validate(Eigen::Index n) const
{
  if (k_schedule.size() < 2) {
    throw ConfigError("k schedule needs at least two entries");
  }
  std::set<int> distinct(k_schedule.begin(), k_schedule.end());
  if (distinct.size() != k_schedule.size()) {
    throw ConfigError("k schedule entries must be distinct");
  }
  for (const int k : k_schedule) {
    if (k < 2 || k > n) {
      throw ConfigError(
        "k = " + std::to_string(k) + " outside [2, " + std::to_string(n) + "]");
    }
  }
}

Eigen::MatrixXd ConsistencyScores::centroids_of(Eigen::Index i) const
{
  if (runs.empty()) {
    throw ConfigError("centroids_of: runs were not retained");
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(runs.size()), runs.front().centroids.cols());
  for (std::size_t r = 0; r < runs.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = runs[r].centroids.row(runs[r].assignment(i));
  }
  return out;
}

std::vector<Eigen::Index> ConsistencyScores::descending_order() const
{
  std::vector<Eigen::Index> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (scores(a) != scores(b)) {
      return scores(a) > scores(b);
    }
    return ids[static_cast<std::size_t>(a)] < ids[static_cast<std::size_t>(b)];
  });
  return order;
}

ConsistencyScores score_from_runs(std::span<const PointId> ids, std::span<const ClusteringResult> runs)
{
  if (runs.size() < 2) {
    throw ConfigError("scoring needs at least two clustering runs");
  }
  const auto n = static_cast<Eigen::Index>(ids.size());
  const Eigen::Index d = runs.front().centroids.cols();
  for (const auto & run : runs) {
    if (run.assignment.size() != n || run.centroids.cols() != d) {
      throw ConfigError("clustering runs disagree with the point set");
    }
  }
  ConsistencyScores out;
  out.ids.assign(ids.begin(), ids.end());
  out.scores.resize(n);
  Eigen::MatrixXd member(static_cast<Eigen::Index>(runs.size()), d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < runs.size(); ++r) {
      member.row(static_cast<Eigen::Index>(r)) = runs[r].centroids.row(runs[r].assignment(i));
    }
    out.scores(i) = avg_sim_score(member);
  }
  for (const auto & run : runs) {
    out.k_schedule.push_back(run.k);
  }
  return out;
}

ConsistencyScores score_ensemble(const Dataset & dataset, const EnsembleConfig & config)
{
  config.validate(dataset.size());

  // Runs are kept in ascending k so the pair sums, and hence the scores, do
  // not depend on the order the schedule was written in.
  std::vector<int> schedule = config.k_schedule;
  std::sort(schedule.begin(), schedule.end());

  std::vector<ClusteringResult> runs(schedule.size());
  std::vector<std::exception_ptr> failures(schedule.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t r = next++; r < schedule.size(); r = next++) {
      try {
        runs[r] = kmeans_fit(
          dataset.points, schedule[r], derive_seed(config.base_seed, schedule[r]), config.kmeans);
      } catch (...) {
        failures[r] = std::current_exception();
      }
    }
  };

  unsigned threads = config.threads != 0 ? config.threads : std::thread::hardware_concurrency();
  threads = std::clamp<unsigned>(threads, 1U, static_cast<unsigned>(schedule.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back(worker);
    }
  }
  for (const auto & failure : failures) {
    if (failure) {
      std::rethrow_exception(failure);
    }
  }

  auto out = score_from_runs(dataset.ids, runs);
  if (config.retain_runs) {
    out.runs = std::move(runs);
  }
  return out;
}

void write_scores(const ConsistencyScores & scores, std::ostream & out)
{
  out << kScoresHeader << '\n';
  for (const auto i : scores.descending_order()) {
    out << scores.ids[static_cast<std::size_t>(i)] << ',' << text::format_real(scores.scores(i)) << '\n';
  }
}

void save_scores(const ConsistencyScores & scores, const std::filesystem::path & path)
{
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write " + path.string());
  }
  write_scores(scores, out);
}

ConsistencyScores read_scores(std::istream & in)
{
  std::string line;
  if (!std::getline(in, line) || text::trim(line) != kScoresHeader) {
    throw DataError(std::string("score file must start with header '") + kScoresHeader + "'");
  }
  std::vector<PointId> ids;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) {
      continue;
    }
    const auto fields = text::split(line, ',');
    const auto id = fields.size() == 2 ? text::parse_real(fields[0]) : std::nullopt;
    const auto score = fields.size() == 2 ? text::parse_real(fields[1]) : std::nullopt;
    if (!id || !score || *id < 0 || *score < -1.0 || *score > 1.0) {
      throw DataError("malformed score row: " + line);
    }
    ids.push_back(static_cast<PointId>(*id));
    values.push_back(*score);
  }
  ConsistencyScores out;
  out.ids = std::move(ids);
  out.scores = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  return out;
}

ConsistencyScores load_scores(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  return read_scores(in);
}

}  // namespace cds
