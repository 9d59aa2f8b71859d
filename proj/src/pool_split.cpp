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

#include "cds/pool_split.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "cds/errors.hpp"
#include "cds/text.hpp"

namespace cds
{

namespace
{
constexpr const char * kPoolsHeader = "id,avg_sim_score,pool,split";
constexpr const char * kHistogramHeader = "bucket_low,bucket_high,count_label1,count_label0,count_total";

double snap(double x) { return std::round(x * 1e12) / 1e12; }
}  // namespace

std::string to_string(Comparator c)
{
  return c == Comparator::StrictGreater ? "gt" : "ge";
}

Comparator parse_comparator(const std::string & s)
{
  if (s == "gt" || s == ">") {
    return Comparator::StrictGreater;
  }
  if (s == "ge" || s == ">=") {
    return Comparator::GreaterOrEqual;
  }
  throw ConfigError("comparator must be 'gt' or 'ge', got '" + s + "'");
}

std::string consistent_split_label(double theta, Comparator c)
{
  return (c == Comparator::StrictGreater ? ">" : ">=") + text::format_real(theta);
}

std::string inconsistent_split_label(double theta, Comparator c)
{
  return (c == Comparator::StrictGreater ? "<=" : "<") + text::format_real(theta);
}

PoolSplit split_pools(const ConsistencyScores & scores, double theta, Comparator comparator)
{
  if (!(theta >= -1.0 && theta <= 1.0)) {
    throw ConfigError("theta must lie in [-1, 1], got " + text::format_real(theta));
  }
  PoolSplit split;
  split.theta = theta;
  split.comparator = comparator;
  split.scores.reserve(scores.ids.size());
  for (std::size_t i = 0; i < scores.ids.size(); ++i) {
    const double s = scores.scores(static_cast<Eigen::Index>(i));
    (is_consistent(s, theta, comparator) ? split.consistent_ids : split.inconsistent_ids)
      .push_back(scores.ids[i]);
    split.scores.emplace_back(scores.ids[i], s);
  }
  std::sort(split.consistent_ids.begin(), split.consistent_ids.end());
  std::sort(split.inconsistent_ids.begin(), split.inconsistent_ids.end());
  std::sort(split.scores.begin(), split.scores.end(), [](const auto & a, const auto & b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  return split;
}

double suggest_threshold(const ConsistencyScores & scores, double min_pool_fraction)
{
  if (!(min_pool_fraction >= 0.0 && min_pool_fraction < 0.5)) {
    throw ConfigError("suggest_threshold: min_pool_fraction must lie in [0, 0.5)");
  }
  std::vector<double> sorted(scores.scores.data(), scores.scores.data() + scores.scores.size());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.size() < 2) {
    throw ConfigError("suggest_threshold: need at least two scores");
  }
  const std::size_t n = sorted.size();
  const std::size_t floor_count = static_cast<std::size_t>(min_pool_fraction * static_cast<double>(n));
  const std::size_t min_side = std::clamp<std::size_t>(floor_count, 1, n / 2);
  double best_gap = -1.0;
  double theta = sorted.front();
  // i = size of the lower pool
  for (std::size_t i = min_side; i + min_side <= n; ++i) {
    const double gap = sorted[i] - sorted[i - 1];
    if (gap > best_gap) {
      best_gap = gap;
      theta = 0.5 * (sorted[i] + sorted[i - 1]);
    }
  }
  return std::clamp(theta, -1.0, 1.0);
}

void write_pools(const PoolSplit & split, std::ostream & out)
{
  const auto in_label = consistent_split_label(split.theta, split.comparator);
  const auto out_label = inconsistent_split_label(split.theta, split.comparator);
  out << kPoolsHeader << '\n';
  for (const auto & [id, score] : split.scores) {
    const bool consistent = is_consistent(score, split.theta, split.comparator);
    out << id << ',' << text::format_real(score) << ','
        << (consistent ? "consistent," + in_label : "inconsistent," + out_label) << '\n';
  }
}

void save_pools(const PoolSplit & split, const std::filesystem::path & path)
{
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write " + path.string());
  }
  write_pools(split, out);
}

PoolSplit read_pools(std::istream & in)
{
  std::string line;
  if (!std::getline(in, line) || text::trim(line) != kPoolsHeader) {
    throw DataError(std::string("pool file must start with header '") + kPoolsHeader + "'");
  }
  PoolSplit split;
  bool have_theta = false;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) {
      continue;
    }
    const auto f = text::split(line, ',');
    const auto id = f.size() == 4 ? text::parse_real(f[0]) : std::nullopt;
    const auto score = f.size() == 4 ? text::parse_real(f[1]) : std::nullopt;
    if (!id || !score || (f[2] != "consistent" && f[2] != "inconsistent")) {
      throw DataError("malformed pool row: " + line);
    }
    const auto & label = f[3];
    const bool consistent = f[2] == "consistent";
    const bool two_char = label.size() > 1 && label[1] == '=';
    const auto theta = text::parse_real(std::string_view(label).substr(two_char ? 2 : 1));
    if (!theta) {
      throw DataError("malformed split label: " + label);
    }
    const Comparator c = consistent == two_char ? Comparator::GreaterOrEqual : Comparator::StrictGreater;
    if (have_theta && (*theta != split.theta || c != split.comparator)) {
      throw DataError("pool file mixes thresholds");
    }
    split.theta = *theta;
    split.comparator = c;
    have_theta = true;
    const auto pid = static_cast<PointId>(*id);
    (consistent ? split.consistent_ids : split.inconsistent_ids).push_back(pid);
    split.scores.emplace_back(pid, *score);
  }
  std::sort(split.consistent_ids.begin(), split.consistent_ids.end());
  std::sort(split.inconsistent_ids.begin(), split.inconsistent_ids.end());
  return split;
}

PoolSplit load_pools(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  return read_pools(in);
}

ScoreHistogram bucket_histogram(
  const ConsistencyScores & scores, std::span<const int> labels, double bucket_width)
{
  if (!(bucket_width > 0.0 && bucket_width <= 2.0)) {
    throw ConfigError("bucket width must lie in (0, 2]");
  }
  if (!labels.empty() && labels.size() != scores.ids.size()) {
    throw ConfigError("histogram labels do not match the scores");
  }
  const auto buckets = static_cast<std::size_t>(std::ceil(2.0 / bucket_width - 1e-9));
  ScoreHistogram hist;
  hist.labelled = !labels.empty();
  hist.edges.resize(buckets + 1);
  for (std::size_t i = 0; i <= buckets; ++i) {
    hist.edges[buckets - i] = std::max(-1.0, snap(1.0 - static_cast<double>(i) * bucket_width));
  }
  hist.edges.front() = -1.0;
  hist.count_label1.assign(buckets, 0);
  hist.count_label0.assign(buckets, 0);
  hist.count_total.assign(buckets, 0);

  for (std::size_t i = 0; i < scores.ids.size(); ++i) {
    const double s = std::clamp(scores.scores(static_cast<Eigen::Index>(i)), -1.0, 1.0);
    const auto upper = std::lower_bound(hist.edges.begin(), hist.edges.end(), s);
    const auto b = static_cast<std::size_t>(std::max<std::ptrdiff_t>(upper - hist.edges.begin() - 1, 0));
    ++hist.count_total[b];
    if (hist.labelled) {
      ++(labels[i] == 1 ? hist.count_label1 : hist.count_label0)[b];
    }
  }
  return hist;
}

std::vector<int> labels_for(const Dataset & dataset, std::span<const PointId> ids)
{
  const auto all = dataset.binary_labels();
  std::vector<int> out;
  out.reserve(ids.size());
  for (const auto row : dataset.positions_of(ids)) {
    out.push_back(all[static_cast<std::size_t>(row)]);
  }
  return out;
}

void write_histogram(const ScoreHistogram & hist, std::ostream & out)
{
  out << kHistogramHeader << '\n';
  for (std::size_t b = 0; b < hist.buckets(); ++b) {
    out << text::format_real(hist.edges[b]) << ',' << text::format_real(hist.edges[b + 1]) << ',';
    if (hist.labelled) {
      out << hist.count_label1[b] << ',' << hist.count_label0[b];
    } else {
      out << ',';
    }
    out << ',' << hist.count_total[b] << '\n';
  }
}

void save_histogram(const ScoreHistogram & hist, const std::filesystem::path & path)
{
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write " + path.string());
  }
  write_histogram(hist, out);
}

}  // namespace cds
