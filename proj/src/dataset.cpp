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

#include "cds/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "cds/errors.hpp"
#include "cds/text.hpp"

namespace cds
{

void Dataset::validate() const
{
  const auto n = static_cast<std::size_t>(points.rows());
  if (n < 1 || points.cols() < 1) {
    throw DataError("dataset must have at least one row and one column");
  }
  if (!points.allFinite()) {
    throw DataError("dataset contains non-finite values");
  }
  if (ids.size() != n) {
    throw DataError("dataset ids do not match the number of rows");
  }
  std::unordered_set<PointId> seen(ids.begin(), ids.end());
  if (seen.size() != n) {
    throw DataError("dataset ids are not unique");
  }
  if (labels && labels->size() != n) {
    throw DataError("dataset labels do not match the number of rows");
  }
  if (!column_names.empty() && column_names.size() != static_cast<std::size_t>(points.cols())) {
    throw DataError("dataset column names do not match the number of columns");
  }
}

std::vector<Eigen::Index> Dataset::positions_of(std::span<const PointId> wanted) const
{
  std::unordered_map<PointId, Eigen::Index> index;
  index.reserve(ids.size());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    index.emplace(ids[r], static_cast<Eigen::Index>(r));
  }
  std::vector<Eigen::Index> rows;
  rows.reserve(wanted.size());
  for (const auto id : wanted) {
    const auto it = index.find(id);
    if (it == index.end()) {
      throw DataError("unknown point id " + std::to_string(id));
    }
    rows.push_back(it->second);
  }
  return rows;
}

Dataset Dataset::select(std::span<const PointId> wanted) const
{
  const auto rows = positions_of(wanted);
  Dataset out;
  out.points.resize(static_cast<Eigen::Index>(rows.size()), points.cols());
  out.ids.reserve(rows.size());
  if (labels) {
    out.labels.emplace();
    out.labels->reserve(rows.size());
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.points.row(static_cast<Eigen::Index>(i)) = points.row(rows[i]);
    out.ids.push_back(ids[static_cast<std::size_t>(rows[i])]);
    if (labels) {
      out.labels->push_back((*labels)[static_cast<std::size_t>(rows[i])]);
    }
  }
  out.column_names = column_names;
  return out;
}

std::vector<int> Dataset::binary_labels() const
{
  if (!labels) {
    throw DataError("dataset has no labels");
  }
  std::vector<int> out;
  out.reserve(labels->size());
  for (const auto & label : *labels) {
    if (label == kConsistentLabel) {
      out.push_back(1);
    } else if (label == kOutlierLabel) {
      out.push_back(0);
    } else {
      throw DataError("label '" + label + "' is not binary; group classes first");
    }
  }
  return out;
}

Dataset make_dataset(Eigen::MatrixXd points, std::optional<std::vector<std::string>> labels)
{
  Dataset ds;
  ds.ids.resize(static_cast<std::size_t>(points.rows()));
  for (std::size_t i = 0; i < ds.ids.size(); ++i) {
    ds.ids[i] = i;
  }
  ds.points = std::move(points);
  ds.labels = std::move(labels);
  ds.validate();
  return ds;
}

std::vector<double> impute_column_mean(std::span<const std::optional<double>> column)
{
  double sum = 0.0;
  std::size_t observed = 0;
  for (const auto & v : column) {
    if (v) {
      sum += *v;
      ++observed;
    }
  }
  if (observed == 0) {
    throw DataError("cannot impute a column with no observed values");
  }
  const double mean = sum / static_cast<double>(observed);
  std::vector<double> out;
  out.reserve(column.size());
  for (const auto & v : column) {
    out.push_back(v.value_or(mean));
  }
  return out;
}

namespace
{

std::size_t resolve_column(
  const std::string & spec, const std::vector<std::string> & header, std::size_t n_fields)
{
  if (spec == "last") {
    return n_fields - 1;
  }
  if (spec == "first") {
    return 0;
  }
  const auto it = std::find(header.begin(), header.end(), spec);
  if (it != header.end()) {
    return static_cast<std::size_t>(it - header.begin());
  }
  if (const auto idx = text::parse_real(spec); idx && *idx >= 0 && std::floor(*idx) == *idx) {
    const auto col = static_cast<std::size_t>(*idx);
    if (col < n_fields) {
      return col;
    }
  }
  throw ConfigError("column '" + spec + "' not found");
}

}  // namespace

Dataset read_delimited(std::istream & in, const LoadOptions & options)
{
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header;
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = options.has_header;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) {
      continue;
    }
    auto fields = text::split(line, options.delimiter);
    if (header_pending) {
      header = std::move(fields);
      header_pending = false;
      continue;
    }
    const std::size_t expected = !rows.empty() ? rows.front().size() : header.empty() ? fields.size() : header.size();
    if (fields.size() != expected) {
      throw DataError(
        "line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
        " fields, expected " + std::to_string(expected));
    }
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) {
    throw DataError("no data rows");
  }
  const std::size_t n_fields = rows.front().size();

  std::optional<std::size_t> label_col;
  if (!options.label_column.empty()) {
    label_col = resolve_column(options.label_column, header, n_fields);
  }
  std::vector<bool> skip(n_fields, false);
  for (const auto & s : options.skip_columns) {
    skip[resolve_column(s, header, n_fields)] = true;
  }

  Dataset ds;
  std::vector<std::vector<double>> columns;
  for (std::size_t c = 0; c < n_fields; ++c) {
    if (skip[c] || (label_col && *label_col == c)) {
      continue;
    }
    const std::string name = header.empty() ? "x" + std::to_string(c) : header[c];
    std::vector<std::optional<double>> raw;
    raw.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto & field = rows[r][c];
      if (field == options.missing_token) {
        raw.emplace_back(std::nullopt);
        continue;
      }
      const auto value = text::parse_real(field);
      if (!value || !std::isfinite(*value)) {
        throw DataError(
          "non-numeric field '" + field + "' in row " + std::to_string(r + 1) + ", column " + name);
      }
      raw.emplace_back(value);
    }
    if (std::none_of(raw.begin(), raw.end(), [](const auto & v) { return v.has_value(); })) {
      ds.warnings.push_back("column " + name + " has no observed values; dropped");
      continue;
    }
    columns.push_back(impute_column_mean(raw));
    ds.column_names.push_back(name);
  }
  if (columns.empty()) {
    throw DataError("no numeric feature columns");
  }

  ds.points.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      ds.points(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = columns[c][r];
    }
  }
  ds.ids.resize(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    ds.ids[r] = r;
  }
  if (label_col) {
    ds.labels.emplace();
    ds.labels->reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto & label = rows[r][*label_col];
      if (label == options.missing_token || label.empty()) {
        throw DataError("missing label in row " + std::to_string(r + 1));
      }
      ds.labels->push_back(label);
    }
  }
  ds.validate();
  return ds;
}

Dataset load_delimited(const std::filesystem::path & path, const LoadOptions & options)
{
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  return read_delimited(in, options);
}

void write_delimited(const Dataset & dataset, std::ostream & out, char delimiter)
{
  std::vector<std::string> fields;
  for (Eigen::Index c = 0; c < dataset.dims(); ++c) {
    fields.push_back(
      dataset.column_names.empty() ? "x" + std::to_string(c)
                                   : dataset.column_names[static_cast<std::size_t>(c)]);
  }
  if (dataset.labels) {
    fields.emplace_back("label");
  }
  out << text::join(fields, delimiter) << '\n';
  for (Eigen::Index r = 0; r < dataset.size(); ++r) {
    fields.clear();
    for (Eigen::Index c = 0; c < dataset.dims(); ++c) {
      fields.push_back(text::format_real(dataset.points(r, c)));
    }
    if (dataset.labels) {
      fields.push_back((*dataset.labels)[static_cast<std::size_t>(r)]);
    }
    out << text::join(fields, delimiter) << '\n';
  }
}

void save_delimited(const Dataset & dataset, const std::filesystem::path & path, char delimiter)
{
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write " + path.string());
  }
  write_delimited(dataset, out, delimiter);
}

GroupedDataset group_outlier_classes(const Dataset & dataset, const GroupingOptions & options)
{
  if (!dataset.labels) {
    throw DataError("grouping requires labels");
  }
  if (!(options.threshold_fraction > 0.0 && options.threshold_fraction < 1.0)) {
    throw ConfigError("threshold fraction must lie in (0, 1)");
  }
  const auto & labels = *dataset.labels;
  std::map<std::string, std::size_t> counts;
  for (const auto & l : labels) {
    ++counts[l];
  }
  if (counts.size() < 2) {
    throw DataError("grouping needs at least two classes");
  }

  std::vector<std::string> outlier_classes;
  if (!options.outlier_classes.empty()) {
    for (const auto & c : options.outlier_classes) {
      if (!counts.contains(c)) {
        throw ConfigError("outlier class '" + c + "' does not occur in the labels");
      }
      outlier_classes.push_back(c);
    }
  } else if (counts.size() == 2) {
    const auto & [a, na] = *counts.begin();
    const auto & [b, nb] = *std::next(counts.begin());
    if (na == nb) {
      throw DataError("two-class input with equal class sizes; name the outlier class explicitly");
    }
    outlier_classes.push_back(na < nb ? a : b);
  } else {
    const auto cutoff = static_cast<std::size_t>(
      std::floor(options.threshold_fraction * static_cast<double>(labels.size())));
    for (const auto & [cls, count] : counts) {
      if (count < cutoff) {
        outlier_classes.push_back(cls);
      }
    }
  }
  if (outlier_classes.size() == counts.size()) {
    throw DataError("every class falls below the grouping threshold; no consistent class remains");
  }

  const std::unordered_set<std::string> is_outlier(outlier_classes.begin(), outlier_classes.end());
  GroupedDataset out{dataset, {}, outlier_classes};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool outlier = is_outlier.contains(labels[i]);
    (*out.dataset.labels)[i] = outlier ? kOutlierLabel : kConsistentLabel;
    if (outlier) {
      out.truth.outlier_ids.push_back(dataset.ids[i]);
    }
  }
  out.truth.m = out.truth.outlier_ids.size();
  return out;
}

Dataset generate_synthetic(const SyntheticOptions & options)
{
  if (options.n_consistent < 1 || options.n_outlier < 1 || options.dims < 1) {
    throw ConfigError("synthetic counts and dimension must be at least 1");
  }
  constexpr double kCentreRadius = 10.0;
  constexpr double kBlobSigma = 0.5;
  constexpr double kBoxInflation = 1.5;

  const auto d = static_cast<Eigen::Index>(options.dims);
  const auto n_in = static_cast<Eigen::Index>(options.n_consistent);
  const auto n_out = static_cast<Eigen::Index>(options.n_outlier);
  const Eigen::Index n_blobs = std::min<Eigen::Index>(3, n_in);

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::MatrixXd centres(n_blobs, d);
  for (Eigen::Index b = 0; b < n_blobs; ++b) {
    Eigen::VectorXd dir(d);
    do {
      for (Eigen::Index j = 0; j < d; ++j) {
        dir(j) = normal(rng);
      }
    } while (dir.norm() == 0.0);
    centres.row(b) = kCentreRadius * dir.normalized().transpose();
  }

  Eigen::MatrixXd points(n_in + n_out, d);
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(n_in + n_out));
  for (Eigen::Index i = 0; i < n_in; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      points(i, j) = centres(i % n_blobs, j) + kBlobSigma * normal(rng);
    }
    labels.emplace_back(kConsistentLabel);
  }

  const Eigen::RowVectorXd lo = points.topRows(n_in).colwise().minCoeff();
  const Eigen::RowVectorXd hi = points.topRows(n_in).colwise().maxCoeff();
  const Eigen::RowVectorXd mid = 0.5 * (lo + hi);
  const Eigen::RowVectorXd half =
    (kBoxInflation * 0.5 * (hi - lo)).cwiseMax(3.0 * kBlobSigma);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (Eigen::Index i = n_in; i < n_in + n_out; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      points(i, j) = mid(j) + half(j) * unit(rng);
    }
    labels.emplace_back(kOutlierLabel);
  }

  auto ds = make_dataset(std::move(points), std::move(labels));
  for (Eigen::Index j = 0; j < d; ++j) {
    ds.column_names.push_back("x" + std::to_string(j));
  }
  return ds;
}

Eigen::MatrixXd standardize(const Eigen::MatrixXd & points, const Eigen::MatrixXd & reference)
{
  if (points.cols() != reference.cols()) {
    throw ConfigError("standardize: column count mismatch");
  }
  const Eigen::RowVectorXd mean = reference.colwise().mean();
  Eigen::RowVectorXd sd(reference.cols());
  const auto n = static_cast<double>(reference.rows());
  for (Eigen::Index j = 0; j < reference.cols(); ++j) {
    const double var =
      n > 1 ? (reference.col(j).array() - mean(j)).square().sum() / (n - 1.0) : 0.0;
    sd(j) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return (points.rowwise() - mean).array().rowwise() / sd.array();
}

}  // namespace cds
