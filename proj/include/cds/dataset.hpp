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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace cds
{

using PointId = std::size_t;

/// Label strings used for prepared (binary) datasets.
inline constexpr const char * kConsistentLabel = "1";
inline constexpr const char * kOutlierLabel = "0";

/**
 * @brief Numeric sample set, one point per row.
 *
 * Ids default to the row index of the source file and survive subsetting,
 * so a pool of ids always refers back to the original rows. Labels are kept
 * as raw strings (class names from the source file, or "1"/"0" once grouped).
 */
struct Dataset
{
  Eigen::MatrixXd points;
  std::vector<PointId> ids;
  std::optional<std::vector<std::string>> labels;
  std::vector<std::string> column_names;
  /// Non-fatal notes produced while loading (e.g. dropped all-missing columns).
  std::vector<std::string> warnings;

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dims() const { return points.cols(); }

  /// Throws DataError if any structural invariant is broken.
  void validate() const;

  /// Rows whose ids are listed, in the order given. Throws DataError on unknown ids.
  Dataset select(std::span<const PointId> wanted) const;

  /// Row positions of the given ids.
  std::vector<Eigen::Index> positions_of(std::span<const PointId> wanted) const;

  /// Labels decoded as 1 (consistent) / 0 (outlier). Throws DataError if
  /// labels are absent or not binary.
  std::vector<int> binary_labels() const;
};

/// Builds a dataset with default ids 0..n-1 and validates it.
Dataset make_dataset(
  Eigen::MatrixXd points, std::optional<std::vector<std::string>> labels = std::nullopt);

struct OutlierGroundTruth
{
  std::vector<PointId> outlier_ids;
  std::size_t m = 0;
};

struct LoadOptions
{
  char delimiter = ',';
  bool has_header = false;
  /// Column name, 0-based index, or "first"/"last". Empty means no labels.
  std::string label_column;
  std::string missing_token = "?";
  /// Columns to ignore entirely (names or 0-based indices), e.g. string keys.
  std::vector<std::string> skip_columns;
};

/**
 * Reads a delimited numeric file. Fields equal to the missing token are
 * imputed with their column mean; a column that is entirely missing is
 * dropped and noted in Dataset::warnings.
 */
Dataset load_delimited(const std::filesystem::path & path, const LoadOptions & options = {});
Dataset read_delimited(std::istream & in, const LoadOptions & options = {});

/// Writes points (and a trailing "label" column when labels exist) with a header row.
void write_delimited(const Dataset & dataset, std::ostream & out, char delimiter = ',');
void save_delimited(const Dataset & dataset, const std::filesystem::path & path, char delimiter = ',');

/// Replaces missing entries (nullopt) by the mean of the observed ones.
std::vector<double> impute_column_mean(std::span<const std::optional<double>> column);

struct GroupingOptions
{
  double threshold_fraction = 0.05;
  /// Explicit outlier classes; when non-empty the frequency rule is bypassed.
  std::vector<std::string> outlier_classes;
};

struct GroupedDataset
{
  Dataset dataset;  ///< same points, labels rewritten to "1"/"0"
  OutlierGroundTruth truth;
  std::vector<std::string> outlier_classes;
};

/**
 * Collapses a labelled dataset into consistent (1) vs outlier (0).
 *
 * Multi-class input: a class is an outlier class when its count is below
 * floor(threshold_fraction * n). Two-class input: the smaller class is the
 * outlier class regardless of the threshold.
 */
GroupedDataset group_outlier_classes(const Dataset & dataset, const GroupingOptions & options = {});

struct SyntheticOptions
{
  std::size_t n_consistent = 1000;
  std::size_t n_outlier = 70;
  std::size_t dims = 10;
  std::uint64_t seed = 1;
};

/// Tight isotropic blobs (label "1") over a uniform background (label "0").
Dataset generate_synthetic(const SyntheticOptions & options);

/// Column z-scoring with statistics taken from `reference`; zero-variance columns are only centred.
Eigen::MatrixXd standardize(const Eigen::MatrixXd & points, const Eigen::MatrixXd & reference);

}  // namespace cds
