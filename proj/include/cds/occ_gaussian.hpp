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

#include <cmath>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "cds/errors.hpp"

namespace cds
{

enum class Verdict
{
  Inlier,
  Outlier,
};

/// Per-point one-class output: a verdict plus the raw value it came from
/// (a Mahalanobis distance or an SVM decision value).
struct OneClassPrediction
{
  std::vector<Verdict> verdicts;
  Eigen::VectorXd values;

  std::size_t outlier_count() const;
};

struct GaussianOptions
{
  /// Blend towards the diagonal: (1 - shrinkage) S + shrinkage diag(S).
  double shrinkage = 0.1;
  /// Ridge added to the diagonal; unset means 1e-6 * trace(S) / d.
  std::optional<double> ridge;
  /// Chi-square quantile that sets the distance threshold.
  double quantile = 0.975;
};

struct GaussianModel
{
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  Eigen::MatrixXd precision;
  double distance_threshold = 0.0;
  double shrinkage = 0.0;
  double ridge = 0.0;
  double quantile = 0.0;

  Eigen::Index dims() const { return mean.size(); }
};

/// Fits mean and regularised covariance on the rows of `points`.
GaussianModel fit_gaussian(const Eigen::MatrixXd & points, const GaussianOptions & options = {});

/// sqrt((x - mean)^T precision (x - mean)).
template <typename Derived>
double mahalanobis_distance(const Eigen::MatrixBase<Derived> & x, const GaussianModel & model)
{
  if (x.size() != model.dims()) {
    throw ConfigError("mahalanobis_distance: dimension mismatch");
  }
  const Eigen::VectorXd diff = x.derived().template cast<double>().reshaped() - model.mean;
  return std::sqrt(std::max(0.0, diff.dot(model.precision * diff)));
}

/// Outlier iff distance > model.distance_threshold; values hold the distances.
OneClassPrediction gaussian_predict(const Eigen::MatrixXd & points, const GaussianModel & model);

/// sqrt of the chi-square(dof) quantile.
double chi_square_distance_threshold(Eigen::Index dof, double quantile);

void write_gaussian_model(const GaussianModel & model, std::ostream & out);
GaussianModel read_gaussian_model(std::istream & in);

}  // namespace cds
