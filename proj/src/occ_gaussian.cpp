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

#include "cds/occ_gaussian.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <string>

#include <Eigen/Cholesky>
#include <boost/math/distributions/chi_squared.hpp>
#include <json.hpp>

#include "cds/text.hpp"

namespace cds
{

std::size_t OneClassPrediction::outlier_count() const
{
  return static_cast<std::size_t>(std::count(verdicts.begin(), verdicts.end(), Verdict::Outlier));
}

double chi_square_distance_threshold(Eigen::Index dof, double quantile)
{
  if (dof < 1 || !(quantile > 0.0 && quantile < 1.0)) {
    throw ConfigError("chi-square threshold needs dof >= 1 and quantile in (0, 1)");
  }
  const boost::math::chi_squared_distribution<double> chi2(static_cast<double>(dof));
  return std::sqrt(boost::math::quantile(chi2, quantile));
}

GaussianModel fit_gaussian(const Eigen::MatrixXd & points, const GaussianOptions & options)
{
  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();
  if (n < 2) {
    throw DataError("Gaussian fit needs at least two points");
  }
  if (!(options.shrinkage >= 0.0 && options.shrinkage <= 1.0)) {
    throw ConfigError("shrinkage must lie in [0, 1]");
  }
  if (options.ridge && !(*options.ridge >= 0.0)) {
    throw ConfigError("ridge must be non-negative");
  }

  GaussianModel model;
  model.mean = points.colwise().mean().transpose();
  const Eigen::MatrixXd centred = points.rowwise() - model.mean.transpose();
  const Eigen::MatrixXd sample = (centred.transpose() * centred) / static_cast<double>(n - 1);

  model.shrinkage = options.shrinkage;
  model.ridge = options.ridge.value_or(1e-6 * sample.trace() / static_cast<double>(d));
  model.quantile = options.quantile;
  model.covariance = (1.0 - options.shrinkage) * sample;
  model.covariance.diagonal() += options.shrinkage * sample.diagonal();
  model.covariance.diagonal().array() += model.ridge;
  model.covariance = 0.5 * (model.covariance + model.covariance.transpose());

  const Eigen::LLT<Eigen::MatrixXd> llt(model.covariance);
  const double min_diag = model.covariance.diagonal().minCoeff();
  if (llt.info() != Eigen::Success || !(min_diag > 0.0)) {
    throw DataError(
      "covariance is not positive definite after regularisation (shrinkage " +
      text::format_real(model.shrinkage) + ", ridge " + text::format_real(model.ridge) +
      ", smallest diagonal entry " + text::format_real(min_diag) + "); increase the ridge");
  }
  model.precision = llt.solve(Eigen::MatrixXd::Identity(d, d));
  model.precision = 0.5 * (model.precision + model.precision.transpose());
  model.distance_threshold = chi_square_distance_threshold(d, options.quantile);
  return model;
}

OneClassPrediction gaussian_predict(const Eigen::MatrixXd & points, const GaussianModel & model)
{
  if (points.cols() != model.dims()) {
    throw ConfigError("gaussian_predict: dimension mismatch");
  }
  OneClassPrediction out;
  out.values.resize(points.rows());
  out.verdicts.reserve(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    out.values(i) = mahalanobis_distance(points.row(i), model);
    out.verdicts.push_back(out.values(i) > model.distance_threshold ? Verdict::Outlier : Verdict::Inlier);
  }
  return out;
}

namespace
{

nlohmann::json matrix_to_json(const Eigen::MatrixXd & m)
{
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(m(r, c));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json & j)
{
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j.front().size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(r)].size()) != cols) {
      throw DataError("ragged matrix in model file");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

}  // namespace

void write_gaussian_model(const GaussianModel & model, std::ostream & out)
{
  nlohmann::json j;
  j["kind"] = "gaussian";
  j["mean"] = std::vector<double>(model.mean.data(), model.mean.data() + model.mean.size());
  j["covariance"] = matrix_to_json(model.covariance);
  j["shrinkage"] = model.shrinkage;
  j["ridge"] = model.ridge;
  j["quantile"] = model.quantile;
  j["distance_threshold"] = model.distance_threshold;
  out << j.dump(1) << '\n';
}

GaussianModel read_gaussian_model(std::istream & in)
{
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.at("kind") != "gaussian") {
      throw DataError("model file is not a Gaussian model");
    }
    GaussianModel model;
    const auto mean = j.at("mean").get<std::vector<double>>();
    model.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    model.covariance = matrix_from_json(j.at("covariance"));
    if (model.covariance.rows() != model.dims() || model.covariance.cols() != model.dims()) {
      throw DataError("covariance shape does not match the mean");
    }
    model.shrinkage = j.at("shrinkage").get<double>();
    model.ridge = j.at("ridge").get<double>();
    model.quantile = j.at("quantile").get<double>();
    model.distance_threshold = j.at("distance_threshold").get<double>();
    const Eigen::LLT<Eigen::MatrixXd> llt(model.covariance);
    if (llt.info() != Eigen::Success) {
      throw DataError("stored covariance is not positive definite");
    }
    model.precision = llt.solve(Eigen::MatrixXd::Identity(model.dims(), model.dims()));
    return model;
  } catch (const nlohmann::json::exception & e) {
    throw DataError(std::string("malformed Gaussian model: ") + e.what());
  }
}

}  // namespace cds
