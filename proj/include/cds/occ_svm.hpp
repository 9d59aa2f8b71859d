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
#include <string>

#include <Eigen/Core>

#include "cds/occ_gaussian.hpp"

namespace cds
{

enum class KernelKind
{
  Polynomial,
  Rbf,
  Linear,
};

std::string to_string(KernelKind kind);
KernelKind parse_kernel_kind(const std::string & s);

/**
 * polynomial: (gamma <x, y> + coef0)^degree
 * rbf:        exp(-gamma |x - y|^2)
 * linear:     <x, y>
 *
 * gamma <= 0 means "1 / d", resolved when a model is trained.
 */
struct KernelParams
{
  KernelKind kind = KernelKind::Polynomial;
  int degree = 3;
  double gamma = 0.0;
  double coef0 = 0.0;

  template <typename DerivedA, typename DerivedB>
  double operator()(const Eigen::MatrixBase<DerivedA> & x, const Eigen::MatrixBase<DerivedB> & y) const
  {
    switch (kind) {
      case KernelKind::Linear:
        return x.cwiseProduct(y).sum();
      case KernelKind::Rbf:
        return std::exp(-gamma * (x - y).squaredNorm());
      case KernelKind::Polynomial:
      default:
        return std::pow(gamma * x.cwiseProduct(y).sum() + coef0, degree);
    }
  }

  /// Kernel matrix between the rows of `a` and the rows of `b`.
  Eigen::MatrixXd gram(const Eigen::MatrixXd & a, const Eigen::MatrixXd & b) const;
};

struct OcsvmOptions
{
  double nu = 0.5;
  KernelParams kernel;
  /// Stop when the maximal KKT violation drops below this (unit-box scale).
  double tol = 1e-3;
  /// Iteration budget, in multiples of the training-set size.
  int max_passes = 1000;
  /// Largest training set whose full kernel matrix is kept in memory.
  std::size_t gram_cache_cap = 8192;
  std::uint64_t seed = 0;
};

/**
 * nu one-class SVM. Dual coefficients are normalised so that they sum to 1
 * and each lies in [0, 1/(nu n)]; decision(x) = sum_i coef_i k(sv_i, x) - rho.
 */
struct OcsvmModel
{
  Eigen::MatrixXd support_vectors;  ///< one per row
  Eigen::VectorXd coefficients;
  double rho = 0.0;
  double nu = 0.5;
  KernelParams kernel;
  std::size_t n_train = 0;

  // solver diagnostics
  long iterations = 0;
  double final_violation = 0.0;
  double dual_objective = 0.0;  ///< 0.5 coef^T K coef

  template <typename Derived>
  double decision(const Eigen::MatrixBase<Derived> & x) const
  {
    if (x.size() != support_vectors.cols()) {
      throw ConfigError("ocsvm decision: dimension mismatch");
    }
    double sum = 0.0;
    for (Eigen::Index i = 0; i < support_vectors.rows(); ++i) {
      sum += coefficients(i) * kernel(support_vectors.row(i), x.derived().reshaped().transpose());
    }
    return sum - rho;
  }

  double upper_bound() const { return 1.0 / (nu * static_cast<double>(n_train)); }
};

/// Pairwise (SMO) solver on the nu one-class dual.
OcsvmModel ocsvm_train(const Eigen::MatrixXd & points, const OcsvmOptions & options = {});

/// Outlier iff decision < 0; values hold the decision values.
OneClassPrediction ocsvm_predict(const Eigen::MatrixXd & points, const OcsvmModel & model);

void write_ocsvm_model(const OcsvmModel & model, std::ostream & out);
OcsvmModel read_ocsvm_model(std::istream & in);

}  // namespace cds
