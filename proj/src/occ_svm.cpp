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

#include "cds/occ_svm.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <vector>

#include <json.hpp>

#include "cds/errors.hpp"
#include "cds/text.hpp"

namespace cds
{

std::string to_string(KernelKind kind)
{
  switch (kind) {
    case KernelKind::Linear:
      return "linear";
    case KernelKind::Rbf:
      return "rbf";
    case KernelKind::Polynomial:
    default:
      return "polynomial";
  }
}

KernelKind parse_kernel_kind(const std::string & s)
{
  if (s == "polynomial" || s == "poly") {
    return KernelKind::Polynomial;
  }
  if (s == "rbf") {
    return KernelKind::Rbf;
  }
  if (s == "linear") {
    return KernelKind::Linear;
  }
  throw ConfigError("unknown kernel '" + s + "'");
}

Eigen::MatrixXd KernelParams::gram(const Eigen::MatrixXd & a, const Eigen::MatrixXd & b) const
{
  Eigen::MatrixXd k = a * b.transpose();
  switch (kind) {
    case KernelKind::Linear:
      break;
    case KernelKind::Rbf: {
      const Eigen::VectorXd na = a.rowwise().squaredNorm();
      const Eigen::VectorXd nb = b.rowwise().squaredNorm();
      for (Eigen::Index j = 0; j < k.cols(); ++j) {
        for (Eigen::Index i = 0; i < k.rows(); ++i) {
          k(i, j) = std::exp(-gamma * std::max(0.0, na(i) + nb(j) - 2.0 * k(i, j)));
        }
      }
      break;
    }
    case KernelKind::Polynomial:
    default:
      k = (gamma * k.array() + coef0).pow(static_cast<double>(degree)).matrix();
      break;
  }
  return k;
}

namespace
{

/// Kernel columns for the training set, either fully cached or recomputed per request.
class KernelColumns
{
public:
  KernelColumns(const Eigen::MatrixXd & points, const KernelParams & kernel, std::size_t cache_cap)
  : points_(points), kernel_(kernel)
  {
    const auto n = static_cast<std::size_t>(points.rows());
    if (n <= cache_cap) {
      full_ = kernel.gram(points, points);
      full_ = 0.5 * (full_ + full_.transpose());
      diagonal_ = full_.diagonal();
    } else {
      diagonal_.resize(points.rows());
      for (Eigen::Index i = 0; i < points.rows(); ++i) {
        diagonal_(i) = kernel(points.row(i), points.row(i));
      }
    }
  }

  const Eigen::VectorXd & diagonal() const { return diagonal_; }

  /// Column i of the kernel matrix. The reference stays valid until the next
  /// call for the same slot.
  const Eigen::VectorXd & column(Eigen::Index i, int slot)
  {
    auto & buf = scratch_[slot];
    if (full_.size() > 0) {
      buf = full_.col(i);
    } else {
      buf = kernel_.gram(points_, points_.row(i)).col(0);
    }
    return buf;
  }

  double entry(Eigen::Index i, Eigen::Index j) const
  {
    return full_.size() > 0 ? full_(i, j) : kernel_(points_.row(i), points_.row(j));
  }

private:
  const Eigen::MatrixXd & points_;
  KernelParams kernel_;
  Eigen::MatrixXd full_;
  Eigen::VectorXd diagonal_;
  Eigen::VectorXd scratch_[2];
};

constexpr double kTau = 1e-12;

}  // namespace

OcsvmModel ocsvm_train(const Eigen::MatrixXd & points, const OcsvmOptions & options)
{
  const Eigen::Index n = points.rows();
  if (n < 2) {
    throw DataError("one-class SVM needs at least two training points");
  }
  if (!(options.nu > 0.0 && options.nu <= 1.0)) {
    throw ConfigError("nu must lie in (0, 1]");
  }
  if (!(options.tol > 0.0) || options.max_passes < 1) {
    throw ConfigError("ocsvm: tol must be positive and max_passes at least 1");
  }
  KernelParams kernel = options.kernel;
  if (kernel.gamma <= 0.0) {
    kernel.gamma = 1.0 / static_cast<double>(points.cols());
  }
  if (kernel.kind == KernelKind::Polynomial && kernel.degree < 1) {
    throw ConfigError("polynomial degree must be at least 1");
  }

  KernelColumns q(points, kernel, options.gram_cache_cap);
  const Eigen::VectorXd & q_diag = q.diagonal();
  const double diag_scale = std::max(1.0, q_diag.cwiseAbs().maxCoeff());
  if ((q_diag.array() < -1e-12 * diag_scale).any()) {
    throw DataError("kernel is not positive semi-definite (negative self-similarity)");
  }

  // Solved in the unit-box scaling 0 <= a_i <= 1, sum a = nu n; the stored
  // model divides everything by nu n.
  const double total = options.nu * static_cast<double>(n);
  constexpr double upper = 1.0;
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  {
    const auto full = static_cast<Eigen::Index>(std::floor(total));
    for (Eigen::Index i = 0; i < std::min(full, n); ++i) {
      alpha(i) = upper;
    }
    if (full < n) {
      alpha(full) = total - static_cast<double>(full);
    }
  }
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (alpha(i) > 0.0) {
      grad += alpha(i) * q.column(i, 0);
    }
  }

  std::mt19937_64 rng(options.seed);
  const long max_iter = static_cast<long>(options.max_passes) * static_cast<long>(n);
  long iter = 0;
  double violation = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (; iter < max_iter; ++iter) {
    // i: may still grow (a_i < 1) with the steepest descent -G_i;
    // j: may still shrink (a_j > 0) with the largest G_j.
    Eigen::Index i = -1;
    Eigen::Index j = -1;
    double g_up = -std::numeric_limits<double>::infinity();
    double g_down = -std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (alpha(t) < upper && -grad(t) > g_up) {
        g_up = -grad(t);
        i = t;
      }
      if (alpha(t) > 0.0 && grad(t) > g_down) {
        g_down = grad(t);
        j = t;
      }
    }
    violation = (i < 0 || j < 0) ? 0.0 : g_up + g_down;
    if (violation < options.tol) {
      break;
    }
    if (stalled > 16) {
      // Numerical stagnation on the extreme pair: retry with a random violating pair.
      std::vector<Eigen::Index> ups;
      std::vector<Eigen::Index> downs;
      for (Eigen::Index t = 0; t < n; ++t) {
        if (alpha(t) < upper && -grad(t) > g_up - violation / 2) {
          ups.push_back(t);
        }
        if (alpha(t) > 0.0 && grad(t) > g_down - violation / 2) {
          downs.push_back(t);
        }
      }
      i = ups[std::uniform_int_distribution<std::size_t>(0, ups.size() - 1)(rng)];
      j = downs[std::uniform_int_distribution<std::size_t>(0, downs.size() - 1)(rng)];
      if (i == j) {
        continue;
      }
      stalled = 0;
    }

    const Eigen::VectorXd & qi = q.column(i, 0);
    const Eigen::VectorXd & qj = q.column(j, 1);
    const double quad = std::max(q_diag(i) + q_diag(j) - 2.0 * qi(j), kTau);
    double delta = (grad(j) - grad(i)) / quad;
    const double room = std::min(upper - alpha(i), alpha(j));
    bool clipped = false;
    if (delta >= room) {
      delta = room;
      clipped = true;
    }
    if (!(delta > 0.0)) {
      ++stalled;
      continue;
    }
    const double old_i = alpha(i);
    const double old_j = alpha(j);
    alpha(i) += delta;
    alpha(j) -= delta;
    if (clipped) {
      if (upper - old_i <= old_j) {
        alpha(i) = upper;
      }
      if (old_j <= upper - old_i) {
        alpha(j) = 0.0;
      }
    }
    const double di = alpha(i) - old_i;
    const double dj = alpha(j) - old_j;
    grad += di * qi + dj * qj;
    stalled = (std::abs(di) < 1e-15 * upper) ? stalled + 1 : 0;
  }
  if (violation >= options.tol) {
    throw ConvergenceError(
      "one-class SVM did not converge in " + std::to_string(max_iter) + " iterations (KKT violation " +
        text::format_real(violation) + ")",
      violation);
  }

  // rho from the free vectors, or the middle of the feasible interval if none are free.
  double free_sum = 0.0;
  long free_count = 0;
  double lb = -std::numeric_limits<double>::infinity();
  double ub = std::numeric_limits<double>::infinity();
  for (Eigen::Index t = 0; t < n; ++t) {
    if (alpha(t) >= upper) {
      lb = std::max(lb, grad(t));
    } else if (alpha(t) <= 0.0) {
      ub = std::min(ub, grad(t));
    } else {
      free_sum += grad(t);
      ++free_count;
    }
  }
  double rho = 0.0;
  if (free_count > 0) {
    rho = free_sum / static_cast<double>(free_count);
  } else if (std::isinf(ub)) {
    rho = lb;  // nu = 1: every coefficient at the bound
  } else if (std::isinf(lb)) {
    rho = ub;
  } else {
    rho = 0.5 * (lb + ub);
  }

  OcsvmModel model;
  model.nu = options.nu;
  model.kernel = kernel;
  model.n_train = static_cast<std::size_t>(n);
  model.rho = rho / total;
  model.iterations = iter;
  model.final_violation = violation;
  model.dual_objective = 0.5 * alpha.dot(grad) / (total * total);

  std::vector<Eigen::Index> sv;
  for (Eigen::Index t = 0; t < n; ++t) {
    if (alpha(t) > 0.0) {
      sv.push_back(t);
    }
  }
  model.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), points.cols());
  model.coefficients.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t s = 0; s < sv.size(); ++s) {
    model.support_vectors.row(static_cast<Eigen::Index>(s)) = points.row(sv[s]);
    model.coefficients(static_cast<Eigen::Index>(s)) = alpha(sv[s]) / total;
  }
  return model;
}

OneClassPrediction ocsvm_predict(const Eigen::MatrixXd & points, const OcsvmModel & model)
{
  if (points.cols() != model.support_vectors.cols()) {
    throw ConfigError("ocsvm_predict: dimension mismatch");
  }
  OneClassPrediction out;
  out.values.resize(points.rows());
  constexpr Eigen::Index block = 1024;
  for (Eigen::Index start = 0; start < points.rows(); start += block) {
    const Eigen::Index rows = std::min(block, points.rows() - start);
    out.values.segment(start, rows) =
      model.kernel.gram(points.middleRows(start, rows), model.support_vectors) * model.coefficients;
  }
  out.values.array() -= model.rho;
  out.verdicts.reserve(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    out.verdicts.push_back(out.values(i) < 0.0 ? Verdict::Outlier : Verdict::Inlier);
  }
  return out;
}

void write_ocsvm_model(const OcsvmModel & model, std::ostream & out)
{
  nlohmann::json j;
  j["kind"] = "ocsvm";
  j["kernel"] = {
    {"kind", to_string(model.kernel.kind)},
    {"degree", model.kernel.degree},
    {"gamma", model.kernel.gamma},
    {"coef0", model.kernel.coef0}};
  j["nu"] = model.nu;
  j["rho"] = model.rho;
  j["n_train"] = model.n_train;
  auto svs = nlohmann::json::array();
  for (Eigen::Index s = 0; s < model.support_vectors.rows(); ++s) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < model.support_vectors.cols(); ++c) {
      row.push_back(model.support_vectors(s, c));
    }
    svs.push_back({{"coef", model.coefficients(s)}, {"x", std::move(row)}});
  }
  j["support_vectors"] = std::move(svs);
  out << j.dump(1) << '\n';
}

OcsvmModel read_ocsvm_model(std::istream & in)
{
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.at("kind") != "ocsvm") {
      throw DataError("model file is not a one-class SVM model");
    }
    OcsvmModel model;
    const auto & k = j.at("kernel");
    model.kernel.kind = parse_kernel_kind(k.at("kind").get<std::string>());
    model.kernel.degree = k.at("degree").get<int>();
    model.kernel.gamma = k.at("gamma").get<double>();
    model.kernel.coef0 = k.at("coef0").get<double>();
    model.nu = j.at("nu").get<double>();
    model.rho = j.at("rho").get<double>();
    model.n_train = j.at("n_train").get<std::size_t>();
    const auto & svs = j.at("support_vectors");
    const auto count = static_cast<Eigen::Index>(svs.size());
    const auto dims = count > 0 ? static_cast<Eigen::Index>(svs.front().at("x").size()) : 0;
    model.support_vectors.resize(count, dims);
    model.coefficients.resize(count);
    for (Eigen::Index s = 0; s < count; ++s) {
      const auto & entry = svs[static_cast<std::size_t>(s)];
      const auto x = entry.at("x").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(x.size()) != dims) {
        throw DataError("support vectors have inconsistent dimensions");
      }
      model.coefficients(s) = entry.at("coef").get<double>();
      model.support_vectors.row(s) = Eigen::Map<const Eigen::RowVectorXd>(x.data(), dims);
    }
    return model;
  } catch (const nlohmann::json::exception & e) {
    throw DataError(std::string("malformed one-class SVM model: ") + e.what());
  }
}

}  // namespace cds
