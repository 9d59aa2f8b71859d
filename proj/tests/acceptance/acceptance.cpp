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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Benchmark files are read from $CDS_DATA_DIR, defaulting to the repository data/.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cds/errors.hpp"
#include "cds/pipeline.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;

namespace
{

constexpr int kSeeds = 5;

// criterion 1
constexpr double kIonoPurity = 0.80;
constexpr double kIonoNegativeCapture = 0.80;
constexpr double kIonoSeconds = 30.0;
// criterion 2
constexpr double kIonoSvmMinTp = 70;
constexpr double kIonoSvmMaxFp = 30;
constexpr double kIonoGaussMinTp = 50;
constexpr double kIonoGaussMaxFp = 40;
// criterion 3
constexpr double kArrPurity = 0.85;
constexpr double kArrOutlierCapture = 0.60;
constexpr double kArrNegativeFlagged = 0.90;
// criterion 4
constexpr double kMuskPurity = 0.99;
constexpr double kMuskPositiveCapture = 0.95;
constexpr double kMuskOutlierCapture = 0.99;
constexpr double kMuskRecall = 0.98;
constexpr double kMuskMaxFp = 40;
constexpr double kMuskSeconds = 600.0;
// criterion 5
constexpr double kSynthBottomShare = 0.60;
// criterion 6
constexpr double kScoreOracleTol = 1e-12;
constexpr double kQpOracleTol = 1e-4;
constexpr double kKmeansOracleTol = 1e-10;
constexpr double kMahalanobisTol = 1e-10;

struct Outcome
{
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 3)
{
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point start)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

fs::path data_dir()
{
  if (const char * env = std::getenv("CDS_DATA_DIR")) {
    return env;
  }
  return CDS_SOURCE_DATA_DIR;
}

cds::GroupedDataset load_preset(const cds::Preset & preset, const fs::path & file)
{
  return cds::group_outlier_classes(cds::load_delimited(file, preset.load), preset.grouping);
}

cds::EnsembleConfig ensemble(const std::vector<int> & k, std::uint64_t seed)
{
  cds::EnsembleConfig c;
  c.k_schedule = k;
  c.base_seed = seed;
  return c;
}

cds::ClassifierConfig classifier(cds::ClassifierKind kind)
{
  cds::ClassifierConfig c;
  c.kind = kind;
  return c;
}

std::size_t negatives(const cds::Dataset & d)
{
  const auto labels = d.binary_labels();
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 0));
}

double purity(const cds::PoolCounts & c)
{
  const auto total = c.consistent_positive + c.consistent_negative;
  return total == 0 ? 0.0 : static_cast<double>(c.consistent_positive) / static_cast<double>(total);
}

Outcome missing(const fs::path & file)
{
  return {false, "data unavailable: " + file.string() + " not found"};
}

// -- criteria 1 and 2 ---------------------------------------------------------

struct IonosphereRuns
{
  bool available = false;
  fs::path file;
  double mean_purity = 0.0;
  double mean_capture = 0.0;
  double worst_seconds = 0.0;
  double svm_tp = 0.0;
  double svm_fp = 0.0;
  double gauss_tp = 0.0;
  double gauss_fp = 0.0;
  std::string sizes;
};

IonosphereRuns run_ionosphere()
{
  IonosphereRuns r;
  r.file = data_dir() / "ionosphere.data";
  if (!fs::exists(r.file)) {
    return r;
  }
  r.available = true;
  const auto & preset = cds::find_preset("ionosphere");
  const auto grouped = load_preset(preset, r.file);
  const auto & d = grouped.dataset;
  const double total_neg = static_cast<double>(negatives(d));
  for (int seed = 0; seed < kSeeds; ++seed) {
    const auto start = std::chrono::steady_clock::now();
    const auto scores = cds::score_ensemble(d, ensemble(preset.k_schedule, static_cast<std::uint64_t>(seed)));
    const auto split = cds::split_pools(scores, preset.theta, preset.comparator);
    r.worst_seconds = std::max(r.worst_seconds, seconds_since(start));
    const auto counts = cds::evaluate_split(split, d);
    r.mean_purity += purity(counts) / kSeeds;
    r.mean_capture += static_cast<double>(counts.inconsistent_negative) / total_neg / kSeeds;
    r.sizes += (r.sizes.empty() ? "" : " ") + std::to_string(split.consistent_ids.size()) + "/" +
               std::to_string(split.inconsistent_ids.size());
    for (const auto kind : {cds::ClassifierKind::Svm, cds::ClassifierKind::Gaussian}) {
      const auto report = cds::detect(d, split, classifier(kind));
      const double tp = static_cast<double>(report.confusion->true_outliers_flagged) / kSeeds;
      const double fp = static_cast<double>(report.confusion->false_positives) / kSeeds;
      (kind == cds::ClassifierKind::Svm ? r.svm_tp : r.gauss_tp) += tp;
      (kind == cds::ClassifierKind::Svm ? r.svm_fp : r.gauss_fp) += fp;
    }
  }
  return r;
}

Outcome criterion_1(const IonosphereRuns & r)
{
  if (!r.available) {
    return missing(r.file);
  }
  const bool pass = r.mean_purity >= kIonoPurity && r.mean_capture >= kIonoNegativeCapture && r.worst_seconds < kIonoSeconds;
  return {pass, "mean consistent purity " + fmt(r.mean_purity) + " (>= " + fmt(kIonoPurity, 2) +
                  "), mean negative capture " + fmt(r.mean_capture) + " (>= " + fmt(kIonoNegativeCapture, 2) +
                  "), slowest run " + fmt(r.worst_seconds, 2) + " s, pool sizes C/I per seed " + r.sizes};
}

Outcome criterion_2(const IonosphereRuns & r)
{
  if (!r.available) {
    return missing(r.file);
  }
  const bool svm = r.svm_tp >= kIonoSvmMinTp && r.svm_fp <= kIonoSvmMaxFp;
  const bool gauss = r.gauss_tp >= kIonoGaussMinTp && r.gauss_fp <= kIonoGaussMaxFp;
  return {svm && gauss, "svm mean TP " + fmt(r.svm_tp, 1) + " FP " + fmt(r.svm_fp, 1) + ", gaussian mean TP " +
                          fmt(r.gauss_tp, 1) + " FP " + fmt(r.gauss_fp, 1)};
}

// -- criterion 3 --------------------------------------------------------------

Outcome criterion_3()
{
  const auto file = data_dir() / "arrhythmia.data";
  if (!fs::exists(file)) {
    return missing(file);
  }
  const auto & preset = cds::find_preset("arrhythmia");
  const auto grouped = load_preset(preset, file);
  const auto & d = grouped.dataset;
  const double total_neg = static_cast<double>(negatives(d));
  double mean_purity = 0.0;
  double mean_capture = 0.0;
  double mean_flagged = 0.0;
  for (int seed = 0; seed < kSeeds; ++seed) {
    const auto scores = cds::score_ensemble(d, ensemble(preset.k_schedule, static_cast<std::uint64_t>(seed)));
    const auto split = cds::split_pools(scores, preset.theta, preset.comparator);
    const auto report = cds::detect(d, split, classifier(cds::ClassifierKind::Svm));
    const auto & counts = *report.pool_counts;
    mean_purity += purity(counts) / kSeeds;
    mean_capture += static_cast<double>(counts.inconsistent_negative) / total_neg / kSeeds;
    const double in_pool = static_cast<double>(counts.inconsistent_negative);
    mean_flagged += (in_pool == 0 ? 0.0 : static_cast<double>(report.confusion->true_outliers_flagged) / in_pool) / kSeeds;
  }
  const bool pass = mean_purity >= kArrPurity && mean_capture >= kArrOutlierCapture && mean_flagged >= kArrNegativeFlagged;
  return {pass, "mean consistent purity " + fmt(mean_purity) + ", mean outlier capture " + fmt(mean_capture) +
                  ", mean share of pooled negatives flagged " + fmt(mean_flagged)};
}

// -- criterion 4 --------------------------------------------------------------

Outcome criterion_4()
{
  const auto file = data_dir() / "clean2.data";
  if (!fs::exists(file)) {
    return missing(file);
  }
  const auto & preset = cds::find_preset("musk");
  const auto grouped = load_preset(preset, file);
  const auto & d = grouped.dataset;
  const auto start = std::chrono::steady_clock::now();
  const auto scores = cds::score_ensemble(d, ensemble(preset.k_schedule, 0));
  const auto split = cds::split_pools(scores, preset.theta, preset.comparator);
  const auto report = cds::detect(d, split, classifier(cds::ClassifierKind::Svm));
  const double elapsed = seconds_since(start);
  const auto & c = *report.pool_counts;
  const double pos = static_cast<double>(c.consistent_positive + c.inconsistent_positive);
  const double neg = static_cast<double>(c.consistent_negative + c.inconsistent_negative);
  const double p = purity(c);
  const double pos_capture = static_cast<double>(c.consistent_positive) / pos;
  const double out_capture = static_cast<double>(c.inconsistent_negative) / neg;
  const double recall = static_cast<double>(report.confusion->true_outliers_flagged) / neg;
  const double fp = static_cast<double>(report.confusion->false_positives);
  const bool pass = p >= kMuskPurity && pos_capture >= kMuskPositiveCapture && out_capture >= kMuskOutlierCapture &&
                    recall >= kMuskRecall && fp <= kMuskMaxFp && elapsed < kMuskSeconds;
  return {pass, "purity " + fmt(p) + ", positives captured " + fmt(pos_capture) + ", outliers pooled " +
                  fmt(out_capture) + ", recall " + fmt(recall) + ", FP " + fmt(fp, 0) + ", " + fmt(elapsed, 1) + " s"};
}

// -- criterion 5 --------------------------------------------------------------

Outcome criterion_5()
{
  bool pass = true;
  std::string detail;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    cds::SyntheticOptions o;
    o.seed = static_cast<std::uint64_t>(seed);
    const auto d = cds::generate_synthetic(o);
    const auto labels = d.binary_labels();
    const auto s = cds::score_ensemble(d, ensemble({2, 5, 10, 100, 500}, static_cast<std::uint64_t>(seed)));

    double sum1 = 0.0;
    double sum0 = 0.0;
    std::size_t n0 = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      (labels[i] == 1 ? sum1 : sum0) += s.scores(static_cast<Eigen::Index>(i));
      n0 += labels[i] == 0 ? 1 : 0;
    }
    const double mean1 = sum1 / static_cast<double>(labels.size() - n0);
    const double mean0 = sum0 / static_cast<double>(n0);

    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return s.scores(static_cast<Eigen::Index>(a)) < s.scores(static_cast<Eigen::Index>(b));
    });
    const std::size_t decile = labels.size() / 10;
    std::size_t low0 = 0;
    for (std::size_t i = 0; i < decile; ++i) {
      low0 += labels[order[i]] == 0 ? 1 : 0;
    }
    const double share = static_cast<double>(low0) / static_cast<double>(n0);
    pass = pass && mean1 > mean0 && share >= kSynthBottomShare;
    detail += (detail.empty() ? "" : "; ") + std::string("seed ") + std::to_string(seed) + ": mean1 " + fmt(mean1) +
              " mean0 " + fmt(mean0) + " bottom-decile share " + fmt(share, 2);
  }
  return {pass, detail};
}

// -- criterion 6 --------------------------------------------------------------

Outcome criterion_6()
{
  std::mt19937_64 rng(2026);

  double score_err = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::MatrixXd c = cds_test::gaussian_matrix(2 + trial % 7, 1 + trial % 6, rng);
    score_err = std::max(score_err, std::abs(cds::avg_sim_score(c) - cds_test::brute_force_score(c)));
  }

  std::uniform_real_distribution<double> nu_draw(0.15, 0.95);
  double qp_err = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 3 + trial % 8;
    const Eigen::MatrixXd x = cds_test::gaussian_matrix(n, 2, rng);
    cds::OcsvmOptions opt;
    opt.nu = nu_draw(rng);
    opt.tol = 1e-6;
    opt.max_passes = 1000000;
    if (trial % 2 == 1) {
      opt.kernel.kind = cds::KernelKind::Rbf;
    }
    const auto m = cds::ocsvm_train(x, opt);
    const double oracle = cds_test::dense_qp_objective(m.kernel.gram(x, x), 1.0 / (opt.nu * static_cast<double>(n)));
    qp_err = std::max(qp_err, std::abs(m.dual_objective - oracle));
  }

  double km_err = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index na = 2 + trial % 4;
    const Eigen::Index nb = 10 - na - trial % 3;
    Eigen::MatrixXd x(na + nb, 2);
    x.topRows(na) = cds_test::gaussian_matrix(na, 2, rng, 0.3);
    x.bottomRows(nb) = cds_test::gaussian_matrix(nb, 2, rng, 0.3).rowwise() + Eigen::RowVector2d(8.0, -5.0);
    const auto oracle = cds_test::best_two_partition(x);
    const auto r = cds::kmeans_fit(x, 2, static_cast<std::uint64_t>(trial));
    km_err = std::max(km_err, std::abs(r.inertia - oracle.cost) / std::max(1.0, oracle.cost));
  }

  double maha_err = 0.0;
  cds::GaussianOptions plain;
  plain.shrinkage = 0.0;
  plain.ridge = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index d = 1 + trial % 5;
    const Eigen::VectorXd stretch = (Eigen::VectorXd::Random(d).array() * 0.75 + 1.25).matrix();
    const Eigen::MatrixXd x = cds_test::gaussian_matrix(10 * d + 5, d, rng) * stretch.asDiagonal();
    const auto m = cds::fit_gaussian(x, plain);
    const auto inv = cds_test::invert(cds_test::sample_covariance(x));
    const Eigen::VectorXd q = cds_test::gaussian_matrix(d, 1, rng);
    const double got = cds::mahalanobis_distance(q, m);
    maha_err = std::max(maha_err, std::abs(got - cds_test::direct_distance(q, m.mean, inv)) / std::max(1.0, got));
  }

  const bool pass =
    score_err <= kScoreOracleTol && qp_err <= kQpOracleTol && km_err <= kKmeansOracleTol && maha_err <= kMahalanobisTol;
  std::ostringstream detail;
  detail << std::scientific << std::setprecision(2) << "(a) score " << score_err << ", (b) dual objective " << qp_err
         << ", (c) k-means inertia " << km_err << ", (d) mahalanobis " << maha_err << " (max deviations)";
  return {pass, detail.str()};
}

// -- criterion 7 --------------------------------------------------------------

std::string report_bytes(const cds::DetectionReport & r)
{
  std::ostringstream out;
  cds::write_report_text(r, out);
  cds::write_report_summary(r, out);
  cds::write_report_points(r, out);
  return out.str();
}

Outcome criterion_7()
{
  std::mt19937_64 rng(7);
  std::vector<std::string> failed;

  bool inertia = true;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::MatrixXd x = cds_test::gaussian_matrix(10 + trial % 60, 1 + trial % 5, rng);
    const auto r = cds::kmeans_fit(x, 2 + trial % 8, static_cast<std::uint64_t>(trial));
    for (std::size_t i = 1; i < r.inertia_history.size(); ++i) {
      inertia = inertia && r.inertia_history[i] <= r.inertia_history[i - 1] * (1.0 + 1e-12);
    }
  }
  if (!inertia) {
    failed.emplace_back("inertia");
  }

  cds::SyntheticOptions so;
  so.n_consistent = 400;
  so.n_outlier = 40;
  so.seed = 11;
  const auto d = cds::generate_synthetic(so);
  const auto scores = cds::score_ensemble(d, ensemble({2, 5, 10, 40, 100}, 3));
  if (scores.scores.minCoeff() < -1.0 || scores.scores.maxCoeff() > 1.0) {
    failed.emplace_back("score bounds");
  }

  bool nesting = true;
  for (const auto c : {cds::Comparator::StrictGreater, cds::Comparator::GreaterOrEqual}) {
    std::vector<cds::PointId> previous = scores.ids;
    std::sort(previous.begin(), previous.end());
    for (int step = 0; step <= 200; ++step) {
      auto current = cds::split_pools(scores, -1.0 + 0.01 * step, c).consistent_ids;
      std::sort(current.begin(), current.end());
      nesting = nesting && std::includes(previous.begin(), previous.end(), current.begin(), current.end());
      previous = std::move(current);
    }
  }
  if (!nesting) {
    failed.emplace_back("nesting");
  }

  bool nu_property = true;
  std::uniform_real_distribution<double> nu_draw(0.05, 0.95);
  for (int trial = 0; trial < 60; ++trial) {
    const Eigen::Index n = 10 + trial % 41;
    const Eigen::MatrixXd x = cds_test::gaussian_matrix(n, 2, rng).rowwise() + Eigen::RowVector2d(3.0, 2.0);
    cds::OcsvmOptions opt;
    opt.nu = nu_draw(rng);
    if (trial % 2 == 1) {
      opt.kernel.kind = cds::KernelKind::Rbf;
    }
    const auto m = cds::ocsvm_train(x, opt);
    const auto pred = cds::ocsvm_predict(x, m);
    const double nn = static_cast<double>(n);
    const double resolution = opt.tol / (opt.nu * nn);
    const double outside = static_cast<double>((pred.values.array() < -resolution).count()) / nn;
    const double svs = static_cast<double>(m.support_vectors.rows()) / nn;
    nu_property = nu_property && outside <= opt.nu + 1.0 / nn && svs >= opt.nu - 1.0 / nn;
  }
  if (!nu_property) {
    failed.emplace_back("nu-property");
  }

  bool deterministic = true;
  for (const auto kind : {cds::ClassifierKind::Svm, cds::ClassifierKind::Gaussian}) {
    const auto a = cds::run_pipeline(d, ensemble({2, 5, 10, 40}, 5), 0.5, cds::Comparator::GreaterOrEqual, classifier(kind));
    const auto b = cds::run_pipeline(d, ensemble({2, 5, 10, 40}, 5), 0.5, cds::Comparator::GreaterOrEqual, classifier(kind));
    deterministic = deterministic && report_bytes(a) == report_bytes(b);
  }
  if (!deterministic) {
    failed.emplace_back("determinism");
  }

  std::string detail = "inertia monotone, score bounds, split nesting, nu-property, report determinism";
  if (!failed.empty()) {
    detail = "violated:";
    for (const auto & f : failed) {
      detail += " " + f;
    }
  }
  return {failed.empty(), detail};
}

}  // namespace

int main()
{
  bool all = true;
  auto report = [&all](int id, const std::string & title, const std::function<Outcome()> & check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception & e) {
      o = {false, std::string("error: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " " << title << ": " << o.detail << std::endl;
  };

  // criteria 1 and 2 share the same five runs; run_ionosphere throws into both
  std::function<IonosphereRuns()> runs = [cache = std::optional<IonosphereRuns>()]() mutable {
    if (!cache) {
      cache = run_ionosphere();
    }
    return *cache;
  };
  report(1, "ionosphere split", [&] { return criterion_1(runs()); });
  report(2, "ionosphere detection", [&] { return criterion_2(runs()); });
  report(3, "arrhythmia split and detection", criterion_3);
  report(4, "musk split and detection", criterion_4);
  report(5, "synthetic 1000:70 score separation", criterion_5);
  report(6, "oracle suites", criterion_6);
  report(7, "property suites", criterion_7);
  return all ? EXIT_SUCCESS : EXIT_FAILURE;
}
