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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include "cds/dataset.hpp"
#include "cds/errors.hpp"

using cds::DataError;
using cds::Dataset;
using cds::LoadOptions;

namespace
{

Dataset read_text(const std::string & text, const LoadOptions & options = {})
{
  std::istringstream in(text);
  return cds::read_delimited(in, options);
}

Dataset labelled(std::vector<std::string> labels)
{
  Eigen::MatrixXd x(static_cast<Eigen::Index>(labels.size()), 1);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    x(i, 0) = static_cast<double>(i);
  }
  return cds::make_dataset(x, std::move(labels));
}

std::vector<std::string> repeat(const std::string & label, std::size_t count)
{
  return std::vector<std::string>(count, label);
}

}  // namespace

TEST_CASE("load: plain numeric file")
{
  const auto d = read_text("1,2\n3,4\n5,6\n");
  CHECK(d.size() == 3);
  CHECK(d.dims() == 2);
  CHECK_FALSE(d.labels.has_value());
  CHECK(d.points(2, 1) == 6.0);
  CHECK(d.ids == std::vector<cds::PointId>{0, 1, 2});
}

TEST_CASE("load: missing token imputed with the observed mean")
{
  LoadOptions opt;
  opt.missing_token = "?";
  const auto d = read_text("1,?\n3,5\n", opt);
  CHECK(d.points(0, 0) == 1.0);
  CHECK(d.points(0, 1) == 5.0);
  CHECK(d.points(1, 1) == 5.0);
}

TEST_CASE("load: label column extraction")
{
  LoadOptions opt;
  opt.label_column = "last";
  const auto d = read_text("1,2,g\n3,4,b\n", opt);
  CHECK(d.dims() == 2);
  REQUIRE(d.labels.has_value());
  CHECK(*d.labels == std::vector<std::string>{"g", "b"});

  opt.label_column = "first";
  const auto f = read_text("a,1,2\nb,3,4\n", opt);
  CHECK(f.points(1, 0) == 3.0);
  CHECK((*f.labels)[1] == "b");

  opt.label_column = "cls";
  opt.has_header = true;
  const auto h = read_text("x,cls,y\n1,p,2\n3,q,4\n", opt);
  CHECK(h.column_names == std::vector<std::string>{"x", "y"});
  CHECK((*h.labels)[0] == "p");
}

TEST_CASE("load: skipped columns")
{
  LoadOptions opt;
  opt.skip_columns = {"0"};
  opt.label_column = "last";
  const auto d = read_text("m1,1,2,1\nm2,3,4,0\n", opt);
  CHECK(d.dims() == 2);
  CHECK(d.points(1, 1) == 4.0);
}

TEST_CASE("load: errors")
{
  CHECK_THROWS_AS(read_text("1,2\n3,x\n"), DataError);
  CHECK_THROWS_AS(read_text("1,2\n3\n"), DataError);
  CHECK_THROWS_AS(read_text(""), DataError);
  CHECK_THROWS_AS(read_text("1,inf\n"), DataError);
  CHECK_THROWS_AS(cds::load_delimited("/nonexistent/cds/file.csv"), DataError);
}

TEST_CASE("load: all-missing column dropped with a warning")
{
  const auto d = read_text("1,?,2\n3,?,4\n");
  CHECK(d.dims() == 2);
  CHECK(d.points(1, 1) == 4.0);
  CHECK(d.warnings.size() == 1);
}

TEST_CASE("impute_column_mean")
{
  using O = std::optional<double>;
  const std::vector<O> a{1.0, std::nullopt, 3.0};
  CHECK(cds::impute_column_mean(a) == std::vector<double>{1.0, 2.0, 3.0});
  const std::vector<O> b{5.0};
  CHECK(cds::impute_column_mean(b) == std::vector<double>{5.0});
  const std::vector<O> c{std::nullopt, std::nullopt};
  CHECK_THROWS_AS(cds::impute_column_mean(c), DataError);
}

TEST_CASE("write then read reproduces the matrix exactly")
{
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1e3);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd x(7, 4);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      x(i) = g(rng) * std::pow(10.0, static_cast<double>(trial % 9) - 4.0);
    }
    const auto d = cds::make_dataset(x, repeat("1", 7));
    std::stringstream buf;
    cds::write_delimited(d, buf);
    LoadOptions opt;
    opt.has_header = true;
    opt.label_column = "label";
    const auto back = cds::read_delimited(buf, opt);
    CHECK(back.points == d.points);
    CHECK(*back.labels == *d.labels);
  }
}

TEST_CASE("select keeps ids and rejects unknown ones")
{
  const auto d = read_text("1\n2\n3\n4\n");
  const std::vector<cds::PointId> want{3, 1};
  const auto s = d.select(want);
  CHECK(s.ids == want);
  CHECK(s.points(0, 0) == 4.0);
  const std::vector<cds::PointId> bad{9};
  CHECK_THROWS_AS(d.select(bad), DataError);
}

TEST_CASE("grouping: two classes, smaller one is the outlier class")
{
  auto labels = repeat("g", 225);
  const auto b = repeat("b", 126);
  labels.insert(labels.end(), b.begin(), b.end());
  const auto grouped = cds::group_outlier_classes(labelled(labels));
  const auto bin = grouped.dataset.binary_labels();
  CHECK(std::count(bin.begin(), bin.end(), 1) == 225);
  CHECK(std::count(bin.begin(), bin.end(), 0) == 126);
  CHECK(grouped.truth.m == 126);
  CHECK(grouped.outlier_classes == std::vector<std::string>{"b"});
}

TEST_CASE("grouping: arrhythmia-shaped class counts give 386 / 66")
{
  // Class sizes of the UCI arrhythmia file (452 rows).
  const std::map<std::string, std::size_t> sizes{
    {"1", 245}, {"2", 44}, {"3", 15}, {"4", 15}, {"5", 13}, {"6", 25}, {"7", 3},
    {"8", 2},   {"9", 9},  {"10", 50}, {"14", 4}, {"15", 5}, {"16", 22}};
  std::vector<std::string> labels;
  for (const auto & [cls, count] : sizes) {
    const auto block = repeat(cls, count);
    labels.insert(labels.end(), block.begin(), block.end());
  }
  REQUIRE(labels.size() == 452);
  const auto grouped = cds::group_outlier_classes(labelled(labels));
  CHECK(grouped.truth.m == 66);
  CHECK(grouped.dataset.size() - static_cast<Eigen::Index>(grouped.truth.m) == 386);
  auto classes = grouped.outlier_classes;
  std::sort(classes.begin(), classes.end());
  CHECK(classes == std::vector<std::string>{"14", "15", "3", "4", "5", "7", "8", "9"});
}

TEST_CASE("grouping: invariants and errors")
{
  CHECK_THROWS_AS(cds::group_outlier_classes(labelled(repeat("a", 5))), DataError);
  CHECK_THROWS_AS(cds::group_outlier_classes(read_text("1\n2\n")), DataError);

  auto labels = repeat("a", 60);
  for (const char * c : {"b", "c", "d"}) {
    labels.push_back(c);
  }
  const auto grouped = cds::group_outlier_classes(labelled(labels));
  CHECK(grouped.truth.m == 3);
  CHECK(grouped.truth.m < static_cast<std::size_t>(grouped.dataset.size()));
  for (const auto id : grouped.truth.outlier_ids) {
    CHECK(std::find(grouped.dataset.ids.begin(), grouped.dataset.ids.end(), id) != grouped.dataset.ids.end());
  }

  cds::GroupingOptions explicit_class;
  explicit_class.outlier_classes = {"a"};
  CHECK(cds::group_outlier_classes(labelled(labels), explicit_class).truth.m == 60);
}

TEST_CASE("synthetic generator")
{
  cds::SyntheticOptions opt;
  const auto d = cds::generate_synthetic(opt);
  CHECK(d.size() == 1070);
  CHECK(d.dims() == 10);
  const auto bin = d.binary_labels();
  CHECK(std::count(bin.begin(), bin.end(), 0) == 70);

  const auto again = cds::generate_synthetic(opt);
  CHECK(again.points == d.points);
  CHECK(*again.labels == *d.labels);

  opt.seed = 2;
  const auto other = cds::generate_synthetic(opt);
  CHECK(other.points != d.points);
  const auto other_bin = other.binary_labels();
  CHECK(std::count(other_bin.begin(), other_bin.end(), 0) == 70);

  const auto tiny = cds::generate_synthetic({1, 1, 2, 7});
  CHECK(tiny.size() == 2);
  CHECK(tiny.binary_labels() == std::vector<int>{1, 0});

  CHECK_THROWS_AS(cds::generate_synthetic({0, 1, 2, 7}), cds::ConfigError);
}
