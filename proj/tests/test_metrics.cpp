/*
 *  Copyright 2026 The poirec Authors. All Rights Reserved.
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */
#include "doctest.h"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "poirec/metrics.hpp"
#include "test_util.hpp"

using namespace poirec;
using poirec::testing::TempDir;

namespace {

std::vector<EvalCase> worked_example() {
  EvalCase a{"A", {"v1", "v2"}, {"v1", "v3"}, {{"v1", 1}, {"v3", 2}}};
  EvalCase b{"B", {"v2", "v4"}, {"v2"}, {{"v2", 1}}};
  return {a, b};
}

// Mean precision over every k-subset of a pool, enumerated.
double enumerated_random_precision(std::size_t pool, std::size_t relevant, std::size_t k) {
  const std::size_t draw = std::min(k, pool);
  std::vector<bool> mask(pool, false);
  std::fill(mask.end() - static_cast<std::ptrdiff_t>(draw), mask.end(), true);
  double sum = 0;
  std::size_t subsets = 0;
  do {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < relevant; ++i) hits += mask[i] ? 1 : 0;
    sum += static_cast<double>(hits) / static_cast<double>(k);
    ++subsets;
  } while (std::next_permutation(mask.begin(), mask.end()));
  return sum / static_cast<double>(subsets);
}

double enumerated_hit_probability(std::size_t pool, std::size_t relevant, std::size_t k) {
  const std::size_t draw = std::min(k, pool);
  std::vector<bool> mask(pool, false);
  std::fill(mask.end() - static_cast<std::ptrdiff_t>(draw), mask.end(), true);
  double any = 0;
  std::size_t subsets = 0;
  do {
    bool hit = false;
    for (std::size_t i = 0; i < relevant; ++i) hit = hit || mask[i];
    any += hit ? 1 : 0;
    ++subsets;
  } while (std::next_permutation(mask.begin(), mask.end()));
  return any / static_cast<double>(subsets);
}

}  // namespace

TEST_CASE("worked two-user example") {
  const auto cases = worked_example();
  CHECK(precision_at_k(cases, 2) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(recall_at_k(cases, 2) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(f1_at_k(0.5, 0.75) == doctest::Approx(0.6).epsilon(1e-12));
  const auto report = evaluate_at_k(cases, 2);
  CHECK(report.f1 == doctest::Approx(0.6).epsilon(1e-12));
  REQUIRE(report.per_user.size() == 2);
  CHECK(report.per_user[0].hits == 1);
  CHECK(report.per_user[0].recall == 0.5);
  CHECK(report.per_user[1].recall == 1.0);
}

TEST_CASE("trivial precision and recall cases") {
  const std::vector<EvalCase> perfect{{"A", {"a", "b", "c"}, {"a", "b", "c"}, {}}};
  CHECK(precision_at_k(perfect, 3) == 1.0);
  CHECK(recall_at_k(perfect, 3) == 1.0);
  const std::vector<EvalCase> none{{"A", {"x", "y"}, {"a"}, {}}, {"B", {"z"}, {"b"}, {}}};
  CHECK(precision_at_k(none, 2) == 0.0);
  CHECK(recall_at_k(none, 2) == 0.0);
  CHECK(f1_at_k(0.0, 0.0) == 0.0);
  CHECK(f1_at_k(0.5, 0.5) == 0.5);
  CHECK(f1_at_k(0.0, 0.7) == 0.0);
  // One single-item truth hit among four users.
  std::vector<EvalCase> four;
  for (int i = 0; i < 4; ++i) four.push_back({"u" + std::to_string(i), {"p"}, {i == 0 ? "p" : "q"}, {}});
  CHECK(recall_at_k(four, 1) == doctest::Approx(0.25));
}

TEST_CASE("short lists count against precision and repeats count once") {
  const std::vector<EvalCase> shortlist{{"A", {"a"}, {"a", "b"}, {}}};
  CHECK(precision_at_k(shortlist, 4) == 0.25);
  const EvalCase dup{"A", {"a", "a", "b"}, {"a", "b"}, {}};
  CHECK(hits_at_k(dup, 2) == 1);
  CHECK(hits_at_k(dup, 3) == 2);
}

TEST_CASE("invalid metric inputs") {
  const auto cases = worked_example();
  CHECK_THROWS_AS(precision_at_k(cases, 0), std::invalid_argument);
  CHECK_THROWS_AS(recall_at_k(cases, 0), std::invalid_argument);
  CHECK_THROWS_AS(precision_at_k(std::span<const EvalCase>{}, 1), std::invalid_argument);
  const std::vector<EvalCase> empty_truth{{"A", {"a"}, {}, {}}};
  CHECK_THROWS_AS(recall_at_k(empty_truth, 1), std::invalid_argument);
  CHECK_THROWS_AS(random_precision_at_k(3, 4, 1), std::invalid_argument);
}

TEST_CASE("metrics agree with the brute-force oracle on random fixtures") {
  std::mt19937_64 rng(2026);
  for (int trial = 0; trial < 300; ++trial) {
    const auto cases = oracle::random_metric_fixture(rng);
    for (std::size_t k : {1u, 2u, 5u, 10u, 25u}) {
      const auto want = oracle::brute_metrics(cases, k);
      const auto got = evaluate_at_k(cases, k);
      CHECK(std::abs(got.precision - want.precision) <= 1e-12);
      CHECK(std::abs(got.recall - want.recall) <= 1e-12);
      CHECK(std::abs(got.f1 - want.f1) <= 1e-12);
    }
  }
}

TEST_CASE("metric bounds, recall monotone in k and the F1 identity") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const auto cases = oracle::random_metric_fixture(rng);
    double prev_recall = 0;
    for (std::size_t k = 1; k <= 25; ++k) {
      const auto r = evaluate_at_k(cases, k);
      CHECK(r.precision >= 0.0);
      CHECK(r.precision <= 1.0);
      CHECK(r.recall >= prev_recall);
      CHECK(r.recall <= 1.0);
      if (r.precision + r.recall > 0)
        CHECK(r.f1 == doctest::Approx(2 * r.precision * r.recall / (r.precision + r.recall)).epsilon(1e-12));
      else
        CHECK(r.f1 == 0.0);
      prev_recall = r.recall;
    }
  }
}

TEST_CASE("random baselines match subset enumeration") {
  for (std::size_t pool = 1; pool <= 9; ++pool)
    for (std::size_t rel = 0; rel <= pool; ++rel)
      for (std::size_t k : {1u, 2u, 3u, 5u, 12u}) {
        CAPTURE(pool);
        CAPTURE(rel);
        CAPTURE(k);
        CHECK(random_precision_at_k(pool, rel, k) ==
              doctest::Approx(enumerated_random_precision(pool, rel, k)).epsilon(1e-12));
        CHECK(random_hit_probability(pool, rel, k) ==
              doctest::Approx(enumerated_hit_probability(pool, rel, k)).epsilon(1e-12));
      }
  CHECK(random_precision_at_k(0, 0, 3) == 0.0);
}

TEST_CASE("metric CSV files") {
  TempDir dir;
  const auto cases = worked_example();
  const std::vector<MetricsReport> reports{evaluate_at_k(cases, 1), evaluate_at_k(cases, 2)};
  write_metrics_csv(dir / "m.csv", reports);
  std::ifstream in(dir / "m.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == "k,prec,rec,f1\n1,1.000000,0.750000,0.857143\n2,0.500000,0.750000,0.600000\n");

  write_per_user_csv(dir / "u.csv", cases, reports);
  std::ifstream pu(dir / "u.csv");
  std::string line;
  std::getline(pu, line);
  CHECK(line == "user,k,hits,truth_size,prec,rec,truth_frequency");
  std::getline(pu, line);
  CHECK(line == "A,1,1,2,1.000000,0.500000,v1:1;v3:2");
}
