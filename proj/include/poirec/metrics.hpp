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
#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace poirec {

// One evaluated user: the ranked recommendations and the test-period truth.
struct EvalCase {
  std::string user;
  std::vector<std::string> recommended;
  std::set<std::string> truth;
  // Test-period visit count per truth POI, reported only.
  std::map<std::string, std::size_t> truth_frequency;
};

// Hits among the first k recommendations. Duplicate recommendations count
// once.
std::size_t hits_at_k(const EvalCase& c, std::size_t k);

// Means over the cases of hits/k and hits/|truth|. Throw
// std::invalid_argument for k = 0, an empty case list or an empty truth set.
double precision_at_k(std::span<const EvalCase> cases, std::size_t k);
double recall_at_k(std::span<const EvalCase> cases, std::size_t k);

// 2pr / (p + r), zero when both are zero.
double f1_at_k(double precision, double recall);

struct UserMetrics {
  std::string user;
  std::size_t hits = 0;
  std::size_t truth_size = 0;
  double precision = 0.0;
  double recall = 0.0;
};

struct MetricsReport {
  std::size_t k = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<UserMetrics> per_user;
};

MetricsReport evaluate_at_k(std::span<const EvalCase> cases, std::size_t k);

// Expected precision@k of a uniformly random ranking of `pool_size` items
// of which `relevant` are in the truth set: min(k, n) * relevant / n / k.
double random_precision_at_k(std::size_t pool_size, std::size_t relevant, std::size_t k);

// Probability that a uniformly random top-k contains at least one relevant
// item: 1 - prod_{i<k} (n - relevant - i) / (n - i).
double random_hit_probability(std::size_t pool_size, std::size_t relevant, std::size_t k);

// CSV: k,prec,rec,f1
void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricsReport> reports);

// CSV: user,k,hits,truth_size,prec,rec,truth_frequency (poi:count;...)
void write_per_user_csv(const std::filesystem::path& path, std::span<const EvalCase> cases,
                        std::span<const MetricsReport> reports);

}  // namespace poirec
