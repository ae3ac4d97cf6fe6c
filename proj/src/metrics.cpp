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
#include "poirec/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include "poirec/errors.hpp"
#include "poirec/format.hpp"

namespace poirec {

namespace {

void check(std::span<const EvalCase> cases, std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be positive");
  if (cases.empty()) throw std::invalid_argument("no evaluated users");
  for (const auto& c : cases)
    if (c.truth.empty()) throw std::invalid_argument("user '" + c.user + "' has an empty truth set");
}

}  // namespace

std::size_t hits_at_k(const EvalCase& c, std::size_t k) {
  const std::size_t n = std::min(k, c.recommended.size());
  std::unordered_set<std::string_view> seen;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& poi = c.recommended[i];
    if (seen.insert(poi).second && c.truth.contains(poi)) ++hits;
  }
  return hits;
}

double precision_at_k(std::span<const EvalCase> cases, std::size_t k) {
  check(cases, k);
  double sum = 0;
  for (const auto& c : cases) sum += static_cast<double>(hits_at_k(c, k)) / static_cast<double>(k);
  return sum / static_cast<double>(cases.size());
}

double recall_at_k(std::span<const EvalCase> cases, std::size_t k) {
  check(cases, k);
  double sum = 0;
  for (const auto& c : cases)
    sum += static_cast<double>(hits_at_k(c, k)) / static_cast<double>(c.truth.size());
  return sum / static_cast<double>(cases.size());
}

double f1_at_k(double precision, double recall) {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

MetricsReport evaluate_at_k(std::span<const EvalCase> cases, std::size_t k) {
  MetricsReport r;
  r.k = k;
  r.precision = precision_at_k(cases, k);
  r.recall = recall_at_k(cases, k);
  r.f1 = f1_at_k(r.precision, r.recall);
  for (const auto& c : cases) {
    UserMetrics m;
    m.user = c.user;
    m.hits = hits_at_k(c, k);
    m.truth_size = c.truth.size();
    m.precision = static_cast<double>(m.hits) / static_cast<double>(k);
    m.recall = static_cast<double>(m.hits) / static_cast<double>(m.truth_size);
    r.per_user.push_back(std::move(m));
  }
  return r;
}

double random_precision_at_k(std::size_t pool_size, std::size_t relevant, std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be positive");
  if (relevant > pool_size) throw std::invalid_argument("more relevant items than pool items");
  if (pool_size == 0) return 0.0;
  const double drawn = static_cast<double>(std::min(k, pool_size));
  return drawn * static_cast<double>(relevant) / static_cast<double>(pool_size) / static_cast<double>(k);
}

double random_hit_probability(std::size_t pool_size, std::size_t relevant, std::size_t k) {
  if (relevant > pool_size) throw std::invalid_argument("more relevant items than pool items");
  if (relevant == 0) return 0.0;
  double miss = 1.0;
  const std::size_t draws = std::min(k, pool_size);
  for (std::size_t i = 0; i < draws; ++i) {
    if (pool_size - relevant <= i) return 1.0;
    miss *= static_cast<double>(pool_size - relevant - i) / static_cast<double>(pool_size - i);
  }
  return 1.0 - miss;
}

void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricsReport> reports) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << "k,prec,rec,f1\n";
  for (const auto& r : reports)
    out << r.k << ',' << format_fixed(r.precision, 6) << ',' << format_fixed(r.recall, 6) << ','
        << format_fixed(r.f1, 6) << '\n';
  if (!out) throw DataError("failed writing " + path.string());
}

void write_per_user_csv(const std::filesystem::path& path, std::span<const EvalCase> cases,
                        std::span<const MetricsReport> reports) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << "user,k,hits,truth_size,prec,rec,truth_frequency\n";
  for (const auto& r : reports) {
    for (std::size_t i = 0; i < r.per_user.size() && i < cases.size(); ++i) {
      const auto& m = r.per_user[i];
      out << m.user << ',' << r.k << ',' << m.hits << ',' << m.truth_size << ',' << format_fixed(m.precision, 6)
          << ',' << format_fixed(m.recall, 6) << ',';
      bool first = true;
      for (const auto& [poi, n] : cases[i].truth_frequency) {
        if (!first) out << ';';
        out << poi << ':' << n;
        first = false;
      }
      out << '\n';
    }
  }
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace poirec
