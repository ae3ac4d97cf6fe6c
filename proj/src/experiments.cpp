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
#include "poirec/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "poirec/errors.hpp"
#include "poirec/format.hpp"

namespace poirec {

namespace {

constexpr std::array<std::size_t, 3> kSweepKs{1, 10, 20};

SweepRow sweep_point(const SplitDataset& data, const PipelineConfig& cfg, std::size_t value) {
  const auto trained = train_pipeline(data.train, cfg);
  const auto reports = evaluate(trained, data.train, data.test, kSweepKs);
  SweepRow row;
  row.value = value;
  for (std::size_t i = 0; i < kSweepKs.size(); ++i) {
    row.precision[i] = reports[i].precision;
    row.recall[i] = reports[i].recall;
  }
  row.epochs_trained = trained.loss_trace.size();
  return row;
}

}  // namespace

std::vector<CheckIn> subsample_train(std::span<const CheckIn> train, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw ConfigError("sparsity fraction must lie in [0, 1)");
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto drop = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(train.size())));
  std::vector<bool> removed(train.size(), false);
  for (std::size_t i = 0; i < drop; ++i) removed[order[i]] = true;
  std::vector<CheckIn> out;
  out.reserve(train.size() - drop);
  for (std::size_t i = 0; i < train.size(); ++i)
    if (!removed[i]) out.push_back(train[i]);
  if (out.empty()) throw DataError("sparsity removal left no training data");
  return out;
}

std::vector<SparsityRow> run_sparsity_experiment(const SplitDataset& data, std::span<const double> fractions,
                                                 const PipelineConfig& cfg, std::uint64_t seed) {
  for (double f : fractions)
    if (!(f >= 0.0 && f < 1.0)) throw ConfigError("sparsity fraction must lie in [0, 1)");
  const std::array<std::size_t, 1> ks{10};
  std::vector<SparsityRow> rows;
  for (double f : fractions) {
    const auto train = subsample_train(data.train, f, seed);
    const auto trained = train_pipeline(train, cfg);
    const auto report = evaluate(trained, train, data.test, ks).front();
    rows.push_back({f, train.size(), report.precision, report.recall, report.f1});
  }
  return rows;
}

std::vector<SweepRow> run_timeslot_sweep(const SplitDataset& data, std::span<const int> hours,
                                         const PipelineConfig& cfg) {
  std::vector<SweepRow> rows;
  for (int h : hours) {
    if (h <= 0 || 24 % h != 0) throw ConfigError("slot length " + std::to_string(h) + " does not divide 24");
    auto point = cfg;
    point.graph.slot_hours = h;
    rows.push_back(sweep_point(data, point, static_cast<std::size_t>(h)));
  }
  return rows;
}

std::vector<SweepRow> run_dim_sweep(const SplitDataset& data, std::span<const std::size_t> dims,
                                    const PipelineConfig& cfg) {
  std::vector<SweepRow> rows;
  for (auto d : dims) {
    if (d == 0) throw ConfigError("dimensionality must be positive");
    auto point = cfg;
    point.transr.dim_d = d;
    point.transr.dim_k = d;
    rows.push_back(sweep_point(data, point, d));
  }
  return rows;
}

void write_sparsity_csv(const std::filesystem::path& path, std::span<const SparsityRow> rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << "fraction,train_records,prec@10,rec@10,f1@10\n";
  for (const auto& r : rows)
    out << format_double(r.fraction) << ',' << r.train_records << ',' << format_fixed(r.precision, 6) << ','
        << format_fixed(r.recall, 6) << ',' << format_fixed(r.f1, 6) << '\n';
  if (!out) throw DataError("failed writing " + path.string());
}

void write_sweep_csv(const std::filesystem::path& path, std::string_view column, std::span<const SweepRow> rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << column << ",prec@1,prec@10,prec@20,rec@1,rec@10,rec@20\n";
  for (const auto& r : rows) {
    out << r.value;
    for (double p : r.precision) out << ',' << format_fixed(p, 6);
    for (double q : r.recall) out << ',' << format_fixed(q, 6);
    out << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace poirec
