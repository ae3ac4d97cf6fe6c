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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "poirec/checkin_data.hpp"
#include "poirec/pipeline.hpp"

namespace poirec {

inline constexpr std::array<int, 6> kTimeslotGrid{1, 2, 4, 8, 12, 24};
inline constexpr std::array<std::size_t, 6> kDimGrid{70, 80, 90, 100, 110, 120};

struct SparsityRow {
  double fraction = 0.0;
  std::size_t train_records = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Drops round(fraction * n) train records before retraining and evaluating
// at k = 10 against the unchanged test set. One seeded permutation serves
// every fraction, so larger fractions remove supersets. Throws ConfigError
// for a fraction outside [0, 1).
std::vector<SparsityRow> run_sparsity_experiment(const SplitDataset& data, std::span<const double> fractions,
                                                 const PipelineConfig& cfg, std::uint64_t seed);

// Train records left after removing `fraction` of them under `seed`.
std::vector<CheckIn> subsample_train(std::span<const CheckIn> train, double fraction, std::uint64_t seed);

struct SweepRow {
  std::size_t value = 0;  // slot hours or dimensionality
  std::array<double, 3> precision{};  // @1, @10, @20
  std::array<double, 3> recall{};
  std::size_t epochs_trained = 0;
};

// Retrains the pipeline per slot length.
std::vector<SweepRow> run_timeslot_sweep(const SplitDataset& data, std::span<const int> hours,
                                         const PipelineConfig& cfg);

// Retrains the pipeline per dimensionality, used for both the entity and the
// relation space.
std::vector<SweepRow> run_dim_sweep(const SplitDataset& data, std::span<const std::size_t> dims,
                                    const PipelineConfig& cfg);

// CSV: fraction,train_records,prec@10,rec@10,f1@10
void write_sparsity_csv(const std::filesystem::path& path, std::span<const SparsityRow> rows);

// CSV: <column>,prec@1,prec@10,prec@20,rec@1,rec@10,rec@20
void write_sweep_csv(const std::filesystem::path& path, std::string_view column, std::span<const SweepRow> rows);

}  // namespace poirec
