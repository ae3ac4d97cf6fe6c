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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "poirec/checkin_data.hpp"
#include "poirec/index.hpp"

namespace poirec {

struct CandidateSet;
class KnowledgeGraph;

struct MFConfig {
  std::size_t latent_dim = 20;
  double alpha = 0.01;
  double learning_rate = 0.01;
  std::size_t epochs = 200;
  std::uint64_t seed = 1;
  // Add as many uniformly drawn zero cells as there are positives.
  bool sample_zeros = true;
  // Fit 1 + log(1 + x) instead of the raw count x; zero cells stay zero.
  bool dampen = true;

  friend bool operator==(const MFConfig&, const MFConfig&) = default;
};

void validate(const MFConfig& cfg);

double dampen_count(double x);

struct Observation {
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  double value = 0.0;
};

// The training set Omega over a rows x cols matrix.
struct Observations {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Observation> entries;
};

// Positive cells of `counts` (dampened per cfg) plus sampled zeros per cfg.
Observations make_observations(const FrequencyMatrix& counts, const MFConfig& cfg);

struct MFResult {
  // rows x K and cols x K, row-major.
  std::vector<double> row_factors;
  std::vector<double> col_factors;
  double initial_objective = 0.0;
  // Objective after each epoch.
  std::vector<double> objective_trace;
};

// alpha * (|R|_F^2 + |C|_F^2) + sum over Omega of (x - r_u . c_v)^2.
double mf_objective(const Observations& obs, std::span<const double> row_factors,
                    std::span<const double> col_factors, std::size_t k, double alpha);

// SGD over shuffled Omega. The regularizer is applied as a proximal shrink on
// every visit, spread evenly over a row's (column's) observations, so very
// large alpha drives factors to zero instead of diverging. Throws
// DivergenceError on a non-finite objective.
MFResult train_mf(const Observations& obs, const MFConfig& cfg);
MFResult train_mf(const FrequencyMatrix& counts, const MFConfig& cfg);

class FactorModel {
 public:
  FactorModel() = default;
  // Factor blocks are n x K row-major. Throws std::invalid_argument on a
  // shape mismatch or non-finite entry.
  FactorModel(std::size_t k, double alpha, std::vector<UserIndex> st_users, std::vector<PoiIndex> st_pois,
              std::vector<double> e, std::vector<double> o, std::vector<double> u, std::vector<double> v);

  std::size_t latent_dim() const { return k_; }
  double alpha() const { return alpha_; }
  std::size_t user_count() const { return u_.size() / (k_ ? k_ : 1); }
  std::size_t poi_count() const { return v_.size() / (k_ ? k_ : 1); }
  const std::vector<UserIndex>& st_users() const { return st_users_; }
  const std::vector<PoiIndex>& st_pois() const { return st_pois_; }

  std::optional<std::size_t> st_row(UserIndex u) const;
  std::optional<std::size_t> st_col(PoiIndex v) const;

  std::span<const double> e(std::size_t row) const { return {e_.data() + row * k_, k_}; }
  std::span<const double> o(std::size_t col) const { return {o_.data() + col * k_, k_}; }
  std::span<const double> u(UserIndex user) const { return {u_.data() + user.value * k_, k_}; }
  std::span<const double> v(PoiIndex poi) const { return {v_.data() + poi.value * k_, k_}; }

  const std::vector<double>& e_block() const { return e_; }
  const std::vector<double>& o_block() const { return o_; }
  const std::vector<double>& u_block() const { return u_; }
  const std::vector<double>& v_block() const { return v_; }

  bool bit_equal(const FactorModel& other) const;

  void save(const std::filesystem::path& path) const;
  static FactorModel load(const std::filesystem::path& path);

 private:
  std::size_t k_ = 0;
  double alpha_ = 0.0;
  std::vector<UserIndex> st_users_;
  std::vector<PoiIndex> st_pois_;
  std::unordered_map<UserIndex, std::size_t> st_row_;
  std::unordered_map<PoiIndex, std::size_t> st_col_;
  std::vector<double> e_, o_, u_, v_;
};

// E_u . O_v for graph-indexed u, v. Throws std::out_of_range when either was
// extracted away.
double predict_st(UserIndex u, PoiIndex v, const FactorModel& model);

// U_u . V_v. Throws std::out_of_range outside the graph vocabularies.
double predict_pref(UserIndex u, PoiIndex v, const FactorModel& model);

// Product of the clamped scores; never negative. Zero outside the candidate
// set.
double combine_scores(double st, double pref);
double combine(UserIndex u, PoiIndex v, const FactorModel& model);

struct FactorTraining {
  FactorModel model;
  MFResult st;
  MFResult pref;
};

// Fits E, O on the candidate-restricted counts and U, V on the full
// user x POI counts of `train`, indexed like `graph`.
FactorTraining train_factor_model(std::span<const CheckIn> train, const KnowledgeGraph& graph,
                                  const CandidateSet& candidates, const MFConfig& cfg);

}  // namespace poirec
