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

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "poirec/kg_builder.hpp"

namespace poirec {

struct TrainConfig {
  double learning_rate = 0.001;
  double margin = 1.0;
  std::size_t dim_d = 100;  // relation space
  std::size_t dim_k = 100;  // entity space
  std::size_t batch_size = 120;
  std::size_t epochs = 1000;
  std::uint64_t seed = 1;
  std::size_t negatives_per_positive = 1;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Throws ConfigError on non-positive rates, dimensions or sizes.
void validate(const TrainConfig& cfg);

// TransR parameters over a user-POI graph.
//
// Entities live in R^k, base relation components (one vector per time slot,
// region and category) in R^d. A composed relation path is the elementwise
// product of its components, and every composed path owns a k x d projection
// matrix M_r stored row-major.
class TransRModel {
 public:
  TransRModel() = default;
  TransRModel(std::size_t users, std::size_t pois, std::size_t slots, std::size_t regions,
              std::size_t categories, std::vector<RelationPath> paths, std::size_t dim_k,
              std::size_t dim_d);

  // Uniform(+-6/sqrt(dim)) vectors rescaled to unit norm, identity
  // (truncated when k != d) projections.
  static TransRModel initialize(const KnowledgeGraph& graph, std::size_t dim_k, std::size_t dim_d,
                                std::uint64_t seed);

  std::size_t dim_k() const { return dim_k_; }
  std::size_t dim_d() const { return dim_d_; }
  std::size_t user_count() const { return users_; }
  std::size_t poi_count() const { return pois_; }
  std::size_t entity_count() const { return users_ + pois_; }
  std::size_t relation_count() const { return paths_.size(); }
  std::size_t slot_count() const { return slot_rel_.size() / dim_d_; }
  std::size_t region_count() const { return region_rel_.size() / dim_d_; }
  std::size_t category_count() const { return category_rel_.size() / dim_d_; }
  const RelationPath& path(RelationId r) const { return paths_.at(r.value); }

  std::size_t row(UserIndex u) const { return u.value; }
  std::size_t row(PoiIndex v) const { return users_ + v.value; }

  std::span<double> entity(std::size_t row);
  std::span<const double> entity(std::size_t row) const;
  std::span<double> slot_vector(std::size_t slot);
  std::span<const double> slot_vector(std::size_t slot) const;
  std::span<double> region_vector(std::size_t region);
  std::span<const double> region_vector(std::size_t region) const;
  std::span<double> category_vector(std::size_t category);
  std::span<const double> category_vector(std::size_t category) const;
  std::span<double> projection(RelationId r);
  std::span<const double> projection(RelationId r) const;

  // Base components of a path in composition order (t, l[, c]).
  std::vector<std::span<const double>> components(RelationId r) const;
  std::vector<double> relation_vector(RelationId r) const;

  // Raw parameter blocks, for checkpoints and bit-level comparisons.
  const std::vector<double>& entity_block() const { return entities_; }
  const std::vector<double>& projection_block() const { return proj_; }
  const std::vector<double>& slot_block() const { return slot_rel_; }
  const std::vector<double>& region_block() const { return region_rel_; }
  const std::vector<double>& category_block() const { return category_rel_; }

  bool bit_equal(const TransRModel& other) const;

  // Binary checkpoint: dims, vocabulary sizes, relation paths, every block
  // row-major and the config used for training.
  void save(const std::filesystem::path& path, const TrainConfig& cfg) const;
  static std::pair<TransRModel, TrainConfig> load(const std::filesystem::path& path);

 private:
  std::size_t users_ = 0;
  std::size_t pois_ = 0;
  std::size_t dim_k_ = 0;
  std::size_t dim_d_ = 0;
  std::vector<RelationPath> paths_;
  std::vector<double> entities_;
  std::vector<double> slot_rel_;
  std::vector<double> region_rel_;
  std::vector<double> category_rel_;
  std::vector<double> proj_;
};

// Elementwise product of equal-length vectors, in order. Throws
// std::invalid_argument on an empty list or a length mismatch.
std::vector<double> compose_relation_embedding(std::span<const std::span<const double>> components);

// Row vector times k x d matrix (row-major). Throws std::invalid_argument on
// a shape mismatch.
std::vector<double> project_entity(std::span<const double> e, std::span<const double> m,
                                   std::size_t k, std::size_t d);

// ||u M_r + r - v M_r||^2. Lower is more plausible. Throws std::out_of_range
// for an unknown relation or entity.
double score(const TransRModel& model, UserIndex u, RelationId r, PoiIndex v);
double score(const TransRModel& model, const Triple& t);

// Sum over negatives of max(0, f(pos) + margin - f(neg)).
double margin_loss(const TransRModel& model, const Triple& positive, std::span<const Triple> negatives,
                   double margin);

struct TrainingExample {
  Triple positive;
  std::vector<Triple> negatives;
};

// Sparse gradient of the batch hinge loss, keyed by parameter block index.
struct Gradient {
  std::map<std::size_t, std::vector<double>> entities;
  std::map<std::size_t, std::vector<double>> slots;
  std::map<std::size_t, std::vector<double>> regions;
  std::map<std::size_t, std::vector<double>> categories;
  std::map<std::uint32_t, std::vector<double>> projections;
};

// Batch loss and its analytic gradient. Only active hinge terms contribute.
std::pair<double, Gradient> loss_and_gradient(const TransRModel& model,
                                              std::span<const TrainingExample> batch, double margin);

struct StepResult {
  double loss = 0.0;
  // (entity row, relation) pairs whose projections were constrained.
  std::vector<std::pair<std::size_t, RelationId>> touched;
};

// One SGD step at cfg.learning_rate followed by the norm constraints: every
// touched entity and base relation vector is pulled back into the unit ball,
// then any touched entity whose projection e M_r exceeds unit norm is
// rescaled so that it does not. Throws DivergenceError on a non-finite loss.
StepResult grad_step(TransRModel& model, std::span<const TrainingExample> batch, const TrainConfig& cfg);

struct TrainResult {
  TransRModel model;
  // Mean batch loss per epoch.
  std::vector<double> loss_trace;
};

// Shuffled mini-batches with negatives resampled every epoch. Deterministic
// for a fixed seed.
TrainResult train(const KnowledgeGraph& graph, const TrainConfig& cfg);

// CSV: epoch,mean_loss
void write_loss_trace(const std::filesystem::path& path, std::span<const double> trace);

}  // namespace poirec
