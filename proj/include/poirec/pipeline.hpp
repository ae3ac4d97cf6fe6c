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
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "poirec/candidate_extraction.hpp"
#include "poirec/checkin_data.hpp"
#include "poirec/combined_mf.hpp"
#include "poirec/kg_builder.hpp"
#include "poirec/metrics.hpp"
#include "poirec/recommender.hpp"
#include "poirec/transr.hpp"

namespace poirec {

struct DataConfig {
  CsvFormat csv;
  double train_fraction = 0.8;
  double tz_offset = 0.0;

  friend bool operator==(const DataConfig&, const DataConfig&);
};

struct GraphConfig {
  int slot_hours = 8;
  RegionMode region_mode = RegionMode::kKMeans;
  int region_k = 200;
  // "poi_id,label" file, used in precomputed mode.
  std::string region_label_file;
  std::uint64_t kmeans_seed = 1;
  bool use_category = true;

  friend bool operator==(const GraphConfig&, const GraphConfig&) = default;
};

struct ExperimentConfig {
  std::vector<double> sparsity_fractions{0.0, 0.1, 0.2, 0.3, 0.4};
  std::vector<int> timeslot_hours{1, 2, 4, 8, 12, 24};
  std::vector<std::size_t> dims{70, 80, 90, 100, 110, 120};

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Every tunable of every stage. Loaded from one JSON file with a section per
// stage; absent keys keep their defaults and unknown keys are rejected.
struct PipelineConfig {
  std::uint64_t seed = 1;
  DataConfig data;
  GraphConfig graph;
  TrainConfig transr;
  ExtractionConfig extraction;
  MFConfig mf;
  bool exclude_visited = true;
  std::vector<std::size_t> eval_ks{1, 5, 10, 20};
  ExperimentConfig experiments;

  // Pushes the top-level seed into the stage configs.
  void apply_seed(std::uint64_t s);
  RecommenderConfig recommender() const;
};

// Throws ConfigError on any invalid value.
void validate(const PipelineConfig& cfg);

PipelineConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const PipelineConfig& cfg);
PipelineConfig load_config(const std::filesystem::path& path);

// One coordinate per graph POI: the mean of its train check-ins.
PoiCoordinates poi_coordinates(std::span<const CheckIn> train, const KnowledgeGraph& graph);

// One home per graph user. Throws DataError if a user has no train check-in.
HomeTable home_table(std::span<const CheckIn> train, const KnowledgeGraph& graph);

// k-means over the distinct POI coordinates, or the label file.
RegionModel fit_regions(std::span<const CheckIn> train, const PipelineConfig& cfg);

struct TrainedPipeline {
  PipelineConfig config;
  RegionModel regions;
  KnowledgeGraph graph;
  TransRModel transr;
  std::vector<double> loss_trace;
  HomeTable homes;
  PoiCoordinates pois;
  CandidateSet candidates;
  FactorTraining factors;
  VisitedTable visited;

  RecommenderModels models() const { return {graph, transr, factors.model, regions, homes, pois, visited}; }
};

TrainedPipeline train_pipeline(std::span<const CheckIn> train, const PipelineConfig& cfg);

// Evaluated users have at least one check-in on each side of the split. The
// query replays the user's last train location at the time of their first
// test check-in. A context with no eligible POI yields an empty list.
std::vector<EvalCase> evaluation_cases(const TrainedPipeline& p, std::span<const CheckIn> train,
                                       std::span<const CheckIn> test, std::size_t max_k);

std::vector<MetricsReport> evaluate(const TrainedPipeline& p, std::span<const CheckIn> train,
                                    std::span<const CheckIn> test, std::span<const std::size_t> ks);

// Expected precision@k of ranking each evaluated user's eligible catalog
// (every graph POI, minus train-visited ones when excluded) uniformly at
// random, averaged over the cases.
double random_baseline_precision(const TrainedPipeline& p, std::span<const EvalCase> cases, std::size_t k);

}  // namespace poirec
