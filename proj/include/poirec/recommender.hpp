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
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "poirec/candidate_extraction.hpp"
#include "poirec/checkin_data.hpp"
#include "poirec/combined_mf.hpp"
#include "poirec/errors.hpp"
#include "poirec/kg_builder.hpp"
#include "poirec/transr.hpp"

namespace poirec {

struct Query {
  std::string user;
  GeoPoint location;
  std::int64_t time = 0;
};

struct RecommendationItem {
  PoiIndex poi;
  std::string poi_key;
  double score = 0.0;
};

struct RecommendationList {
  Query query;
  int slot = 0;
  int region = 0;
  std::vector<RecommendationItem> items;
  // Eligible POIs after context selection, pruning, the distance filter and
  // visited-POI exclusion.
  std::size_t pool_size = 0;
};

// Raised when a query's context leaves no POI to rank.
class EmptyPoolError : public DataError {
 public:
  using DataError::DataError;
};

struct RecommenderConfig {
  ExtractionConfig extraction;
  bool exclude_visited = true;
  double tz_offset_hours = 0.0;
};

// Train-period POIs per graph user.
using VisitedTable = std::vector<std::unordered_set<PoiIndex>>;

VisitedTable visited_pois(std::span<const CheckIn> train, const KnowledgeGraph& graph);

// Frozen models and tables needed to answer queries. Nothing is copied.
struct RecommenderModels {
  const KnowledgeGraph& graph;
  const TransRModel& transr;
  const FactorModel& factors;
  const RegionModel& regions;
  const HomeTable& homes;
  const PoiCoordinates& pois;
  const VisitedTable& visited;
};

// Relations with the query's slot and region over any category. Falls back to
// every relation of the region, then to every relation.
std::vector<RelationId> context_relations(const KnowledgeGraph& graph, int slot, int region);

// Resolves (slot, region), gathers the user's pruned and distance-filtered
// POIs under each context relation, ranks them by the combined score
// (descending, ties by POI index) and truncates to k. Throws DataError for an
// unknown user and EmptyPoolError when nothing is left to rank.
RecommendationList recommend_topk(const Query& q, std::size_t k, const RecommenderModels& models,
                                  const RecommenderConfig& cfg);

}  // namespace poirec
