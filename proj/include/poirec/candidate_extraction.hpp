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
#include <limits>
#include <span>
#include <vector>

#include "poirec/checkin_data.hpp"
#include "poirec/kg_builder.hpp"
#include "poirec/transr.hpp"

namespace poirec {

struct ExtractionConfig {
  // Fraction of ranked pairs kept per relation, in (0, 1].
  double theta_keep = 0.5;
  // Base radius around the user's home mean, kilometres.
  double theta_d_km = 50.0;
  // Radius inflation per kilometre of home spread (sqrt of the covariance trace).
  double sigma_multiplier = 1.0;
  std::size_t max_candidates = 1'000'000;

  friend bool operator==(const ExtractionConfig&, const ExtractionConfig&) = default;
};

void validate(const ExtractionConfig& cfg);

struct ScoredPair {
  UserIndex user;
  PoiIndex poi;
  RelationId relation;
  double score = 0.0;
  double distance_km = 0.0;
};

// Extracted user and POI sets feeding the spatio-temporal factorization.
// Both sets are ordered by each member's best (lowest) TransR score.
struct CandidateSet {
  std::vector<UserIndex> users;
  std::vector<PoiIndex> pois;
  std::vector<ScoredPair> pairs;

  bool empty() const { return pairs.empty(); }
};

// Homes aligned with the graph's user indices, POI coordinates with its POI
// indices.
using HomeTable = std::vector<HomeLocation>;
using PoiCoordinates = std::vector<GeoPoint>;

enum class RankOrder {
  kMostPlausibleFirst,  // ascending score
  kLeastPlausibleFirst  // descending score
};

// Scores every pair in users_under(r) x pois_under(r) and sorts it. Ties are
// broken by (user, POI) index in both orders.
std::vector<ScoredPair> rank_pairs(const TransRModel& model, const KnowledgeGraph& graph, RelationId r,
                                   RankOrder order = RankOrder::kMostPlausibleFirst);

// Same ranking for one user against every POI under r.
std::vector<ScoredPair> rank_pairs_for_user(const TransRModel& model, const KnowledgeGraph& graph,
                                            UserIndex user, RelationId r);

// Keeps the first ceil(theta * n) pairs.
std::vector<ScoredPair> prune_by_score(std::span<const ScoredPair> ranked, double theta);

// Keeps (u, v) iff haversine(mu_u, v) <= theta_d + sigma_multiplier * spread_u,
// preserving order, and caps the result at max_candidates. Throws DataError
// when a home or POI coordinate is missing.
CandidateSet filter_by_distance(std::span<const ScoredPair> pairs, const HomeTable& homes,
                                const PoiCoordinates& pois, const ExtractionConfig& cfg);

// rank_pairs -> prune_by_score -> filter_by_distance over each relation in
// `relations` (every relation when empty). Surviving pairs are merged in
// ascending score order. Throws DataError when nothing survives.
CandidateSet extract(const TransRModel& model, const KnowledgeGraph& graph, const HomeTable& homes,
                     const PoiCoordinates& pois, const ExtractionConfig& cfg,
                     std::span<const RelationId> relations = {});

// TSV: user_key, poi_key, score, distance_km.
void save_candidates(const std::filesystem::path& path, const CandidateSet& set, const KnowledgeGraph& graph);
CandidateSet load_candidates(const std::filesystem::path& path, const KnowledgeGraph& graph);

}  // namespace poirec
