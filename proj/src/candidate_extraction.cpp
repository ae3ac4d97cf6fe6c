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
#include "poirec/candidate_extraction.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "poirec/errors.hpp"
#include "poirec/format.hpp"

namespace poirec {

namespace {

bool ascending(const ScoredPair& a, const ScoredPair& b) {
  if (a.score != b.score) return a.score < b.score;
  if (a.user != b.user) return a.user < b.user;
  if (a.poi != b.poi) return a.poi < b.poi;
  return a.relation < b.relation;
}

bool descending(const ScoredPair& a, const ScoredPair& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.user != b.user) return a.user < b.user;
  if (a.poi != b.poi) return a.poi < b.poi;
  return a.relation < b.relation;
}

// Projects every listed entity once; scores are then O(d) per pair.
std::vector<std::vector<double>> project_all(const TransRModel& model, std::span<const double> m,
                                             const std::vector<std::size_t>& rows) {
  std::vector<std::vector<double>> out;
  out.reserve(rows.size());
  for (auto row : rows) out.push_back(project_entity(model.entity(row), m, model.dim_k(), model.dim_d()));
  return out;
}

double pair_score(const std::vector<double>& pu, const std::vector<double>& pv, const std::vector<double>& r) {
  double s = 0;
  for (std::size_t j = 0; j < r.size(); ++j) {
    const double z = pu[j] + r[j] - pv[j];
    s += z * z;
  }
  return s;
}

void check_relation(const TransRModel& model, const KnowledgeGraph& graph, RelationId r) {
  if (r.value >= graph.relations().size() || r.value >= model.relation_count())
    throw std::out_of_range("unknown relation");
}

}  // namespace

void validate(const ExtractionConfig& cfg) {
  if (!(cfg.theta_keep > 0.0 && cfg.theta_keep <= 1.0)) throw ConfigError("theta_keep must lie in (0, 1]");
  if (!(cfg.theta_d_km > 0.0)) throw ConfigError("theta_d_km must be positive");
  if (!(cfg.sigma_multiplier >= 0.0)) throw ConfigError("sigma_multiplier must be non-negative");
  if (cfg.max_candidates == 0) throw ConfigError("max_candidates must be positive");
}

std::vector<ScoredPair> rank_pairs(const TransRModel& model, const KnowledgeGraph& graph, RelationId r,
                                   RankOrder order) {
  check_relation(model, graph, r);
  const auto& users = graph.users_under(r);
  const auto& pois = graph.pois_under(r);
  std::vector<std::size_t> urows, vrows;
  for (auto u : users) urows.push_back(model.row(u));
  for (auto v : pois) vrows.push_back(model.row(v));
  const auto m = model.projection(r);
  const auto pu = project_all(model, m, urows);
  const auto pv = project_all(model, m, vrows);
  const auto rel = model.relation_vector(r);

  std::vector<ScoredPair> out;
  out.reserve(users.size() * pois.size());
  for (std::size_t i = 0; i < users.size(); ++i) {
    for (std::size_t j = 0; j < pois.size(); ++j) out.push_back({users[i], pois[j], r, pair_score(pu[i], pv[j], rel), 0.0});
  }
  std::sort(out.begin(), out.end(), order == RankOrder::kMostPlausibleFirst ? ascending : descending);
  return out;
}

std::vector<ScoredPair> rank_pairs_for_user(const TransRModel& model, const KnowledgeGraph& graph,
                                            UserIndex user, RelationId r) {
  check_relation(model, graph, r);
  if (user.value >= model.user_count()) throw std::out_of_range("unknown user");
  const auto& pois = graph.pois_under(r);
  std::vector<std::size_t> vrows;
  for (auto v : pois) vrows.push_back(model.row(v));
  const auto m = model.projection(r);
  const auto pu = project_entity(model.entity(model.row(user)), m, model.dim_k(), model.dim_d());
  const auto pv = project_all(model, m, vrows);
  const auto rel = model.relation_vector(r);
  std::vector<ScoredPair> out;
  out.reserve(pois.size());
  for (std::size_t j = 0; j < pois.size(); ++j) out.push_back({user, pois[j], r, pair_score(pu, pv[j], rel), 0.0});
  std::sort(out.begin(), out.end(), ascending);
  return out;
}

std::vector<ScoredPair> prune_by_score(std::span<const ScoredPair> ranked, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("theta_keep must lie in (0, 1]");
  const auto keep = static_cast<std::size_t>(std::ceil(theta * static_cast<double>(ranked.size()) - 1e-9));
  return {ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(std::min(keep, ranked.size()))};
}

CandidateSet filter_by_distance(std::span<const ScoredPair> pairs, const HomeTable& homes,
                                const PoiCoordinates& pois, const ExtractionConfig& cfg) {
  CandidateSet out;
  std::unordered_set<UserIndex> seen_users;
  std::unordered_set<PoiIndex> seen_pois;
  for (const auto& p : pairs) {
    if (out.pairs.size() >= cfg.max_candidates) break;
    if (p.user.value >= homes.size()) throw DataError("missing home location for a candidate user");
    if (p.poi.value >= pois.size()) throw DataError("missing coordinates for a candidate POI");
    const auto& home = homes[p.user.value];
    const double dist = haversine_km(home.mu, pois[p.poi.value]);
    if (dist > cfg.theta_d_km + cfg.sigma_multiplier * home.spread_km()) continue;
    ScoredPair kept = p;
    kept.distance_km = dist;
    out.pairs.push_back(kept);
    if (seen_users.insert(p.user).second) out.users.push_back(p.user);
    if (seen_pois.insert(p.poi).second) out.pois.push_back(p.poi);
  }
  return out;
}

CandidateSet extract(const TransRModel& model, const KnowledgeGraph& graph, const HomeTable& homes,
                     const PoiCoordinates& pois, const ExtractionConfig& cfg,
                     std::span<const RelationId> relations) {
  validate(cfg);
  std::vector<RelationId> all;
  if (relations.empty()) {
    for (std::size_t r = 0; r < graph.relations().size(); ++r) all.emplace_back(r);
    relations = all;
  }
  ExtractionConfig uncapped = cfg;
  uncapped.max_candidates = std::numeric_limits<std::size_t>::max();
  std::vector<ScoredPair> merged;
  for (auto r : relations) {
    const auto ranked = rank_pairs(model, graph, r);
    const auto kept = prune_by_score(ranked, cfg.theta_keep);
    auto filtered = filter_by_distance(kept, homes, pois, uncapped);
    merged.insert(merged.end(), filtered.pairs.begin(), filtered.pairs.end());
  }
  std::sort(merged.begin(), merged.end(), ascending);
  if (merged.size() > cfg.max_candidates) merged.resize(cfg.max_candidates);

  CandidateSet out;
  std::unordered_set<UserIndex> seen_users;
  std::unordered_set<PoiIndex> seen_pois;
  for (const auto& p : merged) {
    if (seen_users.insert(p.user).second) out.users.push_back(p.user);
    if (seen_pois.insert(p.poi).second) out.pois.push_back(p.poi);
  }
  out.pairs = std::move(merged);
  if (out.empty()) throw DataError("candidate extraction left no user-POI pairs; thresholds too tight");
  return out;
}

void save_candidates(const std::filesystem::path& path, const CandidateSet& set, const KnowledgeGraph& graph) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << "user_key\tpoi_key\tscore\tdistance_km\n";
  for (const auto& p : set.pairs) {
    out << graph.vocab().users.key(p.user.value) << '\t' << graph.vocab().pois.key(p.poi.value) << '\t'
        << format_double(p.score) << '\t' << format_double(p.distance_km) << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

CandidateSet load_candidates(const std::filesystem::path& path, const KnowledgeGraph& graph) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  CandidateSet out;
  std::unordered_set<UserIndex> seen_users;
  std::unordered_set<PoiIndex> seen_pois;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split_csv_line(line, '\t');
    if (f.size() != 4) throw DataError("malformed row in " + path.string());
    auto u = graph.vocab().users.find(f[0]);
    auto v = graph.vocab().pois.find(f[1]);
    if (!u || !v) throw DataError("candidate refers to an entity missing from the graph");
    ScoredPair p{UserIndex(*u), PoiIndex(*v), RelationId(0u), 0.0, 0.0};
    try {
      p.score = std::stod(f[2]);
      p.distance_km = std::stod(f[3]);
    } catch (const std::exception&) {
      throw DataError("bad number in " + path.string());
    }
    out.pairs.push_back(p);
    if (seen_users.insert(p.user).second) out.users.push_back(p.user);
    if (seen_pois.insert(p.poi).second) out.pois.push_back(p.poi);
  }
  return out;
}

}  // namespace poirec
