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
#include "poirec/recommender.hpp"

#include <algorithm>
#include <set>

namespace poirec {

VisitedTable visited_pois(std::span<const CheckIn> train, const KnowledgeGraph& graph) {
  VisitedTable out(graph.user_count());
  for (const auto& c : train) {
    auto u = graph.vocab().users.find(c.user_id);
    auto v = graph.vocab().pois.find(c.poi_id);
    if (u && v) out[*u].insert(PoiIndex(*v));
  }
  return out;
}

std::vector<RelationId> context_relations(const KnowledgeGraph& graph, int slot, int region) {
  auto exact = graph.relations_matching(slot, region);
  if (!exact.empty()) return exact;
  std::vector<RelationId> out;
  const auto& paths = graph.relations().paths();
  for (std::size_t r = 0; r < paths.size(); ++r)
    if (paths[r].region == region) out.emplace_back(r);
  if (!out.empty()) return out;
  for (std::size_t r = 0; r < paths.size(); ++r) out.emplace_back(r);
  return out;
}

RecommendationList recommend_topk(const Query& q, std::size_t k, const RecommenderModels& models,
                                  const RecommenderConfig& cfg) {
  validate(cfg.extraction);
  const auto& graph = models.graph;
  const auto uid = graph.vocab().users.find(q.user);
  if (!uid) throw DataError("unknown user '" + q.user + "'");
  if (!is_valid(q.location)) throw DataError("query coordinates out of range");
  const UserIndex user(*uid);

  RecommendationList out;
  out.query = q;
  out.slot = assign_time_slot(q.time, graph.slots(), cfg.tz_offset_hours);
  out.region = models.regions.assign(q.location);
  if (k == 0) return out;

  std::set<PoiIndex> pool;
  for (auto r : context_relations(graph, out.slot, out.region)) {
    const auto ranked = rank_pairs_for_user(models.transr, graph, user, r);
    const auto kept = prune_by_score(ranked, cfg.extraction.theta_keep);
    const auto near = filter_by_distance(kept, models.homes, models.pois, cfg.extraction);
    pool.insert(near.pois.begin(), near.pois.end());
  }
  if (cfg.exclude_visited && user.value < models.visited.size()) {
    for (auto v : models.visited[user.value]) pool.erase(v);
  }
  out.pool_size = pool.size();
  if (pool.empty()) throw EmptyPoolError("no candidate POIs for user '" + q.user + "' in this context");

  std::vector<RecommendationItem> items;
  items.reserve(pool.size());
  for (auto v : pool) items.push_back({v, graph.vocab().pois.key(v.value), combine(user, v, models.factors)});
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.poi < b.poi;
  });
  if (items.size() > k) items.resize(k);
  out.items = std::move(items);
  return out;
}

}  // namespace poirec
