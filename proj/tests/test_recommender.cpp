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
#include "doctest.h"

#include <algorithm>
#include <random>
#include <map>
#include <set>

#include "poirec/recommender.hpp"
#include "test_util.hpp"

using namespace poirec;
using poirec::testing::at;
using poirec::testing::checkin;

namespace {

// Owns everything a RecommenderModels view points at.
struct Fixture {
  std::vector<CheckIn> log;
  RegionModel regions;
  KnowledgeGraph graph;
  TransRModel transr;
  FactorModel factors;
  HomeTable homes;
  PoiCoordinates pois;
  VisitedTable visited;

  RecommenderModels models() const { return {graph, transr, factors, regions, homes, pois, visited}; }
};

HomeTable homes_for(const std::vector<CheckIn>& log, const KnowledgeGraph& g) {
  HomeTable out;
  for (const auto& key : g.vocab().users.keys()) {
    std::vector<CheckIn> mine;
    for (const auto& c : log)
      if (c.user_id == key) mine.push_back(c);
    out.push_back(fit_home_location(mine));
  }
  return out;
}

PoiCoordinates coords_for(const std::vector<CheckIn>& log, const KnowledgeGraph& g) {
  PoiCoordinates out;
  for (const auto& key : g.vocab().pois.keys())
    for (const auto& c : log)
      if (c.poi_id == key) {
        out.push_back(c.location());
        break;
      }
  return out;
}

Fixture make_fixture(std::vector<CheckIn> log, std::vector<GeoPoint> centroids, int slot_hours) {
  auto regions = RegionModel::from_centroids(std::move(centroids));
  auto graph = build_graph(log, TimeSlotSpec::from_hours(slot_hours), regions, false);
  auto transr = TransRModel::initialize(graph, 3, 3, 1);
  auto homes = homes_for(log, graph);
  auto pois = coords_for(log, graph);
  auto visited = visited_pois(log, graph);
  return {std::move(log), std::move(regions), std::move(graph), std::move(transr), FactorModel{},
          std::move(homes), std::move(pois), std::move(visited)};
}

RecommenderConfig open_config(bool exclude) {
  RecommenderConfig cfg;
  cfg.extraction.theta_keep = 1.0;
  cfg.extraction.theta_d_km = 1e6;
  cfg.exclude_visited = exclude;
  return cfg;
}

// User a visits w, x, y, z; user b visits w only. One slot, one region.
Fixture four_poi_fixture() {
  std::vector<CheckIn> log{checkin("a", "w", 0, 0, at(0, 1)), checkin("a", "x", 0, 0.01, at(0, 2)),
                           checkin("a", "y", 0.01, 0, at(0, 3)), checkin("a", "z", 0.01, 0.01, at(0, 4)),
                           checkin("b", "w", 0, 0, at(0, 5))};
  auto f = make_fixture(std::move(log), {{0, 0}}, 24);
  // K = 1. Spatio-temporal side covers user a and all four POIs.
  const auto& pv = f.graph.vocab().pois;
  std::vector<PoiIndex> st_pois;
  std::vector<double> o, v(4);
  const std::map<std::string, std::pair<double, double>> hand{
      {"w", {0.5, 2.0}}, {"x", {2.0, 0.25}}, {"y", {-1.0, 3.0}}, {"z", {1.0, 1.0}}};
  for (std::uint32_t j = 0; j < 4; ++j) {
    st_pois.emplace_back(j);
    o.push_back(hand.at(pv.key(j)).first);
    v[j] = hand.at(pv.key(j)).second;
  }
  const auto a = *f.graph.vocab().users.find("a");
  std::vector<double> u(2, 0.0);
  u[a] = 1.0;
  f.factors = FactorModel(1, 0.01, {UserIndex(a)}, st_pois, {1.0}, o, u, v);
  return f;
}

std::vector<std::string> keys(const RecommendationList& l) {
  std::vector<std::string> out;
  for (const auto& it : l.items) out.push_back(it.poi_key);
  return out;
}

}  // namespace

TEST_CASE("k = 0 gives an empty list") {
  const auto f = four_poi_fixture();
  const auto list = recommend_topk({"a", {0, 0}, at(0, 1)}, 0, f.models(), open_config(false));
  CHECK(list.items.empty());
}

TEST_CASE("a single candidate POI is returned whatever its score") {
  auto f = make_fixture({checkin("a", "p", 0, 0, at(0, 1))}, {{0, 0}}, 24);
  f.factors = FactorModel(1, 0.01, {UserIndex(0u)}, {PoiIndex(0u)}, {1.0}, {-3.0}, {1.0}, {1.0});
  const auto list = recommend_topk({"a", {0, 0}, at(0, 1)}, 5, f.models(), open_config(false));
  REQUIRE(list.items.size() == 1);
  CHECK(list.items[0].poi_key == "p");
  CHECK(list.items[0].score == 0.0);
}

TEST_CASE("four-POI toy fixture orders by the hand-computed products") {
  const auto f = four_poi_fixture();
  // w: 0.5 * 2 = 1, x: 2 * 0.25 = 0.5, y: clamp(-1) * 3 = 0, z: 1 * 1 = 1.
  const auto& pv = f.graph.vocab().pois;
  const bool w_first = *pv.find("w") < *pv.find("z");
  const std::vector<std::string> expect{w_first ? "w" : "z", w_first ? "z" : "w", "x", "y"};
  const auto list = recommend_topk({"a", {0, 0}, at(0, 1)}, 4, f.models(), open_config(false));
  CHECK(keys(list) == expect);
  CHECK(list.items[0].score == 1.0);
  CHECK(list.items[2].score == 0.5);
  CHECK(list.pool_size == 4);
  const auto top2 = recommend_topk({"a", {0, 0}, at(0, 1)}, 2, f.models(), open_config(false));
  CHECK(keys(top2) == std::vector<std::string>(expect.begin(), expect.begin() + 2));
}

TEST_CASE("visited POIs are excluded when requested") {
  const auto f = four_poi_fixture();
  const auto list = recommend_topk({"b", {0, 0}, at(0, 1)}, 10, f.models(), open_config(true));
  CHECK(list.items.size() == 3);
  for (const auto& it : list.items) CHECK(it.poi_key != "w");
  // b has no spatio-temporal factors: all scores are zero and order is by index.
  for (std::size_t i = 1; i < list.items.size(); ++i) CHECK(list.items[i - 1].poi < list.items[i].poi);
  CHECK_THROWS_AS(recommend_topk({"a", {0, 0}, at(0, 1)}, 10, f.models(), open_config(true)), EmptyPoolError);
}

TEST_CASE("query errors") {
  const auto f = four_poi_fixture();
  CHECK_THROWS_AS(recommend_topk({"nobody", {0, 0}, at(0, 1)}, 3, f.models(), open_config(false)), DataError);
  CHECK_THROWS_AS(recommend_topk({"a", {91, 0}, at(0, 1)}, 3, f.models(), open_config(false)), DataError);
  auto tight = open_config(false);
  tight.extraction.theta_d_km = 1e-6;
  tight.extraction.sigma_multiplier = 0;
  auto far = four_poi_fixture();
  for (auto& p : far.pois) p.lat += 30;
  CHECK_THROWS_AS(recommend_topk({"a", {0, 0}, at(0, 1)}, 3, far.models(), tight), EmptyPoolError);
}

TEST_CASE("context relations fall back from slot and region to region to all") {
  const std::vector<CheckIn> log{checkin("a", "p", 0, 0, at(0, 1)), checkin("a", "q", 10, 0, at(0, 13)),
                                 checkin("b", "q", 10, 0, at(0, 2))};
  const auto f = make_fixture(log, {{0, 0}, {10, 0}}, 12);
  const auto& paths = f.graph.relations().paths();
  const auto check_all = [&](const std::vector<RelationId>& rs, auto pred) {
    CHECK_FALSE(rs.empty());
    for (auto r : rs) CHECK(pred(paths[r.value]));
  };
  check_all(context_relations(f.graph, 0, 0), [](const RelationPath& p) { return p.slot == 0 && p.region == 0; });
  check_all(context_relations(f.graph, 1, 0), [](const RelationPath& p) { return p.region == 0; });
  CHECK(context_relations(f.graph, 1, 5).size() == paths.size());
}

TEST_CASE("recommendation lists are bounded, sorted and distinct on random worlds") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<CheckIn> log;
    std::map<std::string, GeoPoint> where;
    for (int i = 0; i < 50; ++i) {
      const std::string poi = "p" + std::to_string(rng() % 15);
      auto [it, _] = where.emplace(poi, GeoPoint{static_cast<double>(rng() % 3), 0.01 * static_cast<double>(rng() % 9)});
      log.push_back(checkin("u" + std::to_string(rng() % 5), poi, it->second.lat, it->second.lon,
                            at(static_cast<int>(rng() % 3), static_cast<int>(rng() % 24))));
    }
    auto f = make_fixture(log, {{0, 0}, {1, 0}, {2, 0}}, 8);
    const std::size_t nu = f.graph.user_count(), nv = f.graph.poi_count(), k = 2;
    std::normal_distribution<double> n01;
    std::vector<double> e(nu * k), o(nv * k), u(nu * k), v(nv * k);
    for (auto* b : {&e, &o, &u, &v})
      for (auto& x : *b) x = n01(rng);
    std::vector<UserIndex> su;
    std::vector<PoiIndex> sv;
    for (std::uint32_t i = 0; i < nu; ++i) su.emplace_back(i);
    for (std::uint32_t j = 0; j < nv; ++j) sv.emplace_back(j);
    f.factors = FactorModel(k, 0.01, su, sv, e, o, u, v);

    RecommenderConfig cfg;
    cfg.extraction.theta_d_km = 200;
    cfg.exclude_visited = trial % 2 == 0;
    const std::size_t topk = 1 + rng() % 8;
    const auto& user = f.graph.vocab().users.key(rng() % nu);
    const Query q{user, {static_cast<double>(rng() % 3), 0}, at(1, static_cast<int>(rng() % 24))};
    RecommendationList list;
    try {
      list = recommend_topk(q, topk, f.models(), cfg);
    } catch (const EmptyPoolError&) {
      continue;
    }
    CHECK(list.items.size() <= topk);
    CHECK(list.items.size() == std::min(topk, list.pool_size));
    std::set<PoiIndex> seen;
    const auto uid = UserIndex(*f.graph.vocab().users.find(user));
    for (std::size_t i = 0; i < list.items.size(); ++i) {
      const auto& it = list.items[i];
      CHECK(seen.insert(it.poi).second);
      CHECK(it.score == combine(uid, it.poi, f.factors));
      if (cfg.exclude_visited) CHECK(f.visited[uid.value].count(it.poi) == 0);
      if (i > 0) CHECK(list.items[i - 1].score >= it.score);
    }
  }
}
