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
#include <set>
#include <tuple>

#include "poirec/errors.hpp"
#include "poirec/kg_builder.hpp"
#include "test_util.hpp"

using namespace poirec;
using poirec::testing::at;
using poirec::testing::checkin;
using poirec::testing::TempDir;

namespace {

// Region i is centred at (10 i, 0).
RegionModel line_regions(int n) {
  std::vector<GeoPoint> c;
  for (int i = 0; i < n; ++i) c.push_back({10.0 * i, 0.0});
  return RegionModel::from_centroids(c);
}

CheckIn visit(const std::string& u, const std::string& p, int region, int hour, int day = 0,
              std::optional<std::string> cat = std::nullopt) {
  return checkin(u, p, 10.0 * region, 0.0, at(day, hour), std::move(cat));
}

std::set<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> as_set(const std::vector<Triple>& ts) {
  std::set<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> out;
  for (const auto& t : ts) out.insert({t.head.value, t.relation.value, t.tail.value});
  return out;
}

// Random log over nu users, nv POIs, three 8-hour slots and four regions.
std::vector<CheckIn> random_log(std::mt19937_64& rng, int nu, int nv, int n) {
  std::vector<CheckIn> rs;
  for (int i = 0; i < n; ++i)
    rs.push_back(visit("u" + std::to_string(rng() % nu), "p" + std::to_string(rng() % nv), static_cast<int>(rng() % 4),
                       static_cast<int>(rng() % 24), static_cast<int>(rng() % 5),
                       "c" + std::to_string(rng() % 2)));
  return rs;
}

}  // namespace

TEST_CASE("a single check-in becomes a single triple") {
  const std::vector<CheckIn> log{visit("u1", "p1", 5, 17, 0, "food")};
  const auto g = build_graph(log, TimeSlotSpec::from_hours(8), line_regions(6), true);
  REQUIRE(g.positives().size() == 1);
  const auto& t = g.positives()[0];
  CHECK(g.vocab().users.key(t.head.value) == "u1");
  CHECK(g.vocab().pois.key(t.tail.value) == "p1");
  const auto& path = g.relations().path(t.relation);
  CHECK(path.slot == 2);
  CHECK(path.region == 5);
  REQUIRE(path.has_category());
  CHECK(g.categories().key(static_cast<std::uint32_t>(path.category)) == "food");
}

TEST_CASE("repeat visits in the same context collapse to one triple") {
  const std::vector<CheckIn> log{visit("u1", "p1", 0, 9, 0), visit("u1", "p1", 0, 10, 3), visit("u1", "p1", 0, 20, 3)};
  const auto g = build_graph(log, TimeSlotSpec::from_hours(8), line_regions(2), false);
  CHECK(g.positives().size() == 2);
  CHECK(g.relations().size() == 2);
  CHECK(g.user_count() == 1);
  CHECK(g.poi_count() == 1);
}

TEST_CASE("category only enters the relation when asked") {
  const std::vector<CheckIn> log{visit("u", "p", 0, 1, 0, "a"), visit("v", "q", 0, 1, 0, "b")};
  const auto without = build_graph(log, TimeSlotSpec::from_hours(8), line_regions(1), false);
  const auto with = build_graph(log, TimeSlotSpec::from_hours(8), line_regions(1), true);
  CHECK(without.relations().size() == 1);
  CHECK_FALSE(without.relations().path(RelationId(0u)).has_category());
  CHECK(with.relations().size() == 2);
}

TEST_CASE("empty input is a data error") {
  CHECK_THROWS_AS(build_graph(std::span<const CheckIn>{}, TimeSlotSpec::from_hours(8), line_regions(1), false),
                  DataError);
}

TEST_CASE("relation ids are interned") {
  RelationTable table(3, 6, 0);
  const auto a = compose_relation_id(table, 2, 5);
  const auto b = compose_relation_id(table, 2, 5);
  const auto c = compose_relation_id(table, 5 % 3, 2);
  CHECK(a == b);
  CHECK(a != c);
  CHECK(table.size() == 2);
  CHECK_THROWS_AS(compose_relation_id(table, 3, 0), std::out_of_range);
  CHECK_THROWS_AS(compose_relation_id(table, 0, 6), std::out_of_range);
  CHECK_THROWS_AS(compose_relation_id(table, -1, 0), std::out_of_range);
  CHECK_THROWS_AS(compose_relation_id(table, 0, 0, 0), std::out_of_range);
}

TEST_CASE("a fully observed 3 x 4 grid yields 12 relations") {
  RelationTable table(3, 4, 0);
  std::set<std::uint32_t> ids;
  for (int t = 0; t < 3; ++t)
    for (int l = 0; l < 4; ++l) ids.insert(compose_relation_id(table, t, l).value);
  CHECK(ids.size() == 12);
  CHECK(table.size() == 12);

  std::vector<CheckIn> log;
  for (int t = 0; t < 3; ++t)
    for (int l = 0; l < 4; ++l) log.push_back(visit("u", "p", l, 8 * t + 1));
  const auto g = build_graph(log, TimeSlotSpec::from_hours(8), line_regions(4), false);
  CHECK(g.relations().size() == 12);
  CHECK(g.positives().size() == 12);
}

TEST_CASE("graph invariants over random logs") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const auto log = random_log(rng, 2 + trial % 5, 2 + trial % 7, 5 + trial * 4);
    const bool cat = trial % 2 == 0;
    const auto g = build_graph(log, TimeSlotSpec::from_hours(8), line_regions(4), cat);
    const auto again = build_graph(log, TimeSlotSpec::from_hours(8), line_regions(4), cat);

    // Deterministic vocabularies and triples.
    CHECK(g.vocab().users.keys() == again.vocab().users.keys());
    CHECK(g.vocab().pois.keys() == again.vocab().pois.keys());
    CHECK(g.positives() == again.positives());

    // No duplicate triples, all indices resolve.
    CHECK(as_set(g.positives()).size() == g.positives().size());
    for (const auto& t : g.positives()) {
      CHECK(t.head.value < g.user_count());
      CHECK(t.tail.value < g.poi_count());
      CHECK(t.relation.value < g.relations().size());
      CHECK(g.contains(t));
    }

    // Relation count equals the distinct observed contexts.
    std::set<std::tuple<int, int, std::string>> contexts;
    std::set<std::tuple<std::string, int, int, std::string, std::string>> distinct;
    for (const auto& c : log) {
      const int slot = assign_time_slot(c.timestamp, g.slots());
      const int region = static_cast<int>(std::lround(c.lat / 10.0));
      const std::string k = cat ? *c.category : "";
      contexts.insert({slot, region, k});
      distinct.insert({c.user_id, slot, region, k, c.poi_id});
    }
    CHECK(g.relations().size() == contexts.size());
    CHECK(g.positives().size() == distinct.size());
    CHECK(g.relations().size() <= static_cast<std::size_t>(3 * 4 * (cat ? 2 : 1)));

    // users_under / pois_under agree with the triples.
    for (std::size_t r = 0; r < g.relations().size(); ++r) {
      std::set<std::uint32_t> us, vs;
      for (const auto& t : g.positives())
        if (t.relation.value == r) {
          us.insert(t.head.value);
          vs.insert(t.tail.value);
        }
      std::vector<std::uint32_t> gu, gv;
      for (auto u : g.users_under(RelationId(r))) gu.push_back(u.value);
      for (auto v : g.pois_under(RelationId(r))) gv.push_back(v.value);
      CHECK(gu == std::vector<std::uint32_t>(us.begin(), us.end()));
      CHECK(gv == std::vector<std::uint32_t>(vs.begin(), vs.end()));
    }
  }
}

TEST_CASE("relations_matching ignores the category") {
  const std::vector<CheckIn> log{visit("u", "p", 1, 1, 0, "a"), visit("u", "q", 1, 2, 0, "b"),
                                 visit("u", "q", 0, 2, 0, "b")};
  const auto g = build_graph(log, TimeSlotSpec::from_hours(8), line_regions(2), true);
  CHECK(g.relations_matching(0, 1).size() == 2);
  CHECK(g.relations_matching(0, 0).size() == 1);
  CHECK(g.relations_matching(2, 0).empty());
}

TEST_CASE("the only negatives of a lone triple in a 2 x 2 vocabulary") {
  const std::vector<CheckIn> log{visit("u1", "p1", 0, 1), visit("u2", "p2", 0, 13)};
  const auto g = build_graph(log, TimeSlotSpec::from_hours(8), line_regions(1), false);
  const auto pos = g.positives()[0];
  const auto all = enumerate_corruptions(g, pos);
  const std::set<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> expected{
      {1, pos.relation.value, 0}, {0, pos.relation.value, 1}};
  CHECK(as_set(all) == expected);

  std::mt19937_64 rng(1);
  std::set<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>> seen;
  for (int i = 0; i < 200; ++i) {
    const auto neg = sample_negatives(g, pos, 1, rng);
    REQUIRE(neg.size() == 1);
    seen.insert({neg[0].head.value, neg[0].relation.value, neg[0].tail.value});
  }
  CHECK(seen == expected);
  CHECK(sample_negatives(g, pos, 2, rng).size() == 2);
  CHECK_THROWS_AS(sample_negatives(g, pos, 3, rng), DataError);
}

TEST_CASE("complete bipartite positives leave no negative") {
  std::vector<CheckIn> log;
  for (const char* u : {"u1", "u2"})
    for (const char* p : {"p1", "p2"}) log.push_back(visit(u, p, 0, 1));
  const auto g = build_graph(log, TimeSlotSpec::from_hours(8), line_regions(1), false);
  CHECK(enumerate_corruptions(g, g.positives()[0]).empty());
  std::mt19937_64 rng(2);
  CHECK_THROWS_AS(sample_negatives(g, g.positives()[0], 1, rng), DataError);
}

TEST_CASE("negative sampling needs two entities of each type") {
  const std::vector<CheckIn> log{visit("u1", "p1", 0, 1), visit("u1", "p2", 0, 1)};
  const auto g = build_graph(log, TimeSlotSpec::from_hours(8), line_regions(1), false);
  std::mt19937_64 rng(2);
  CHECK_THROWS_AS(sample_negatives(g, g.positives()[0], 1, rng), DataError);
}

TEST_CASE("sampled negatives respect the corruption rules") {
  std::mt19937_64 data_rng(8);
  const auto log = random_log(data_rng, 6, 9, 60);
  const auto g = build_graph(log, TimeSlotSpec::from_hours(8), line_regions(4), true);
  std::mt19937_64 rng(12);
  std::size_t heads = 0, tails = 0;
  for (int i = 0; i < 3000; ++i) {
    const auto& pos = g.positives()[rng() % g.positives().size()];
    for (const auto& neg : sample_negatives(g, pos, 2, rng)) {
      CHECK_FALSE(g.contains(neg));
      CHECK(neg.relation == pos.relation);
      const bool head = neg.head != pos.head;
      const bool tail = neg.tail != pos.tail;
      CHECK(head != tail);
      CHECK(neg.head.value < g.user_count());
      CHECK(neg.tail.value < g.poi_count());
      heads += head;
      tails += tail;
    }
  }
  // Side choice is a fair coin; 6000 draws keep both well above 40%.
  CHECK(heads > 2400);
  CHECK(tails > 2400);
}

TEST_CASE("graphs survive a save and load") {
  TempDir dir;
  std::mt19937_64 rng(4);
  const auto log = random_log(rng, 5, 7, 40);
  const auto g = build_graph(log, TimeSlotSpec::from_hours(8), line_regions(4), true);
  g.save(dir.path());
  for (const char* f : {"entities.tsv", "relations.tsv", "triples.tsv", "graph.json"})
    CHECK(std::filesystem::exists(dir / f));
  const auto back = KnowledgeGraph::load(dir.path());
  CHECK(back.vocab().users.keys() == g.vocab().users.keys());
  CHECK(back.vocab().pois.keys() == g.vocab().pois.keys());
  CHECK(back.relations().paths() == g.relations().paths());
  CHECK(back.positives() == g.positives());
  CHECK(back.slots() == g.slots());
  CHECK(back.region_count() == g.region_count());
  CHECK(back.uses_category() == g.uses_category());
  CHECK_THROWS_AS(KnowledgeGraph::load(dir / "missing"), DataError);
}
