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

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "poirec/checkin_data.hpp"
#include "poirec/index.hpp"

namespace poirec {

// Insertion-ordered string interning table.
class KeyTable {
 public:
  std::uint32_t intern(std::string_view key);
  std::optional<std::uint32_t> find(std::string_view key) const;
  const std::string& key(std::uint32_t i) const { return keys_.at(i); }
  const std::vector<std::string>& keys() const { return keys_; }
  std::size_t size() const { return keys_.size(); }

 private:
  std::vector<std::string> keys_;
  std::unordered_map<std::string, std::uint32_t> lookup_;
};

// User and POI vocabularies. Embedding rows place users first, then POIs.
struct EntityVocab {
  KeyTable users;
  KeyTable pois;

  std::size_t entity_count() const { return users.size() + pois.size(); }
  std::size_t row(UserIndex u) const { return u.value; }
  std::size_t row(PoiIndex v) const { return users.size() + v.value; }
};

inline constexpr int kNoCategory = -1;

// Composed relation path t o l (o c). category == kNoCategory when the path
// carries no semantic component.
struct RelationPath {
  int slot = 0;
  int region = 0;
  int category = kNoCategory;

  bool has_category() const { return category != kNoCategory; }
  friend auto operator<=>(const RelationPath&, const RelationPath&) = default;
};

class RelationTable {
 public:
  RelationTable() = default;
  RelationTable(int slots_per_day, int region_count, int category_count);

  // Interned id for the path; equal components give equal ids. Throws
  // std::out_of_range when a component lies outside its vocabulary.
  RelationId intern(const RelationPath& path);
  std::optional<RelationId> find(const RelationPath& path) const;

  const RelationPath& path(RelationId r) const { return paths_.at(r.value); }
  const std::vector<RelationPath>& paths() const { return paths_; }
  std::size_t size() const { return paths_.size(); }

  int slots_per_day() const { return slots_; }
  int region_count() const { return regions_; }
  int category_count() const { return categories_; }
  void set_category_count(int n) { categories_ = n; }

 private:
  int slots_ = 0;
  int regions_ = 0;
  int categories_ = 0;
  std::vector<RelationPath> paths_;
  std::unordered_map<std::uint64_t, std::uint32_t> lookup_;
};

// compose_relation_id(t, l, c): validated, interned id.
RelationId compose_relation_id(RelationTable& table, int slot, int region,
                               std::optional<int> category = std::nullopt);

// (user, relation path, POI). Head is always a user and tail always a POI.
struct Triple {
  UserIndex head;
  RelationId relation;
  PoiIndex tail;

  friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept {
    std::uint64_t h = t.head.value;
    h = h * 0x9E3779B97F4A7C15ULL ^ t.relation.value;
    h = h * 0x9E3779B97F4A7C15ULL ^ t.tail.value;
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

class KnowledgeGraph {
 public:
  const EntityVocab& vocab() const { return vocab_; }
  const KeyTable& categories() const { return categories_; }
  const RelationTable& relations() const { return relations_; }
  const std::vector<Triple>& positives() const { return positives_; }

  const TimeSlotSpec& slots() const { return slots_; }
  int region_count() const { return relations_.region_count(); }
  bool uses_category() const { return use_category_; }
  std::size_t user_count() const { return vocab_.users.size(); }
  std::size_t poi_count() const { return vocab_.pois.size(); }

  bool contains(const Triple& t) const { return positive_set_.contains(t); }

  // Sorted endpoints incident to a relation.
  const std::vector<UserIndex>& users_under(RelationId r) const { return users_under_.at(r.value); }
  const std::vector<PoiIndex>& pois_under(RelationId r) const { return pois_under_.at(r.value); }

  // Relations with the given slot and region, any category.
  std::vector<RelationId> relations_matching(int slot, int region) const;

  // entities.tsv, relations.tsv, triples.tsv plus graph.json for the slot and
  // region settings.
  void save(const std::filesystem::path& dir) const;
  static KnowledgeGraph load(const std::filesystem::path& dir);

 private:
  friend KnowledgeGraph build_graph(std::span<const CheckIn>, const TimeSlotSpec&,
                                    const RegionModel&, bool, double);
  KnowledgeGraph() = default;
  void add_positive(const Triple& t);
  void index_relations();

  EntityVocab vocab_;
  KeyTable categories_;
  RelationTable relations_;
  TimeSlotSpec slots_ = TimeSlotSpec::from_hours(24);
  bool use_category_ = false;
  std::vector<Triple> positives_;
  std::unordered_set<Triple, TripleHash> positive_set_;
  std::vector<std::vector<UserIndex>> users_under_;
  std::vector<std::vector<PoiIndex>> pois_under_;
};

// One positive triple per distinct (user, path, POI) in train. Vocabularies
// are ordered by first appearance. Throws DataError on empty input.
KnowledgeGraph build_graph(std::span<const CheckIn> train, const TimeSlotSpec& slots,
                           const RegionModel& regions, bool use_category,
                           double tz_offset_hours = 0.0);

// Draws n distinct corruptions of `positive`, none of which is in the graph.
// The corrupted side is chosen uniformly; heads are replaced by users and
// tails by POIs. When random draws keep colliding the legal corruptions are
// enumerated, and DataError is thrown if fewer than n exist.
std::vector<Triple> sample_negatives(const KnowledgeGraph& graph, const Triple& positive,
                                     std::size_t n, std::mt19937_64& rng);

// Every legal corruption of `positive`, heads first then tails.
std::vector<Triple> enumerate_corruptions(const KnowledgeGraph& graph, const Triple& positive);

}  // namespace poirec
