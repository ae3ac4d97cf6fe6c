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
#include "poirec/kg_builder.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "poirec/errors.hpp"

namespace poirec {

namespace {

std::uint64_t pack(const RelationPath& p) {
  return (static_cast<std::uint64_t>(p.slot) << 48) | (static_cast<std::uint64_t>(p.region) << 24) |
         static_cast<std::uint64_t>(p.category + 1);
}

void check_tsv_safe(const std::string& key) {
  if (key.find_first_of("\t\n") != std::string::npos)
    throw DataError("key '" + key + "' cannot be written to TSV");
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == '\t') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::ifstream open_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  return in;
}

long to_long(const std::string& s, const std::filesystem::path& file) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("bad integer '" + s + "' in " + file.string());
  }
}

}  // namespace

std::uint32_t KeyTable::intern(std::string_view key) {
  auto [it, inserted] = lookup_.try_emplace(std::string(key), static_cast<std::uint32_t>(keys_.size()));
  if (inserted) keys_.emplace_back(key);
  return it->second;
}

std::optional<std::uint32_t> KeyTable::find(std::string_view key) const {
  auto it = lookup_.find(std::string(key));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

RelationTable::RelationTable(int slots_per_day, int region_count, int category_count)
    : slots_(slots_per_day), regions_(region_count), categories_(category_count) {}

RelationId RelationTable::intern(const RelationPath& path) {
  if (path.slot < 0 || path.slot >= slots_) throw std::out_of_range("unknown time slot");
  if (path.region < 0 || path.region >= regions_) throw std::out_of_range("unknown region");
  if (path.category != kNoCategory && (path.category < 0 || path.category >= categories_))
    throw std::out_of_range("unknown category");
  auto [it, inserted] = lookup_.try_emplace(pack(path), static_cast<std::uint32_t>(paths_.size()));
  if (inserted) paths_.push_back(path);
  return RelationId(it->second);
}

std::optional<RelationId> RelationTable::find(const RelationPath& path) const {
  auto it = lookup_.find(pack(path));
  if (it == lookup_.end() || paths_[it->second] != path) return std::nullopt;
  return RelationId(it->second);
}

RelationId compose_relation_id(RelationTable& table, int slot, int region, std::optional<int> category) {
  return table.intern({slot, region, category.value_or(kNoCategory)});
}

void KnowledgeGraph::add_positive(const Triple& t) {
  if (positive_set_.insert(t).second) positives_.push_back(t);
}

void KnowledgeGraph::index_relations() {
  users_under_.assign(relations_.size(), {});
  pois_under_.assign(relations_.size(), {});
  for (const auto& t : positives_) {
    users_under_[t.relation.value].push_back(t.head);
    pois_under_[t.relation.value].push_back(t.tail);
  }
  for (auto& v : users_under_) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  for (auto& v : pois_under_) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
}

std::vector<RelationId> KnowledgeGraph::relations_matching(int slot, int region) const {
  std::vector<RelationId> out;
  const auto& paths = relations_.paths();
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (paths[i].slot == slot && paths[i].region == region) out.emplace_back(i);
  }
  return out;
}

KnowledgeGraph build_graph(std::span<const CheckIn> train, const TimeSlotSpec& slots,
                           const RegionModel& regions, bool use_category, double tz_offset_hours) {
  if (train.empty()) throw DataError("cannot build a graph from an empty training set");
  KnowledgeGraph g;
  g.slots_ = slots;
  g.use_category_ = use_category;
  g.relations_ = RelationTable(slots.slots_per_day(), regions.region_count(), 0);
  for (const auto& c : train) {
    const UserIndex u(g.vocab_.users.intern(c.user_id));
    const PoiIndex v(g.vocab_.pois.intern(c.poi_id));
    std::optional<int> category;
    if (use_category && c.category) {
      category = static_cast<int>(g.categories_.intern(*c.category));
      g.relations_.set_category_count(static_cast<int>(g.categories_.size()));
    }
    const RelationId r = compose_relation_id(
        g.relations_, assign_time_slot(c.timestamp, slots, tz_offset_hours), regions.assign(c), category);
    g.add_positive({u, r, v});
  }
  g.index_relations();
  return g;
}

void KnowledgeGraph::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  {
    nlohmann::json meta{{"slot_hours", slots_.slot_hours()},
                        {"region_count", relations_.region_count()},
                        {"use_category", use_category_}};
    std::ofstream out(dir / "graph.json", std::ios::trunc);
    out << meta.dump(2) << '\n';
    if (!out) throw DataError("failed writing graph.json");
  }
  {
    std::ofstream out(dir / "entities.tsv", std::ios::trunc);
    out << "index\ttype\tkey\n";
    for (std::size_t i = 0; i < vocab_.users.size(); ++i) {
      check_tsv_safe(vocab_.users.key(i));
      out << i << "\tuser\t" << vocab_.users.key(i) << '\n';
    }
    for (std::size_t i = 0; i < vocab_.pois.size(); ++i) {
      check_tsv_safe(vocab_.pois.key(i));
      out << vocab_.users.size() + i << "\tpoi\t" << vocab_.pois.key(i) << '\n';
    }
    if (!out) throw DataError("failed writing entities.tsv");
  }
  {
    std::ofstream out(dir / "relations.tsv", std::ios::trunc);
    out << "index\tslot\tregion\tcategory\n";
    for (std::size_t i = 0; i < relations_.size(); ++i) {
      const auto& p = relations_.paths()[i];
      out << i << '\t' << p.slot << '\t' << p.region << '\t';
      if (p.has_category()) {
        check_tsv_safe(categories_.key(p.category));
        out << categories_.key(p.category);
      }
      out << '\n';
    }
    if (!out) throw DataError("failed writing relations.tsv");
  }
  {
    std::ofstream out(dir / "triples.tsv", std::ios::trunc);
    out << "head\trelation\ttail\n";
    for (const auto& t : positives_)
      out << vocab_.row(t.head) << '\t' << t.relation.value << '\t' << vocab_.row(t.tail) << '\n';
    if (!out) throw DataError("failed writing triples.tsv");
  }
}

KnowledgeGraph KnowledgeGraph::load(const std::filesystem::path& dir) {
  KnowledgeGraph g;
  {
    std::ifstream in(dir / "graph.json");
    if (!in) throw DataError("cannot open " + (dir / "graph.json").string());
    nlohmann::json meta;
    try {
      in >> meta;
      g.slots_ = TimeSlotSpec::from_hours(meta.at("slot_hours").get<int>());
      g.use_category_ = meta.at("use_category").get<bool>();
      g.relations_ = RelationTable(g.slots_.slots_per_day(), meta.at("region_count").get<int>(), 0);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("malformed graph.json: ") + e.what());
    }
  }
  std::string line;
  {
    const auto path = dir / "entities.tsv";
    auto in = open_table(path);
    std::size_t expected = 0;
    bool in_pois = false;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto f = split_tabs(line);
      if (f.size() != 3 || static_cast<std::size_t>(to_long(f[0], path)) != expected)
        throw DataError("malformed row in " + path.string());
      if (f[1] == "user" && !in_pois) {
        g.vocab_.users.intern(f[2]);
      } else if (f[1] == "poi") {
        in_pois = true;
        g.vocab_.pois.intern(f[2]);
      } else {
        throw DataError("entity rows must list users before POIs in " + path.string());
      }
      ++expected;
    }
    if (g.vocab_.entity_count() != expected) throw DataError("duplicate entity keys in " + path.string());
  }
  {
    const auto path = dir / "relations.tsv";
    auto in = open_table(path);
    std::size_t expected = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto f = split_tabs(line);
      if (f.size() != 4 || static_cast<std::size_t>(to_long(f[0], path)) != expected)
        throw DataError("malformed row in " + path.string());
      RelationPath p{static_cast<int>(to_long(f[1], path)), static_cast<int>(to_long(f[2], path)),
                     kNoCategory};
      if (!f[3].empty()) {
        p.category = static_cast<int>(g.categories_.intern(f[3]));
        g.relations_.set_category_count(static_cast<int>(g.categories_.size()));
      }
      try {
        if (g.relations_.intern(p).value != expected) throw DataError("duplicate relation path");
      } catch (const std::out_of_range& e) {
        throw DataError(std::string("relation out of range in ") + path.string() + ": " + e.what());
      }
      ++expected;
    }
  }
  {
    const auto path = dir / "triples.tsv";
    auto in = open_table(path);
    const auto nu = static_cast<long>(g.vocab_.users.size());
    const auto ne = static_cast<long>(g.vocab_.entity_count());
    const auto nr = static_cast<long>(g.relations_.size());
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto f = split_tabs(line);
      if (f.size() != 3) throw DataError("malformed row in " + path.string());
      const long h = to_long(f[0], path), r = to_long(f[1], path), t = to_long(f[2], path);
      if (h < 0 || h >= nu || r < 0 || r >= nr || t < nu || t >= ne)
        throw DataError("triple references an unknown or mistyped entity in " + path.string());
      g.add_positive({UserIndex(static_cast<std::uint32_t>(h)), RelationId(static_cast<std::uint32_t>(r)),
                      PoiIndex(static_cast<std::uint32_t>(t - nu))});
    }
  }
  g.index_relations();
  return g;
}

std::vector<Triple> enumerate_corruptions(const KnowledgeGraph& graph, const Triple& positive) {
  std::vector<Triple> out;
  for (std::uint32_t u = 0; u < graph.user_count(); ++u) {
    Triple t{UserIndex(u), positive.relation, positive.tail};
    if (t.head != positive.head && !graph.contains(t)) out.push_back(t);
  }
  for (std::uint32_t v = 0; v < graph.poi_count(); ++v) {
    Triple t{positive.head, positive.relation, PoiIndex(v)};
    if (t.tail != positive.tail && !graph.contains(t)) out.push_back(t);
  }
  return out;
}

std::vector<Triple> sample_negatives(const KnowledgeGraph& graph, const Triple& positive, std::size_t n,
                                     std::mt19937_64& rng) {
  const auto nu = static_cast<std::uint32_t>(graph.user_count());
  const auto nv = static_cast<std::uint32_t>(graph.poi_count());
  if (nu < 2 || nv < 2) throw DataError("negative sampling needs at least two users and two POIs");

  std::vector<Triple> out;
  out.reserve(n);
  std::unordered_set<Triple, TripleHash> taken;
  std::bernoulli_distribution corrupt_head(0.5);
  std::uniform_int_distribution<std::uint32_t> other_user(0, nu - 2);
  std::uniform_int_distribution<std::uint32_t> other_poi(0, nv - 2);

  const std::size_t budget = 32 * n + 64;
  for (std::size_t attempt = 0; attempt < budget && out.size() < n; ++attempt) {
    Triple t = positive;
    if (corrupt_head(rng)) {
      std::uint32_t x = other_user(rng);
      if (x >= positive.head.value) ++x;
      t.head = UserIndex(x);
    } else {
      std::uint32_t x = other_poi(rng);
      if (x >= positive.tail.value) ++x;
      t.tail = PoiIndex(x);
    }
    if (graph.contains(t) || !taken.insert(t).second) continue;
    out.push_back(t);
  }
  if (out.size() == n) return out;

  auto legal = enumerate_corruptions(graph, positive);
  std::erase_if(legal, [&](const Triple& t) { return taken.contains(t); });
  if (legal.size() < n - out.size())
    throw DataError("cannot find " + std::to_string(n) + " distinct negatives for a positive triple");
  std::shuffle(legal.begin(), legal.end(), rng);
  for (std::size_t i = 0; out.size() < n; ++i) out.push_back(legal[i]);
  return out;
}

}  // namespace poirec
