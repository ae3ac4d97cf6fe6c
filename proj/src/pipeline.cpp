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
#include "poirec/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>

#include "poirec/errors.hpp"

namespace poirec {

using nlohmann::json;

namespace {

// Copies j[key] into out if present; a type mismatch is a ConfigError.
template <class T>
void read(const json& j, const char* key, T& out, const std::string& section) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key " + section + "." + key + " has the wrong type");
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& section) {
  if (!j.is_object()) throw ConfigError("config section '" + section + "' must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
      throw ConfigError("unknown config key " + section + "." + key);
  }
}

std::string header_name(HeaderMode m) {
  switch (m) {
    case HeaderMode::kPresent: return "present";
    case HeaderMode::kAbsent: return "absent";
    default: return "auto";
  }
}

HeaderMode parse_header(const std::string& s) {
  if (s == "auto") return HeaderMode::kAuto;
  if (s == "present") return HeaderMode::kPresent;
  if (s == "absent") return HeaderMode::kAbsent;
  throw ConfigError("data.header must be auto, present or absent");
}

}  // namespace

bool operator==(const DataConfig& a, const DataConfig& b) {
  const auto& x = a.csv;
  const auto& y = b.csv;
  auto pos = [](const ColumnPositions& p) { return std::tie(p.user, p.poi, p.lat, p.lon, p.timestamp, p.category); };
  auto names = [](const ColumnNames& n) { return std::tie(n.user, n.poi, n.lat, n.lon, n.timestamp, n.category); };
  return x.delimiter == y.delimiter && x.header == y.header && pos(x.positions) == pos(y.positions) &&
         names(x.names) == names(y.names) && a.train_fraction == b.train_fraction &&
         a.tz_offset == b.tz_offset;
}

void PipelineConfig::apply_seed(std::uint64_t s) {
  seed = s;
  transr.seed = s;
  mf.seed = s;
  graph.kmeans_seed = s;
}

RecommenderConfig PipelineConfig::recommender() const { return {extraction, exclude_visited, data.tz_offset}; }

void validate(const PipelineConfig& cfg) {
  if (!(cfg.data.train_fraction > 0.0 && cfg.data.train_fraction < 1.0))
    throw ConfigError("data.train_fraction must lie in (0, 1)");
  if (cfg.graph.slot_hours <= 0 || 24 % cfg.graph.slot_hours != 0)
    throw ConfigError("graph.slot_hours must divide 24");
  if (cfg.graph.region_mode == RegionMode::kKMeans && cfg.graph.region_k <= 0)
    throw ConfigError("graph.region_k must be positive");
  if (cfg.graph.region_mode == RegionMode::kPrecomputed && cfg.graph.region_label_file.empty())
    throw ConfigError("graph.region_label_file is required for precomputed regions");
  validate(cfg.transr);
  validate(cfg.extraction);
  validate(cfg.mf);
  if (cfg.eval_ks.empty()) throw ConfigError("evaluate.ks must not be empty");
  for (auto k : cfg.eval_ks)
    if (k == 0) throw ConfigError("evaluate.ks entries must be positive");
  for (double f : cfg.experiments.sparsity_fractions)
    if (!(f >= 0.0 && f < 1.0)) throw ConfigError("sparsity fractions must lie in [0, 1)");
  for (int h : cfg.experiments.timeslot_hours)
    if (h <= 0 || 24 % h != 0) throw ConfigError("timeslot sweep hours must divide 24");
  for (auto d : cfg.experiments.dims)
    if (d == 0) throw ConfigError("dimension sweep entries must be positive");
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig cfg;
  reject_unknown(j, {"seed", "data", "graph", "transr", "extraction", "mf", "recommend", "evaluate", "experiments"},
                 "config");
  read(j, "seed", cfg.seed, "config");
  cfg.apply_seed(cfg.seed);

  if (auto it = j.find("data"); it != j.end()) {
    const auto& s = *it;
    reject_unknown(s, {"delimiter", "header", "train_fraction", "tz_offset", "columns"}, "data");
    std::string delim = ",";
    read(s, "delimiter", delim, "data");
    if (delim == "\\t") delim = "\t";
    if (delim.size() != 1) throw ConfigError("data.delimiter must be a single character");
    cfg.data.csv.delimiter = delim[0];
    std::string header = "auto";
    read(s, "header", header, "data");
    cfg.data.csv.header = parse_header(header);
    read(s, "train_fraction", cfg.data.train_fraction, "data");
    read(s, "tz_offset", cfg.data.tz_offset, "data");
    if (auto c = s.find("columns"); c != s.end()) {
      reject_unknown(*c, {"user", "poi", "lat", "lon", "timestamp", "category"}, "data.columns");
      auto& n = cfg.data.csv.names;
      read(*c, "user", n.user, "data.columns");
      read(*c, "poi", n.poi, "data.columns");
      read(*c, "lat", n.lat, "data.columns");
      read(*c, "lon", n.lon, "data.columns");
      read(*c, "timestamp", n.timestamp, "data.columns");
      read(*c, "category", n.category, "data.columns");
    }
  }
  if (auto it = j.find("graph"); it != j.end()) {
    const auto& s = *it;
    reject_unknown(s, {"slot_hours", "region_mode", "region_k", "region_label_file", "kmeans_seed", "use_category"}, "graph");
    read(s, "slot_hours", cfg.graph.slot_hours, "graph");
    std::string mode = "kmeans";
    read(s, "region_mode", mode, "graph");
    if (mode == "kmeans")
      cfg.graph.region_mode = RegionMode::kKMeans;
    else if (mode == "precomputed")
      cfg.graph.region_mode = RegionMode::kPrecomputed;
    else
      throw ConfigError("graph.region_mode must be kmeans or precomputed");
    read(s, "region_k", cfg.graph.region_k, "graph");
    read(s, "region_label_file", cfg.graph.region_label_file, "graph");
    read(s, "kmeans_seed", cfg.graph.kmeans_seed, "graph");
    read(s, "use_category", cfg.graph.use_category, "graph");
  }
  if (auto it = j.find("transr"); it != j.end()) {
    const auto& s = *it;
    reject_unknown(s, {"learning_rate", "margin", "dim_d", "dim_k", "batch_size", "epochs", "negatives_per_positive"},
                   "transr");
    read(s, "learning_rate", cfg.transr.learning_rate, "transr");
    read(s, "margin", cfg.transr.margin, "transr");
    read(s, "dim_d", cfg.transr.dim_d, "transr");
    read(s, "dim_k", cfg.transr.dim_k, "transr");
    read(s, "batch_size", cfg.transr.batch_size, "transr");
    read(s, "epochs", cfg.transr.epochs, "transr");
    read(s, "negatives_per_positive", cfg.transr.negatives_per_positive, "transr");
  }
  if (auto it = j.find("extraction"); it != j.end()) {
    const auto& s = *it;
    reject_unknown(s, {"theta_keep", "theta_d_km", "sigma_multiplier", "max_candidates"}, "extraction");
    read(s, "theta_keep", cfg.extraction.theta_keep, "extraction");
    read(s, "theta_d_km", cfg.extraction.theta_d_km, "extraction");
    read(s, "sigma_multiplier", cfg.extraction.sigma_multiplier, "extraction");
    read(s, "max_candidates", cfg.extraction.max_candidates, "extraction");
  }
  if (auto it = j.find("mf"); it != j.end()) {
    const auto& s = *it;
    reject_unknown(s, {"latent_dim", "alpha", "learning_rate", "epochs", "sample_zeros", "dampen"}, "mf");
    read(s, "latent_dim", cfg.mf.latent_dim, "mf");
    read(s, "alpha", cfg.mf.alpha, "mf");
    read(s, "learning_rate", cfg.mf.learning_rate, "mf");
    read(s, "epochs", cfg.mf.epochs, "mf");
    read(s, "sample_zeros", cfg.mf.sample_zeros, "mf");
    read(s, "dampen", cfg.mf.dampen, "mf");
  }
  if (auto it = j.find("recommend"); it != j.end()) {
    reject_unknown(*it, {"exclude_visited"}, "recommend");
    read(*it, "exclude_visited", cfg.exclude_visited, "recommend");
  }
  if (auto it = j.find("evaluate"); it != j.end()) {
    reject_unknown(*it, {"ks"}, "evaluate");
    read(*it, "ks", cfg.eval_ks, "evaluate");
  }
  if (auto it = j.find("experiments"); it != j.end()) {
    const auto& s = *it;
    reject_unknown(s, {"sparsity_fractions", "timeslot_hours", "dims"}, "experiments");
    read(s, "sparsity_fractions", cfg.experiments.sparsity_fractions, "experiments");
    read(s, "timeslot_hours", cfg.experiments.timeslot_hours, "experiments");
    read(s, "dims", cfg.experiments.dims, "experiments");
  }
  validate(cfg);
  return cfg;
}

json config_to_json(const PipelineConfig& cfg) {
  const auto& n = cfg.data.csv.names;
  return {
      {"seed", cfg.seed},
      {"data",
       {{"delimiter", cfg.data.csv.delimiter == '\t' ? std::string("\\t") : std::string(1, cfg.data.csv.delimiter)},
        {"header", header_name(cfg.data.csv.header)},
        {"train_fraction", cfg.data.train_fraction},
        {"tz_offset", cfg.data.tz_offset},
        {"columns",
         {{"user", n.user}, {"poi", n.poi}, {"lat", n.lat}, {"lon", n.lon}, {"timestamp", n.timestamp},
          {"category", n.category}}}}},
      {"graph",
       {{"slot_hours", cfg.graph.slot_hours},
        {"region_mode", cfg.graph.region_mode == RegionMode::kKMeans ? "kmeans" : "precomputed"},
        {"region_k", cfg.graph.region_k},
        {"region_label_file", cfg.graph.region_label_file},
        {"kmeans_seed", cfg.graph.kmeans_seed},
        {"use_category", cfg.graph.use_category}}},
      {"transr",
       {{"learning_rate", cfg.transr.learning_rate},
        {"margin", cfg.transr.margin},
        {"dim_d", cfg.transr.dim_d},
        {"dim_k", cfg.transr.dim_k},
        {"batch_size", cfg.transr.batch_size},
        {"epochs", cfg.transr.epochs},
        {"negatives_per_positive", cfg.transr.negatives_per_positive}}},
      {"extraction",
       {{"theta_keep", cfg.extraction.theta_keep},
        {"theta_d_km", cfg.extraction.theta_d_km},
        {"sigma_multiplier", cfg.extraction.sigma_multiplier},
        {"max_candidates", cfg.extraction.max_candidates}}},
      {"mf",
       {{"latent_dim", cfg.mf.latent_dim},
        {"alpha", cfg.mf.alpha},
        {"learning_rate", cfg.mf.learning_rate},
        {"epochs", cfg.mf.epochs},
        {"sample_zeros", cfg.mf.sample_zeros},
        {"dampen", cfg.mf.dampen}}},
      {"recommend", {{"exclude_visited", cfg.exclude_visited}}},
      {"evaluate", {{"ks", cfg.eval_ks}}},
      {"experiments",
       {{"sparsity_fractions", cfg.experiments.sparsity_fractions},
        {"timeslot_hours", cfg.experiments.timeslot_hours},
        {"dims", cfg.experiments.dims}}},
  };
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

PoiCoordinates poi_coordinates(std::span<const CheckIn> train, const KnowledgeGraph& graph) {
  std::vector<double> lat(graph.poi_count(), 0.0), lon(graph.poi_count(), 0.0);
  std::vector<std::size_t> n(graph.poi_count(), 0);
  for (const auto& c : train) {
    auto v = graph.vocab().pois.find(c.poi_id);
    if (!v) continue;
    lat[*v] += c.lat;
    lon[*v] += c.lon;
    ++n[*v];
  }
  PoiCoordinates out(graph.poi_count());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (n[i] == 0) throw DataError("POI '" + graph.vocab().pois.key(static_cast<std::uint32_t>(i)) + "' has no coordinates");
    out[i] = {lat[i] / static_cast<double>(n[i]), lon[i] / static_cast<double>(n[i])};
  }
  return out;
}

HomeTable home_table(std::span<const CheckIn> train, const KnowledgeGraph& graph) {
  auto by_key = fit_home_locations(train);
  HomeTable out;
  out.reserve(graph.user_count());
  for (const auto& key : graph.vocab().users.keys()) {
    auto it = by_key.find(key);
    if (it == by_key.end()) throw DataError("user '" + key + "' has no train check-ins");
    out.push_back(std::move(it->second));
  }
  return out;
}

RegionModel fit_regions(std::span<const CheckIn> train, const PipelineConfig& cfg) {
  if (cfg.graph.region_mode == RegionMode::kPrecomputed) {
    auto model = RegionModel::load_labels(cfg.graph.region_label_file);
    model.fit_label_centroids(train);
    return model;
  }
  std::map<std::string, GeoPoint> first;
  for (const auto& c : train) first.emplace(c.poi_id, c.location());
  std::vector<GeoPoint> points;
  points.reserve(first.size());
  for (const auto& [_, p] : first) points.push_back(p);
  return cluster_regions(points, cfg.graph.region_k, cfg.graph.kmeans_seed).model;
}

TrainedPipeline train_pipeline(std::span<const CheckIn> train, const PipelineConfig& cfg) {
  validate(cfg);
  auto regions = fit_regions(train, cfg);
  auto graph = build_graph(train, TimeSlotSpec::from_hours(cfg.graph.slot_hours), regions, cfg.graph.use_category,
                           cfg.data.tz_offset);
  auto embedded = poirec::train(graph, cfg.transr);
  auto homes = home_table(train, graph);
  auto pois = poi_coordinates(train, graph);
  auto candidates = extract(embedded.model, graph, homes, pois, cfg.extraction);
  auto factors = train_factor_model(train, graph, candidates, cfg.mf);
  auto visited = visited_pois(train, graph);
  return {cfg,
          std::move(regions),
          std::move(graph),
          std::move(embedded.model),
          std::move(embedded.loss_trace),
          std::move(homes),
          std::move(pois),
          std::move(candidates),
          std::move(factors),
          std::move(visited)};
}

std::vector<EvalCase> evaluation_cases(const TrainedPipeline& p, std::span<const CheckIn> train,
                                       std::span<const CheckIn> test, std::size_t max_k) {
  std::unordered_map<std::string, const CheckIn*> last_train;
  for (const auto& c : train) {
    auto& slot = last_train[c.user_id];
    if (!slot || c.timestamp >= slot->timestamp) slot = &c;
  }
  std::map<std::string, const CheckIn*> first_test;
  std::map<std::string, std::map<std::string, std::size_t>> truth;
  for (const auto& c : test) {
    if (!last_train.contains(c.user_id)) continue;
    auto& slot = first_test[c.user_id];
    if (!slot || c.timestamp < slot->timestamp) slot = &c;
    ++truth[c.user_id][c.poi_id];
  }

  const auto models = p.models();
  const auto rcfg = p.config.recommender();
  std::vector<EvalCase> cases;
  // Graph order keeps the case list stable across runs.
  for (const auto& user : p.graph.vocab().users.keys()) {
    auto ft = first_test.find(user);
    if (ft == first_test.end()) continue;
    EvalCase ec;
    ec.user = user;
    ec.truth_frequency = truth[user];
    for (const auto& [poi, _] : ec.truth_frequency) ec.truth.insert(poi);
    const Query q{user, last_train.at(user)->location(), ft->second->timestamp};
    try {
      for (const auto& item : recommend_topk(q, max_k, models, rcfg).items) ec.recommended.push_back(item.poi_key);
    } catch (const EmptyPoolError&) {
    }
    cases.push_back(std::move(ec));
  }
  if (cases.empty()) throw DataError("no user has check-ins on both sides of the split");
  return cases;
}

std::vector<MetricsReport> evaluate(const TrainedPipeline& p, std::span<const CheckIn> train,
                                    std::span<const CheckIn> test, std::span<const std::size_t> ks) {
  if (ks.empty()) throw ConfigError("no cutoffs to evaluate");
  const auto cases = evaluation_cases(p, train, test, *std::max_element(ks.begin(), ks.end()));
  std::vector<MetricsReport> out;
  for (auto k : ks) out.push_back(evaluate_at_k(cases, k));
  return out;
}

double random_baseline_precision(const TrainedPipeline& p, std::span<const EvalCase> cases, std::size_t k) {
  if (cases.empty()) throw std::invalid_argument("no evaluated users");
  const auto& pois = p.graph.vocab().pois;
  double sum = 0;
  for (const auto& c : cases) {
    const auto uid = p.graph.vocab().users.find(c.user);
    std::size_t pool = pois.size();
    std::size_t relevant = 0;
    for (const auto& key : c.truth) {
      auto v = pois.find(key);
      if (!v) continue;
      if (p.config.exclude_visited && uid && p.visited[*uid].contains(PoiIndex(*v))) continue;
      ++relevant;
    }
    if (p.config.exclude_visited && uid) pool -= p.visited[*uid].size();
    sum += random_precision_at_k(pool, relevant, k);
  }
  return sum / static_cast<double>(cases.size());
}

}  // namespace poirec
