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
#include "poirec/transr.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include "poirec/binary_io.hpp"
#include "poirec/errors.hpp"
#include "poirec/format.hpp"

namespace poirec {

namespace {

constexpr std::string_view kCheckpointMagic = "POIREC-TRANSR-1";

double squared_norm(std::span<const double> x) {
  double s = 0;
  for (double v : x) s += v * v;
  return s;
}

void scale(std::span<double> x, double f) {
  for (double& v : x) v *= f;
}

void clamp_to_unit_ball(std::span<double> x) {
  const double n = std::sqrt(squared_norm(x));
  if (n > 1.0) scale(x, 1.0 / n);
}

void fill_unit_uniform(std::span<double> x, std::size_t dim, std::mt19937_64& rng) {
  const double bound = 6.0 / std::sqrt(static_cast<double>(dim));
  std::uniform_real_distribution<double> unif(-bound, bound);
  for (double& v : x) v = unif(rng);
  const double n = std::sqrt(squared_norm(x));
  if (n > 0) scale(x, 1.0 / n);
}

// z = (a - b) M + r
void translation_residual(std::span<const double> a, std::span<const double> b,
                          std::span<const double> m, std::span<const double> r, std::size_t k,
                          std::size_t d, std::vector<double>& z) {
  z.assign(r.begin(), r.end());
  for (std::size_t i = 0; i < k; ++i) {
    const double diff = a[i] - b[i];
    if (diff == 0.0) continue;
    const double* row = m.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) z[j] += diff * row[j];
  }
}

std::vector<double>& slot_in(std::map<std::size_t, std::vector<double>>& g, std::size_t key,
                             std::size_t n) {
  auto& v = g[key];
  if (v.empty()) v.assign(n, 0.0);
  return v;
}

// g += s * M z
void add_mz(std::vector<double>& g, std::span<const double> m, std::span<const double> z, double s,
            std::size_t k, std::size_t d) {
  for (std::size_t i = 0; i < k; ++i) {
    const double* row = m.data() + i * d;
    double acc = 0;
    for (std::size_t j = 0; j < d; ++j) acc += row[j] * z[j];
    g[i] += s * acc;
  }
}

void check_entity_rows(const TransRModel& model, const Triple& t) {
  if (t.head.value >= model.user_count() || t.tail.value >= model.poi_count())
    throw std::out_of_range("entity index outside the model vocabulary");
  if (t.relation.value >= model.relation_count()) throw std::out_of_range("unknown relation");
}

}  // namespace

void validate(const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0) || !std::isfinite(cfg.learning_rate))
    throw ConfigError("transr learning_rate must be positive");
  if (!(cfg.margin > 0) || !std::isfinite(cfg.margin)) throw ConfigError("transr margin must be positive");
  if (cfg.dim_d == 0 || cfg.dim_k == 0) throw ConfigError("embedding dimensions must be positive");
  if (cfg.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (cfg.negatives_per_positive == 0) throw ConfigError("negatives_per_positive must be positive");
}

TransRModel::TransRModel(std::size_t users, std::size_t pois, std::size_t slots, std::size_t regions,
                         std::size_t categories, std::vector<RelationPath> paths, std::size_t dim_k,
                         std::size_t dim_d)
    : users_(users),
      pois_(pois),
      dim_k_(dim_k),
      dim_d_(dim_d),
      paths_(std::move(paths)),
      entities_((users + pois) * dim_k, 0.0),
      slot_rel_(slots * dim_d, 0.0),
      region_rel_(regions * dim_d, 0.0),
      category_rel_(categories * dim_d, 0.0),
      proj_(paths_.size() * dim_k * dim_d, 0.0) {
  if (dim_k == 0 || dim_d == 0) throw std::invalid_argument("embedding dimensions must be positive");
  for (const auto& p : paths_) {
    if (p.slot < 0 || static_cast<std::size_t>(p.slot) >= slots || p.region < 0 ||
        static_cast<std::size_t>(p.region) >= regions ||
        (p.has_category() && (p.category < 0 || static_cast<std::size_t>(p.category) >= categories)))
      throw std::invalid_argument("relation path component outside the model");
  }
}

TransRModel TransRModel::initialize(const KnowledgeGraph& graph, std::size_t dim_k, std::size_t dim_d,
                                    std::uint64_t seed) {
  TransRModel m(graph.user_count(), graph.poi_count(),
                static_cast<std::size_t>(graph.slots().slots_per_day()),
                static_cast<std::size_t>(graph.region_count()), graph.categories().size(),
                graph.relations().paths(), dim_k, dim_d);
  std::mt19937_64 rng(seed);
  for (std::size_t e = 0; e < m.entity_count(); ++e) fill_unit_uniform(m.entity(e), dim_k, rng);
  for (std::size_t s = 0; s < m.slot_count(); ++s) fill_unit_uniform(m.slot_vector(s), dim_d, rng);
  for (std::size_t l = 0; l < m.region_count(); ++l) fill_unit_uniform(m.region_vector(l), dim_d, rng);
  for (std::size_t c = 0; c < m.category_count(); ++c) fill_unit_uniform(m.category_vector(c), dim_d, rng);
  for (std::size_t r = 0; r < m.relation_count(); ++r) {
    auto p = m.projection(RelationId(r));
    for (std::size_t i = 0; i < std::min(dim_k, dim_d); ++i) p[i * dim_d + i] = 1.0;
  }
  return m;
}

std::span<double> TransRModel::entity(std::size_t row) {
  if (row >= entity_count()) throw std::out_of_range("entity row");
  return {entities_.data() + row * dim_k_, dim_k_};
}
std::span<const double> TransRModel::entity(std::size_t row) const {
  if (row >= entity_count()) throw std::out_of_range("entity row");
  return {entities_.data() + row * dim_k_, dim_k_};
}
std::span<double> TransRModel::slot_vector(std::size_t slot) {
  if (slot >= slot_count()) throw std::out_of_range("slot");
  return {slot_rel_.data() + slot * dim_d_, dim_d_};
}
std::span<const double> TransRModel::slot_vector(std::size_t slot) const {
  if (slot >= slot_count()) throw std::out_of_range("slot");
  return {slot_rel_.data() + slot * dim_d_, dim_d_};
}
std::span<double> TransRModel::region_vector(std::size_t region) {
  if (region >= region_count()) throw std::out_of_range("region");
  return {region_rel_.data() + region * dim_d_, dim_d_};
}
std::span<const double> TransRModel::region_vector(std::size_t region) const {
  if (region >= region_count()) throw std::out_of_range("region");
  return {region_rel_.data() + region * dim_d_, dim_d_};
}
std::span<double> TransRModel::category_vector(std::size_t category) {
  if (category >= category_count()) throw std::out_of_range("category");
  return {category_rel_.data() + category * dim_d_, dim_d_};
}
std::span<const double> TransRModel::category_vector(std::size_t category) const {
  if (category >= category_count()) throw std::out_of_range("category");
  return {category_rel_.data() + category * dim_d_, dim_d_};
}
std::span<double> TransRModel::projection(RelationId r) {
  if (r.value >= relation_count()) throw std::out_of_range("unknown relation");
  return {proj_.data() + r.value * dim_k_ * dim_d_, dim_k_ * dim_d_};
}
std::span<const double> TransRModel::projection(RelationId r) const {
  if (r.value >= relation_count()) throw std::out_of_range("unknown relation");
  return {proj_.data() + r.value * dim_k_ * dim_d_, dim_k_ * dim_d_};
}

std::vector<std::span<const double>> TransRModel::components(RelationId r) const {
  const auto& p = path(r);
  std::vector<std::span<const double>> out{slot_vector(p.slot), region_vector(p.region)};
  if (p.has_category()) out.push_back(category_vector(p.category));
  return out;
}

std::vector<double> TransRModel::relation_vector(RelationId r) const {
  const auto parts = components(r);
  return compose_relation_embedding(parts);
}

bool TransRModel::bit_equal(const TransRModel& o) const {
  auto same = [](const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](double x, double y) {
             return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y);
           });
  };
  return users_ == o.users_ && pois_ == o.pois_ && dim_k_ == o.dim_k_ && dim_d_ == o.dim_d_ &&
         paths_ == o.paths_ && same(entities_, o.entities_) && same(slot_rel_, o.slot_rel_) &&
         same(region_rel_, o.region_rel_) && same(category_rel_, o.category_rel_) &&
         same(proj_, o.proj_);
}

void TransRModel::save(const std::filesystem::path& path, const TrainConfig& cfg) const {
  io::BinaryWriter w(path, kCheckpointMagic);
  w.u64(dim_k_);
  w.u64(dim_d_);
  w.u64(users_);
  w.u64(pois_);
  w.u64(slot_count());
  w.u64(region_count());
  w.u64(category_count());
  w.u64(paths_.size());
  for (const auto& p : paths_) {
    w.i64(p.slot);
    w.i64(p.region);
    w.i64(p.category);
  }
  w.doubles(entities_);
  w.doubles(slot_rel_);
  w.doubles(region_rel_);
  w.doubles(category_rel_);
  w.doubles(proj_);
  w.f64(cfg.learning_rate);
  w.f64(cfg.margin);
  w.u64(cfg.dim_d);
  w.u64(cfg.dim_k);
  w.u64(cfg.batch_size);
  w.u64(cfg.epochs);
  w.u64(cfg.seed);
  w.u64(cfg.negatives_per_positive);
  w.close();
}

std::pair<TransRModel, TrainConfig> TransRModel::load(const std::filesystem::path& path) {
  io::BinaryReader r(path, kCheckpointMagic);
  const auto k = r.u64(), d = r.u64(), users = r.u64(), pois = r.u64();
  const auto slots = r.u64(), regions = r.u64(), categories = r.u64(), npaths = r.u64();
  std::vector<RelationPath> paths(npaths);
  for (auto& p : paths) {
    p.slot = static_cast<int>(r.i64());
    p.region = static_cast<int>(r.i64());
    p.category = static_cast<int>(r.i64());
  }
  TransRModel m;
  try {
    m = TransRModel(users, pois, slots, regions, categories, std::move(paths), k, d);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("corrupt TransR checkpoint: ") + e.what());
  }
  auto read_block = [&](std::vector<double>& dst) {
    auto v = r.doubles();
    if (v.size() != dst.size()) throw DataError("TransR checkpoint block size mismatch");
    dst = std::move(v);
  };
  read_block(m.entities_);
  read_block(m.slot_rel_);
  read_block(m.region_rel_);
  read_block(m.category_rel_);
  read_block(m.proj_);
  TrainConfig cfg;
  cfg.learning_rate = r.f64();
  cfg.margin = r.f64();
  cfg.dim_d = r.u64();
  cfg.dim_k = r.u64();
  cfg.batch_size = r.u64();
  cfg.epochs = r.u64();
  cfg.seed = r.u64();
  cfg.negatives_per_positive = r.u64();
  return {std::move(m), cfg};
}

std::vector<double> compose_relation_embedding(std::span<const std::span<const double>> components) {
  if (components.empty()) throw std::invalid_argument("relation path needs at least one component");
  std::vector<double> out(components[0].begin(), components[0].end());
  for (std::size_t c = 1; c < components.size(); ++c) {
    if (components[c].size() != out.size())
      throw std::invalid_argument("relation components differ in dimension");
    for (std::size_t j = 0; j < out.size(); ++j) out[j] *= components[c][j];
  }
  return out;
}

std::vector<double> project_entity(std::span<const double> e, std::span<const double> m, std::size_t k,
                                   std::size_t d) {
  if (e.size() != k || m.size() != k * d) throw std::invalid_argument("projection shape mismatch");
  std::vector<double> out(d, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    if (e[i] == 0.0) continue;
    const double* row = m.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) out[j] += e[i] * row[j];
  }
  return out;
}

double score(const TransRModel& model, UserIndex u, RelationId r, PoiIndex v) {
  check_entity_rows(model, {u, r, v});
  std::vector<double> z;
  const auto rel = model.relation_vector(r);
  translation_residual(model.entity(model.row(u)), model.entity(model.row(v)), model.projection(r), rel,
                       model.dim_k(), model.dim_d(), z);
  return squared_norm(z);
}

double score(const TransRModel& model, const Triple& t) { return score(model, t.head, t.relation, t.tail); }

double margin_loss(const TransRModel& model, const Triple& positive, std::span<const Triple> negatives,
                   double margin) {
  const double fp = score(model, positive);
  double loss = 0;
  for (const auto& n : negatives) loss += std::max(0.0, fp + margin - score(model, n));
  return loss;
}

std::pair<double, Gradient> loss_and_gradient(const TransRModel& model,
                                              std::span<const TrainingExample> batch, double margin) {
  const std::size_t k = model.dim_k(), d = model.dim_d();
  Gradient g;
  double loss = 0;
  std::vector<double> z_pos, z_neg, g_rel(d);
  for (const auto& ex : batch) {
    const Triple& p = ex.positive;
    check_entity_rows(model, p);
    const auto m = model.projection(p.relation);
    const auto parts = model.components(p.relation);
    const auto rel = compose_relation_embedding(parts);
    const auto u = model.entity(model.row(p.head));
    const auto v = model.entity(model.row(p.tail));
    translation_residual(u, v, m, rel, k, d, z_pos);
    const double f_pos = squared_norm(z_pos);

    for (const auto& n : ex.negatives) {
      if (n.relation != p.relation) throw std::invalid_argument("negative must share the positive's relation");
      check_entity_rows(model, n);
      const auto un = model.entity(model.row(n.head));
      const auto vn = model.entity(model.row(n.tail));
      translation_residual(un, vn, m, rel, k, d, z_neg);
      const double term = f_pos + margin - squared_norm(z_neg);
      if (!(term > 0.0)) {
        if (!std::isfinite(term)) loss += term;
        continue;
      }
      loss += term;

      // d f / d z = 2 z; the negative enters with the opposite sign.
      add_mz(slot_in(g.entities, model.row(p.head), k), m, z_pos, 2.0, k, d);
      add_mz(slot_in(g.entities, model.row(p.tail), k), m, z_pos, -2.0, k, d);
      add_mz(slot_in(g.entities, model.row(n.head), k), m, z_neg, -2.0, k, d);
      add_mz(slot_in(g.entities, model.row(n.tail), k), m, z_neg, 2.0, k, d);

      auto& gm = g.projections[p.relation.value];
      if (gm.empty()) gm.assign(k * d, 0.0);
      for (std::size_t i = 0; i < k; ++i) {
        const double dp = 2.0 * (u[i] - v[i]);
        const double dn = 2.0 * (un[i] - vn[i]);
        double* row = gm.data() + i * d;
        for (std::size_t j = 0; j < d; ++j) row[j] += dp * z_pos[j] - dn * z_neg[j];
      }

      for (std::size_t j = 0; j < d; ++j) g_rel[j] = 2.0 * (z_pos[j] - z_neg[j]);
      // Chain rule through the elementwise product: d r / d c_i = prod_{j != i} c_j.
      const auto& path = model.path(p.relation);
      std::array<std::map<std::size_t, std::vector<double>>*, 3> targets{&g.slots, &g.regions, &g.categories};
      std::array<std::size_t, 3> keys{static_cast<std::size_t>(path.slot), static_cast<std::size_t>(path.region),
                                      static_cast<std::size_t>(path.category)};
      for (std::size_t c = 0; c < parts.size(); ++c) {
        auto& gc = slot_in(*targets[c], keys[c], d);
        for (std::size_t j = 0; j < d; ++j) {
          double others = 1.0;
          for (std::size_t o = 0; o < parts.size(); ++o) {
            if (o != c) others *= parts[o][j];
          }
          gc[j] += g_rel[j] * others;
        }
      }
    }
  }
  return {loss, std::move(g)};
}

StepResult grad_step(TransRModel& model, std::span<const TrainingExample> batch, const TrainConfig& cfg) {
  auto [loss, g] = loss_and_gradient(model, batch, cfg.margin);
  if (!std::isfinite(loss)) throw DivergenceError("TransR loss became non-finite");

  StepResult result;
  result.loss = loss;
  if (g.projections.empty()) return result;

  const double lr = cfg.learning_rate;
  auto apply = [lr](std::span<double> dst, const std::vector<double>& grad) {
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] -= lr * grad[j];
  };
  for (const auto& [row, grad] : g.entities) apply(model.entity(row), grad);
  for (const auto& [s, grad] : g.slots) apply(model.slot_vector(s), grad);
  for (const auto& [l, grad] : g.regions) apply(model.region_vector(l), grad);
  for (const auto& [c, grad] : g.categories) apply(model.category_vector(c), grad);
  for (const auto& [r, grad] : g.projections) apply(model.projection(RelationId(r)), grad);

  // Base components in the unit ball keep every composed path there too,
  // since |a_j| <= ||a|| <= 1 for each factor.
  for (const auto& [s, grad] : g.slots) clamp_to_unit_ball(model.slot_vector(s));
  for (const auto& [l, grad] : g.regions) clamp_to_unit_ball(model.region_vector(l));
  for (const auto& [c, grad] : g.categories) clamp_to_unit_ball(model.category_vector(c));
  for (const auto& [row, grad] : g.entities) clamp_to_unit_ball(model.entity(row));

  std::set<std::pair<std::size_t, std::uint32_t>> pairs;
  for (const auto& ex : batch) {
    if (!g.projections.contains(ex.positive.relation.value)) continue;
    const std::uint32_t r = ex.positive.relation.value;
    pairs.emplace(model.row(ex.positive.head), r);
    pairs.emplace(model.row(ex.positive.tail), r);
    for (const auto& n : ex.negatives) {
      pairs.emplace(model.row(n.head), r);
      pairs.emplace(model.row(n.tail), r);
    }
  }
  const std::size_t k = model.dim_k(), d = model.dim_d();
  for (const auto& [row, r] : pairs) {
    auto e = model.entity(row);
    const auto projected = project_entity(e, model.projection(RelationId(r)), k, d);
    const double n = std::sqrt(squared_norm(projected));
    if (n > 1.0) scale(e, 1.0 / n);
    result.touched.emplace_back(row, RelationId(r));
  }
  return result;
}

TrainResult train(const KnowledgeGraph& graph, const TrainConfig& cfg) {
  validate(cfg);
  if (graph.positives().empty()) throw DataError("cannot train on an empty graph");
  TrainResult result{TransRModel::initialize(graph, cfg.dim_k, cfg.dim_d, cfg.seed), {}};
  if (cfg.epochs == 0) return result;

  std::mt19937_64 rng(cfg.seed ^ 0xA5A5A5A5DEADBEEFULL);
  const auto& positives = graph.positives();
  std::vector<std::size_t> order(positives.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<TrainingExample> batch;
  batch.reserve(cfg.batch_size);
  result.loss_trace.reserve(cfg.epochs);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      batch.clear();
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      for (std::size_t i = start; i < end; ++i) {
        const Triple& pos = positives[order[i]];
        batch.push_back({pos, sample_negatives(graph, pos, cfg.negatives_per_positive, rng)});
      }
      loss_sum += grad_step(result.model, batch, cfg).loss;
      ++batches;
    }
    result.loss_trace.push_back(loss_sum / static_cast<double>(batches));
  }
  return result;
}

void write_loss_trace(const std::filesystem::path& path, std::span<const double> trace) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << "epoch,mean_loss\n";
  for (std::size_t i = 0; i < trace.size(); ++i) out << i + 1 << ',' << format_double(trace[i]) << '\n';
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace poirec
