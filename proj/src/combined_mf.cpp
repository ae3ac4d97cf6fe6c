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
#include "poirec/combined_mf.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>
#include <stdexcept>
#include <tuple>
#include <unordered_set>

#include "poirec/binary_io.hpp"
#include "poirec/candidate_extraction.hpp"
#include "poirec/errors.hpp"
#include "poirec/kg_builder.hpp"

namespace poirec {

namespace {

constexpr std::string_view kMagic = "POIREC-FACTORS-1";
constexpr double kInitStd = 0.1;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

void validate(const MFConfig& cfg) {
  if (cfg.latent_dim == 0) throw ConfigError("mf latent_dim must be positive");
  if (!(cfg.alpha >= 0.0) || !std::isfinite(cfg.alpha)) throw ConfigError("mf alpha must be non-negative");
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate))
    throw ConfigError("mf learning_rate must be positive");
  if (cfg.epochs == 0) throw ConfigError("mf epochs must be positive");
}

double dampen_count(double x) { return x > 0.0 ? 1.0 + std::log1p(x) : 0.0; }

Observations make_observations(const FrequencyMatrix& counts, const MFConfig& cfg) {
  Observations obs;
  obs.rows = counts.row_count();
  obs.cols = counts.col_count();
  for (const auto& e : counts.entries()) {
    const double x = static_cast<double>(e.count);
    obs.entries.push_back({e.row, e.col, cfg.dampen ? dampen_count(x) : x});
  }
  if (!cfg.sample_zeros) return obs;

  const std::size_t positives = obs.entries.size();
  const std::size_t cells = obs.rows * obs.cols;
  const std::size_t zeros = cells - positives;
  const std::size_t want = std::min(positives, zeros);
  if (want == 0) return obs;

  // entries() is sorted by (row, col), so a flat cell id is a binary search away.
  auto is_positive = [&](std::size_t cell) {
    const auto r = static_cast<std::uint32_t>(cell / obs.cols);
    const auto c = static_cast<std::uint32_t>(cell % obs.cols);
    return std::binary_search(counts.entries().begin(), counts.entries().end(), FrequencyMatrix::Entry{r, c, 0},
                              [](const auto& a, const auto& b) { return std::tie(a.row, a.col) < std::tie(b.row, b.col); });
  };
  std::mt19937_64 rng(cfg.seed ^ 0x5EED2E2005ULL);
  std::vector<std::size_t> picked;
  if (want * 4 >= zeros) {
    std::vector<std::size_t> pool;
    pool.reserve(zeros);
    for (std::size_t cell = 0; cell < cells; ++cell)
      if (!is_positive(cell)) pool.push_back(cell);
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(want);
    picked = std::move(pool);
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, cells - 1);
    std::unordered_set<std::size_t> seen;
    while (picked.size() < want) {
      const auto cell = pick(rng);
      if (is_positive(cell) || !seen.insert(cell).second) continue;
      picked.push_back(cell);
    }
  }
  std::sort(picked.begin(), picked.end());
  for (auto cell : picked)
    obs.entries.push_back({static_cast<std::uint32_t>(cell / obs.cols), static_cast<std::uint32_t>(cell % obs.cols), 0.0});
  return obs;
}

double mf_objective(const Observations& obs, std::span<const double> row_factors,
                    std::span<const double> col_factors, std::size_t k, double alpha) {
  double data = 0;
  for (const auto& e : obs.entries) {
    const double err = e.value - dot(row_factors.subspan(e.row * k, k), col_factors.subspan(e.col * k, k));
    data += err * err;
  }
  double reg = 0;
  if (alpha > 0) {
    for (double x : row_factors) reg += x * x;
    for (double x : col_factors) reg += x * x;
  }
  return alpha * reg + data;
}

MFResult train_mf(const Observations& obs, const MFConfig& cfg) {
  validate(cfg);
  if (obs.rows == 0 || obs.cols == 0) throw DataError("cannot factorize an empty matrix");
  for (const auto& e : obs.entries) {
    if (e.row >= obs.rows || e.col >= obs.cols) throw std::out_of_range("observation outside the matrix");
    if (!std::isfinite(e.value)) throw DataError("non-finite observation");
  }
  const std::size_t k = cfg.latent_dim;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> init(0.0, kInitStd);

  MFResult res;
  res.row_factors.resize(obs.rows * k);
  res.col_factors.resize(obs.cols * k);
  for (auto& x : res.row_factors) x = init(rng);
  for (auto& x : res.col_factors) x = init(rng);
  res.initial_objective = mf_objective(obs, res.row_factors, res.col_factors, k, cfg.alpha);

  std::vector<std::size_t> row_visits(obs.rows, 0), col_visits(obs.cols, 0);
  for (const auto& e : obs.entries) {
    ++row_visits[e.row];
    ++col_visits[e.col];
  }
  std::vector<std::size_t> order(obs.entries.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> old_row(k);
  const double lr = cfg.learning_rate;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (auto idx : order) {
      const auto& e = obs.entries[idx];
      double* p = res.row_factors.data() + e.row * k;
      double* q = res.col_factors.data() + e.col * k;
      const double err = e.value - dot({p, k}, {q, k});
      std::copy(p, p + k, old_row.begin());
      for (std::size_t j = 0; j < k; ++j) p[j] += lr * 2.0 * err * q[j];
      for (std::size_t j = 0; j < k; ++j) q[j] += lr * 2.0 * err * old_row[j];
      if (cfg.alpha > 0) {
        const double sp = 1.0 + lr * 2.0 * cfg.alpha / static_cast<double>(row_visits[e.row]);
        const double sq = 1.0 + lr * 2.0 * cfg.alpha / static_cast<double>(col_visits[e.col]);
        for (std::size_t j = 0; j < k; ++j) {
          p[j] /= sp;
          q[j] /= sq;
        }
      }
    }
    const double obj = mf_objective(obs, res.row_factors, res.col_factors, k, cfg.alpha);
    if (!std::isfinite(obj)) throw DivergenceError("matrix factorization diverged at epoch " + std::to_string(epoch + 1));
    res.objective_trace.push_back(obj);
  }
  return res;
}

MFResult train_mf(const FrequencyMatrix& counts, const MFConfig& cfg) {
  validate(cfg);
  return train_mf(make_observations(counts, cfg), cfg);
}

FactorModel::FactorModel(std::size_t k, double alpha, std::vector<UserIndex> st_users, std::vector<PoiIndex> st_pois,
                         std::vector<double> e, std::vector<double> o, std::vector<double> u, std::vector<double> v)
    : k_(k),
      alpha_(alpha),
      st_users_(std::move(st_users)),
      st_pois_(std::move(st_pois)),
      e_(std::move(e)),
      o_(std::move(o)),
      u_(std::move(u)),
      v_(std::move(v)) {
  if (k_ == 0) throw std::invalid_argument("latent dimension must be positive");
  if (!(alpha_ >= 0.0)) throw std::invalid_argument("alpha must be non-negative");
  if (e_.size() != st_users_.size() * k_ || o_.size() != st_pois_.size() * k_)
    throw std::invalid_argument("spatio-temporal factor shape does not match the candidate sets");
  if (u_.size() % k_ != 0 || v_.size() % k_ != 0) throw std::invalid_argument("preference factor shape mismatch");
  if (!all_finite(e_) || !all_finite(o_) || !all_finite(u_) || !all_finite(v_))
    throw std::invalid_argument("non-finite factor entry");
  for (std::size_t i = 0; i < st_users_.size(); ++i) {
    if (st_users_[i].value >= user_count()) throw std::invalid_argument("candidate user outside the preference factors");
    if (!st_row_.emplace(st_users_[i], i).second) throw std::invalid_argument("duplicate candidate user");
  }
  for (std::size_t i = 0; i < st_pois_.size(); ++i) {
    if (st_pois_[i].value >= poi_count()) throw std::invalid_argument("candidate POI outside the preference factors");
    if (!st_col_.emplace(st_pois_[i], i).second) throw std::invalid_argument("duplicate candidate POI");
  }
}

std::optional<std::size_t> FactorModel::st_row(UserIndex u) const {
  auto it = st_row_.find(u);
  if (it == st_row_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> FactorModel::st_col(PoiIndex v) const {
  auto it = st_col_.find(v);
  if (it == st_col_.end()) return std::nullopt;
  return it->second;
}

bool FactorModel::bit_equal(const FactorModel& other) const {
  auto same = [](const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
  };
  return k_ == other.k_ && std::memcmp(&alpha_, &other.alpha_, sizeof(double)) == 0 &&
         st_users_ == other.st_users_ && st_pois_ == other.st_pois_ && same(e_, other.e_) && same(o_, other.o_) &&
         same(u_, other.u_) && same(v_, other.v_);
}

void FactorModel::save(const std::filesystem::path& path) const {
  io::BinaryWriter w(path, kMagic);
  w.u64(k_);
  w.f64(alpha_);
  std::vector<std::uint32_t> users, pois;
  for (auto u : st_users_) users.push_back(u.value);
  for (auto v : st_pois_) pois.push_back(v.value);
  w.u32s(users);
  w.u32s(pois);
  w.doubles(e_);
  w.doubles(o_);
  w.doubles(u_);
  w.doubles(v_);
  w.close();
}

FactorModel FactorModel::load(const std::filesystem::path& path) {
  io::BinaryReader r(path, kMagic);
  const auto k = static_cast<std::size_t>(r.u64());
  const double alpha = r.f64();
  std::vector<UserIndex> users;
  std::vector<PoiIndex> pois;
  for (auto u : r.u32s()) users.emplace_back(u);
  for (auto v : r.u32s()) pois.emplace_back(v);
  auto e = r.doubles();
  auto o = r.doubles();
  auto u = r.doubles();
  auto v = r.doubles();
  try {
    return FactorModel(k, alpha, std::move(users), std::move(pois), std::move(e), std::move(o), std::move(u),
                       std::move(v));
  } catch (const std::invalid_argument& ex) {
    throw DataError(path.string() + ": " + ex.what());
  }
}

double predict_st(UserIndex u, PoiIndex v, const FactorModel& model) {
  const auto row = model.st_row(u);
  const auto col = model.st_col(v);
  if (!row || !col) throw std::out_of_range("pair outside the candidate sets");
  return dot(model.e(*row), model.o(*col));
}

double predict_pref(UserIndex u, PoiIndex v, const FactorModel& model) {
  if (u.value >= model.user_count() || v.value >= model.poi_count()) throw std::out_of_range("unknown user or POI");
  return dot(model.u(u), model.v(v));
}

double combine_scores(double st, double pref) { return std::max(st, 0.0) * std::max(pref, 0.0); }

double combine(UserIndex u, PoiIndex v, const FactorModel& model) {
  const auto row = model.st_row(u);
  const auto col = model.st_col(v);
  if (!row || !col) return 0.0;
  return combine_scores(dot(model.e(*row), model.o(*col)), predict_pref(u, v, model));
}

FactorTraining train_factor_model(std::span<const CheckIn> train, const KnowledgeGraph& graph,
                                  const CandidateSet& candidates, const MFConfig& cfg) {
  validate(cfg);
  if (candidates.users.empty() || candidates.pois.empty()) throw DataError("empty candidate set");
  const auto& users = graph.vocab().users;
  const auto& pois = graph.vocab().pois;

  std::vector<std::string> st_rows, st_cols;
  for (auto u : candidates.users) st_rows.push_back(users.key(u.value));
  for (auto v : candidates.pois) st_cols.push_back(pois.key(v.value));
  const auto st_counts = build_frequency_matrix(train, std::move(st_rows), std::move(st_cols));
  const auto pref_counts = build_frequency_matrix(train, users.keys(), pois.keys());

  MFConfig pref_cfg = cfg;
  pref_cfg.seed = cfg.seed + 1;
  FactorTraining out;
  out.st = train_mf(st_counts, cfg);
  out.pref = train_mf(pref_counts, pref_cfg);
  out.model = FactorModel(cfg.latent_dim, cfg.alpha, candidates.users, candidates.pois, out.st.row_factors,
                          out.st.col_factors, out.pref.row_factors, out.pref.col_factors);
  return out;
}

}  // namespace poirec
