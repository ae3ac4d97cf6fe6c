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
#include <fstream>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "poirec/errors.hpp"
#include "poirec/experiments.hpp"
#include "small_pipeline.hpp"
#include "test_util.hpp"

using namespace poirec;
using poirec::testing::small_config;
using poirec::testing::small_split;
using poirec::testing::TempDir;

namespace {

using Key = std::tuple<std::string, std::string, std::int64_t>;

std::vector<Key> sorted_keys(std::span<const CheckIn> records) {
  std::vector<Key> out;
  for (const auto& c : records) out.emplace_back(c.user_id, c.poi_id, c.timestamp);
  std::sort(out.begin(), out.end());
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("subsampling removes the requested share") {
  const auto data = small_split();
  const auto n = data.train.size();
  CHECK(subsample_train(data.train, 0.0, 3).size() == n);
  CHECK(sorted_keys(subsample_train(data.train, 0.0, 3)) == sorted_keys(data.train));
  for (double f : {0.1, 0.25, 0.4, 0.9})
    CHECK(subsample_train(data.train, f, 3).size() == n - static_cast<std::size_t>(std::llround(f * n)));
  CHECK_THROWS_AS(subsample_train(data.train, 1.0, 3), ConfigError);
  CHECK_THROWS_AS(subsample_train(data.train, -0.1, 3), ConfigError);
}

TEST_CASE("removal sets are nested across fractions") {
  const auto data = small_split();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto prev = sorted_keys(data.train);
    for (double f : {0.1, 0.2, 0.3, 0.4}) {
      const auto kept = sorted_keys(subsample_train(data.train, f, seed));
      CHECK(std::includes(prev.begin(), prev.end(), kept.begin(), kept.end()));
      prev = kept;
    }
  }
}

TEST_CASE("sparsity experiment") {
  const auto data = small_split();
  const auto cfg = small_config();
  const std::array<double, 2> fractions{0.0, 0.3};
  const auto rows = run_sparsity_experiment(data, fractions, cfg, 9);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].train_records == data.train.size());
  CHECK(rows[1].train_records < rows[0].train_records);

  const auto base = train_pipeline(data.train, cfg);
  const std::array<std::size_t, 1> ks{10};
  const auto report = evaluate(base, data.train, data.test, ks).front();
  CHECK(rows[0].precision == report.precision);
  CHECK(rows[0].recall == report.recall);
  CHECK(rows[0].f1 == report.f1);

  const std::array<double, 1> full{1.0};
  CHECK_THROWS_AS(run_sparsity_experiment(data, full, cfg, 9), ConfigError);

  TempDir dir;
  write_sparsity_csv(dir / "s.csv", rows);
  std::istringstream in(slurp(dir / "s.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "fraction,train_records,prec@10,rec@10,f1@10");
  std::size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 2);
}

TEST_CASE("timeslot sweep yields one row per setting") {
  const auto data = small_split();
  const std::array<int, 2> hours{8, 24};
  const auto rows = run_timeslot_sweep(data, hours, small_config());
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].value == 8);
  CHECK(rows[1].value == 24);
  for (const auto& r : rows) {
    for (int i = 0; i < 3; ++i) {
      CHECK(r.precision[i] >= 0.0);
      CHECK(r.precision[i] <= 1.0);
      CHECK(r.recall[i] <= 1.0);
    }
    CHECK(r.recall[0] <= r.recall[1]);
    CHECK(r.recall[1] <= r.recall[2]);
  }
  const std::array<int, 1> bad{7};
  CHECK_THROWS_AS(run_timeslot_sweep(data, bad, small_config()), ConfigError);

  TempDir dir;
  write_sweep_csv(dir / "t.csv", "slot_hours", rows);
  std::istringstream in(slurp(dir / "t.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "slot_hours,prec@1,prec@10,prec@20,rec@1,rec@10,rec@20");
}

TEST_CASE("dimension sweep trains every point for the configured epochs") {
  const auto data = small_split();
  auto cfg = small_config();
  cfg.transr.epochs = 4;
  const std::array<std::size_t, 2> dims{5, 50};
  const auto rows = run_dim_sweep(data, dims, cfg);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].value == 5);
  CHECK(rows[1].value == 50);
  for (const auto& r : rows) CHECK(r.epochs_trained == 4);
  const std::array<std::size_t, 1> zero{0};
  CHECK_THROWS_AS(run_dim_sweep(data, zero, cfg), ConfigError);
}

TEST_CASE("default grids and parameters") {
  CHECK(std::vector<int>(kTimeslotGrid.begin(), kTimeslotGrid.end()) == std::vector<int>{1, 2, 4, 8, 12, 24});
  CHECK(std::vector<std::size_t>(kDimGrid.begin(), kDimGrid.end()) ==
        std::vector<std::size_t>{70, 80, 90, 100, 110, 120});
  const PipelineConfig cfg;
  CHECK(cfg.experiments.timeslot_hours == std::vector<int>{1, 2, 4, 8, 12, 24});
  CHECK(cfg.experiments.dims == std::vector<std::size_t>{70, 80, 90, 100, 110, 120});
  CHECK(cfg.experiments.sparsity_fractions == std::vector<double>{0.0, 0.1, 0.2, 0.3, 0.4});
  CHECK(cfg.transr.learning_rate == 0.001);
  CHECK(cfg.transr.margin == 1.0);
  CHECK(cfg.transr.dim_d == 100);
  CHECK(cfg.transr.batch_size == 120);
  CHECK(cfg.transr.epochs == 1000);
  CHECK(cfg.graph.slot_hours == 8);
  CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("configuration JSON") {
  SUBCASE("an empty object gives the defaults") {
    const auto cfg = config_from_json(nlohmann::json::object());
    CHECK(config_to_json(cfg) == config_to_json(PipelineConfig{}));
  }
  SUBCASE("round trip") {
    auto cfg = small_config(7);
    cfg.data.csv.delimiter = '\t';
    cfg.graph.use_category = false;
    cfg.experiments.dims = {5, 50};
    const auto back = config_from_json(config_to_json(cfg));
    CHECK(config_to_json(back) == config_to_json(cfg));
    CHECK(back.transr == cfg.transr);
    CHECK(back.mf == cfg.mf);
    CHECK(back.extraction == cfg.extraction);
    CHECK(back.graph == cfg.graph);
    CHECK(back.data == cfg.data);
  }
  SUBCASE("the seed reaches every stage unless a stage overrides it") {
    const auto cfg = config_from_json(nlohmann::json{{"seed", 42}});
    CHECK(cfg.transr.seed == 42);
    CHECK(cfg.mf.seed == 42);
    CHECK(cfg.graph.kmeans_seed == 42);
    const auto own = config_from_json(nlohmann::json{{"seed", 42}, {"graph", {{"kmeans_seed", 3}}}});
    CHECK(own.graph.kmeans_seed == 3);
  }
  SUBCASE("unknown keys and wrong types are rejected") {
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"bogus", 1}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"transr", {{"lr", 0.1}}}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"transr", {{"epochs", "many"}}}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"graph", {{"region_mode", "grid"}}}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::array()), ConfigError);
  }
  SUBCASE("invalid values are rejected") {
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"extraction", {{"theta_keep", 2.0}}}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"graph", {{"slot_hours", 5}}}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"data", {{"train_fraction", 1.0}}}}), ConfigError);
  }
  SUBCASE("files") {
    TempDir dir;
    std::ofstream(dir / "c.json") << R"({"seed": 5, "mf": {"latent_dim": 7}})";
    const auto cfg = load_config(dir / "c.json");
    CHECK(cfg.mf.latent_dim == 7);
    CHECK(cfg.seed == 5);
    std::ofstream(dir / "broken.json") << "{";
    CHECK_THROWS_AS(load_config(dir / "broken.json"), ConfigError);
    CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
  }
}
