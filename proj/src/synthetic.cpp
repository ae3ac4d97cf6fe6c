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
#include "poirec/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "json.hpp"

#include "poirec/errors.hpp"

namespace poirec {

namespace {

std::string numbered(char prefix, std::size_t i, std::size_t n) {
  const auto width = std::to_string(n > 0 ? n - 1 : 0).size();
  auto digits = std::to_string(i);
  return std::string(1, prefix) + std::string(width - digits.size(), '0') + digits;
}

}  // namespace

SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.users == 0 || spec.pois == 0 || spec.regions == 0 || spec.slots == 0 || spec.categories == 0 ||
      spec.checkins_per_user == 0 || spec.preferred_per_user == 0 || spec.days == 0)
    throw ConfigError("synthetic counts must be positive");
  if (24 % spec.slots != 0) throw ConfigError("synthetic slot count must divide 24");
  if (!(spec.strength >= 0.0 && spec.strength <= 1.0)) throw ConfigError("synthetic strength must lie in [0, 1]");
  if (spec.pois / spec.regions < spec.preferred_per_user)
    throw ConfigError("too few POIs per region for the preferred sets");

  std::mt19937_64 rng(spec.seed);
  SyntheticDataset out;

  const auto grid = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(spec.regions))));
  for (std::size_t r = 0; r < spec.regions; ++r)
    out.region_centers.push_back({10.0 + 5.0 * static_cast<double>(r / grid), 10.0 + 5.0 * static_cast<double>(r % grid)});

  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  std::vector<GeoPoint> poi_loc;
  std::vector<std::vector<std::size_t>> region_pois(spec.regions);
  for (std::size_t v = 0; v < spec.pois; ++v) {
    const auto r = v % spec.regions;
    out.poi_region.push_back(r);
    region_pois[r].push_back(v);
    const auto& c = out.region_centers[r];
    poi_loc.push_back({c.lat + jitter(rng), c.lon + jitter(rng)});
  }

  std::vector<std::string> poi_ids, categories;
  for (std::size_t v = 0; v < spec.pois; ++v) poi_ids.push_back(numbered('p', v, spec.pois));
  for (std::size_t c = 0; c < spec.categories; ++c) categories.push_back(numbered('c', c, spec.categories));

  const std::int64_t slot_seconds = 86'400 / static_cast<std::int64_t>(spec.slots);
  std::uniform_int_distribution<std::size_t> any_poi(0, spec.pois - 1);
  std::uniform_int_distribution<std::size_t> any_slot(0, spec.slots - 1);
  std::uniform_int_distribution<std::size_t> any_region(0, spec.regions - 1);
  std::uniform_int_distribution<std::int64_t> any_day(0, static_cast<std::int64_t>(spec.days) - 1);
  std::uniform_int_distribution<std::int64_t> in_slot(0, slot_seconds - 1);
  std::uniform_int_distribution<std::int64_t> in_day(0, 86'399);
  std::bernoulli_distribution planted(spec.strength);

  for (std::size_t u = 0; u < spec.users; ++u) {
    PlantedUser pu;
    pu.user_id = numbered('u', u, spec.users);
    pu.home_region = any_region(rng);
    pu.favorite_slot = any_slot(rng);

    // Popularity falls off as 1 / (rank + 1) within the region.
    auto candidates = region_pois[pu.home_region];
    std::vector<double> weights;
    for (std::size_t i = 0; i < candidates.size(); ++i) weights.push_back(1.0 / static_cast<double>(i + 1));
    std::vector<std::size_t> preferred;
    while (preferred.size() < spec.preferred_per_user) {
      std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
      const auto i = pick(rng);
      preferred.push_back(candidates[i]);
      weights[i] = 0.0;
    }
    for (auto v : preferred) pu.preferred.push_back(poi_ids[v]);
    std::uniform_int_distribution<std::size_t> any_preferred(0, preferred.size() - 1);

    for (std::size_t n = 0; n < spec.checkins_per_user; ++n) {
      const std::int64_t day = spec.start_time + any_day(rng) * 86'400;
      std::size_t v;
      std::int64_t ts;
      if (planted(rng)) {
        v = preferred[any_preferred(rng)];
        ts = day + static_cast<std::int64_t>(pu.favorite_slot) * slot_seconds + in_slot(rng);
      } else {
        v = any_poi(rng);
        ts = day + in_day(rng);
      }
      out.checkins.push_back({pu.user_id, poi_ids[v], poi_loc[v].lat, poi_loc[v].lon, ts,
                              categories[v % spec.categories]});
    }
    out.planted.push_back(std::move(pu));
  }
  std::stable_sort(out.checkins.begin(), out.checkins.end(),
                   [](const CheckIn& a, const CheckIn& b) { return a.timestamp < b.timestamp; });
  return out;
}

void write_planted(const std::filesystem::path& path, const SyntheticDataset& data) {
  nlohmann::json users = nlohmann::json::array();
  for (const auto& u : data.planted) {
    users.push_back({{"user_id", u.user_id},
                     {"home_region", u.home_region},
                     {"favorite_slot", u.favorite_slot},
                     {"preferred", u.preferred}});
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << nlohmann::json{{"users", users}}.dump(2) << '\n';
}

}  // namespace poirec
