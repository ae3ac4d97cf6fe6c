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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "poirec/checkin_data.hpp"

namespace poirec {

struct SyntheticSpec {
  std::size_t users = 50;
  std::size_t pois = 100;
  std::size_t regions = 4;
  // Slots per day; must divide 24.
  std::size_t slots = 3;
  std::size_t categories = 5;
  std::size_t checkins_per_user = 20;
  std::size_t preferred_per_user = 5;
  // Probability that a check-in hits the user's preferred set at the
  // favourite slot; otherwise POI and time are uniform.
  double strength = 0.9;
  std::size_t days = 60;
  std::int64_t start_time = 1'600'000'000 - 1'600'000'000 % 86'400;
  std::uint64_t seed = 1;
};

struct PlantedUser {
  std::string user_id;
  std::size_t home_region = 0;
  std::size_t favorite_slot = 0;
  std::vector<std::string> preferred;
};

struct SyntheticDataset {
  std::vector<CheckIn> checkins;
  std::vector<PlantedUser> planted;
  // Region of every POI, aligned with POI number.
  std::vector<std::size_t> poi_region;
  std::vector<GeoPoint> region_centers;
};

// Region centres sit 5 degrees apart; POIs are dealt round-robin to regions
// with +-0.05 degree jitter and Zipf-like popularity within their region.
// Preferred sets are drawn from the home region by popularity. Check-ins are
// returned in timestamp order. Throws ConfigError for zero counts, a slot
// count that does not divide 24, strength outside [0, 1] or a home region
// with fewer POIs than preferred_per_user.
SyntheticDataset generate_synthetic(const SyntheticSpec& spec);

// planted.json: users with home region, favourite slot and preferred POIs.
void write_planted(const std::filesystem::path& path, const SyntheticDataset& data);

}  // namespace poirec
