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

namespace poirec {

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

inline constexpr double kEarthRadiusKm = 6371.0;

// Kilometres spanned by one degree of latitude on the mean-radius sphere.
inline constexpr double kKmPerDegree = kEarthRadiusKm * 3.14159265358979323846 / 180.0;

bool is_valid(const GeoPoint& p);

// Great-circle distance in kilometres.
double haversine_km(const GeoPoint& a, const GeoPoint& b);

}  // namespace poirec
