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

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "poirec/geo.hpp"

namespace poirec {

// One check-in event: user, venue, coordinates, UTC time and an optional
// venue category.
struct CheckIn {
  std::string user_id;
  std::string poi_id;
  double lat = 0.0;
  double lon = 0.0;
  std::int64_t timestamp = 0;
  std::optional<std::string> category;

  GeoPoint location() const { return {lat, lon}; }

  friend bool operator==(const CheckIn&, const CheckIn&) = default;
};

bool is_valid(const CheckIn& c);

// ---------------------------------------------------------------------------
// CSV ingestion

enum class HeaderMode { kAuto, kPresent, kAbsent };

// Column positions used when the file has no header. A negative category
// position means the file carries no category column.
struct ColumnPositions {
  int user = 0;
  int poi = 1;
  int lat = 2;
  int lon = 3;
  int timestamp = 4;
  int category = 5;
};

// Column names used to locate fields when a header row is present.
struct ColumnNames {
  std::string user = "user_id";
  std::string poi = "poi_id";
  std::string lat = "lat";
  std::string lon = "lon";
  std::string timestamp = "timestamp";
  std::string category = "category";
};

struct CsvFormat {
  char delimiter = ',';
  HeaderMode header = HeaderMode::kAuto;
  ColumnPositions positions;
  ColumnNames names;
};

struct ParseResult {
  std::vector<CheckIn> records;
  std::size_t rejected = 0;
};

// Reads every syntactically valid record in file order. Lines with the wrong
// shape or out-of-range values are skipped and counted in `rejected`.
// Throws DataError for a missing file or when nothing valid is left, and
// ConfigError when the columns cannot be mapped.
ParseResult parse_checkins(const std::filesystem::path& path, const CsvFormat& format = {});
ParseResult parse_checkins(std::istream& in, const CsvFormat& format = {});

// Writes records with a header, in the default column order. Coordinates use
// the shortest round-trip representation.
void write_checkins(const std::filesystem::path& path, std::span<const CheckIn> records);

// Splits one CSV line, honouring double-quoted fields.
std::vector<std::string> split_csv_line(std::string_view line, char delimiter);

// ---------------------------------------------------------------------------
// Time slots

class TimeSlotSpec {
 public:
  // Throws ConfigError unless hours is a positive divisor of 24.
  static TimeSlotSpec from_hours(int hours);

  int slot_hours() const { return hours_; }
  int slots_per_day() const { return 24 / hours_; }

  friend bool operator==(const TimeSlotSpec&, const TimeSlotSpec&) = default;

 private:
  explicit TimeSlotSpec(int hours) : hours_(hours) {}
  int hours_ = 24;
};

// floor(local hour of day / slot_hours), with local = UTC + tz_offset_hours.
int assign_time_slot(std::int64_t timestamp, const TimeSlotSpec& spec, double tz_offset_hours = 0.0);

// ---------------------------------------------------------------------------
// Regions

enum class RegionMode { kPrecomputed, kKMeans };

class RegionModel {
 public:
  // k-means mode. Throws ConfigError on an empty or duplicated centroid list.
  static RegionModel from_centroids(std::vector<GeoPoint> centroids);

  // Precomputed mode: label lookup keyed by POI id. Labels are interned to
  // dense region ids in order of first appearance.
  static RegionModel from_labels(std::span<const std::pair<std::string, std::string>> poi_labels);

  // Reads "poi_id,label" rows (optional header) into a precomputed model.
  static RegionModel load_labels(const std::filesystem::path& path);

  RegionMode mode() const { return mode_; }
  int region_count() const { return region_count_; }
  const std::vector<GeoPoint>& centroids() const { return centroids_; }

  // Nearest centroid (squared Euclidean on degrees), lowest id on ties. In
  // precomputed mode the centroids are the label means set by
  // fit_label_centroids; regions without any points are skipped.
  int assign(const GeoPoint& p) const;

  // Label lookup in precomputed mode, nearest centroid otherwise.
  int assign(const CheckIn& c) const;

  // Throws DataError for an unknown key; precomputed mode only.
  int assign_key(std::string_view poi_id) const;

  // Precomputed mode: sets each region's centroid to the mean coordinate of
  // its labelled check-ins so that free coordinates can be resolved.
  void fit_label_centroids(std::span<const CheckIn> records);

  nlohmann::json to_json() const;
  static RegionModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static RegionModel load(const std::filesystem::path& path);

 private:
  RegionMode mode_ = RegionMode::kKMeans;
  int region_count_ = 0;
  std::vector<GeoPoint> centroids_;
  std::vector<bool> has_centroid_;
  std::unordered_map<std::string, int> labels_;
  std::vector<std::string> label_names_;
};

struct KMeansResult {
  RegionModel model;
  std::vector<int> assignment;
  // Inertia after every assignment step; non-increasing.
  std::vector<double> inertia_trace;
  int iterations = 0;
};

// Lloyd's algorithm with k-means++ seeding. Stops when no assignment changes
// or after max_iters rounds. An emptied cluster is re-seeded at the point
// farthest from its centroid. Throws DataError when fewer than k distinct
// points are given.
KMeansResult cluster_regions(std::span<const GeoPoint> points, int k, std::uint64_t seed,
                             int max_iters = 100);

int assign_region(const GeoPoint& p, const RegionModel& model);

// ---------------------------------------------------------------------------
// Temporal split

struct SplitDataset {
  std::vector<CheckIn> train;
  std::vector<CheckIn> test;
  // Every train timestamp < cutoff <= every test timestamp.
  std::int64_t cutoff_timestamp = 0;
};

// Global cutoff at the nearest-rank train_fraction quantile of timestamps.
// Records at or below the quantile value go to train. Input order is kept
// within each side.
SplitDataset split_by_date(std::span<const CheckIn> records, double train_fraction);

// ---------------------------------------------------------------------------
// Home locations

struct HomeLocation {
  std::string user_id;
  GeoPoint mu;
  // Sample covariance of (lat, lon) in degrees squared, n-1 divisor.
  std::array<std::array<double, 2>, 2> sigma{};

  // sqrt(trace(sigma)) with degrees converted to kilometres at the mean
  // latitude.
  double spread_km() const;
};

HomeLocation fit_home_location(std::span<const CheckIn> user_train);

// One home per user key.
std::unordered_map<std::string, HomeLocation> fit_home_locations(std::span<const CheckIn> train);

// ---------------------------------------------------------------------------
// Frequency matrix

class FrequencyMatrix {
 public:
  struct Entry {
    std::uint32_t row = 0;
    std::uint32_t col = 0;
    std::uint32_t count = 0;
  };

  FrequencyMatrix(std::vector<std::string> rows, std::vector<std::string> cols);

  const std::vector<std::string>& rows() const { return rows_; }
  const std::vector<std::string>& cols() const { return cols_; }
  std::size_t row_count() const { return rows_.size(); }
  std::size_t col_count() const { return cols_.size(); }

  std::optional<std::size_t> row_of(std::string_view key) const;
  std::optional<std::size_t> col_of(std::string_view key) const;

  std::uint32_t at(std::size_t row, std::size_t col) const;

  // Non-zero cells sorted by (row, col).
  const std::vector<Entry>& entries() const { return entries_; }

  std::vector<std::uint64_t> row_sums() const;
  std::vector<std::uint64_t> col_sums() const;

 private:
  friend FrequencyMatrix build_frequency_matrix(std::span<const CheckIn>, std::vector<std::string>,
                                                std::vector<std::string>);

  std::vector<std::string> rows_;
  std::vector<std::string> cols_;
  std::unordered_map<std::string, std::size_t> row_lookup_;
  std::unordered_map<std::string, std::size_t> col_lookup_;
  std::vector<Entry> entries_;
};

// Counts train check-ins per (user, POI) cell; records outside the index sets
// are ignored. Throws DataError when either index set is empty.
FrequencyMatrix build_frequency_matrix(std::span<const CheckIn> train, std::vector<std::string> rows,
                                       std::vector<std::string> cols);

}  // namespace poirec
