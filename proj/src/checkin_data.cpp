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
#include "poirec/checkin_data.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <random>
#include <set>

#include "poirec/errors.hpp"

namespace poirec {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

int parse_digits(std::string_view s, std::size_t pos, std::size_t n, bool& ok) {
  int v = 0;
  if (pos + n > s.size()) {
    ok = false;
    return 0;
  }
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9') {
      ok = false;
      return 0;
    }
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

// "YYYY-MM-DD[T ]HH:MM:SS[Z|(+|-)HH:MM]"
std::optional<std::int64_t> parse_iso8601(std::string_view s) {
  bool ok = true;
  const int year = parse_digits(s, 0, 4, ok);
  const int month = parse_digits(s, 5, 2, ok);
  const int day = parse_digits(s, 8, 2, ok);
  const int hour = parse_digits(s, 11, 2, ok);
  const int minute = parse_digits(s, 14, 2, ok);
  const int second = parse_digits(s, 17, 2, ok);
  if (!ok || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' ||
      s[16] != ':')
    return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{year},
                                        std::chrono::month{static_cast<unsigned>(month)},
                                        std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 60) return std::nullopt;
  std::int64_t t = std::chrono::sys_days{ymd}.time_since_epoch().count() * 86400LL +
                   hour * 3600LL + minute * 60LL + second;
  std::string_view rest = s.substr(19);
  if (rest.empty() || rest == "Z") return t;
  if (rest.size() == 6 && (rest[0] == '+' || rest[0] == '-') && rest[3] == ':') {
    const int oh = parse_digits(rest, 1, 2, ok);
    const int om = parse_digits(rest, 4, 2, ok);
    if (!ok) return std::nullopt;
    const std::int64_t offset = oh * 3600LL + om * 60LL;
    return rest[0] == '+' ? t - offset : t + offset;
  }
  return std::nullopt;
}

std::optional<std::int64_t> parse_timestamp(std::string_view s) {
  s = trim(s);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc{} && ptr == s.data() + s.size()) return v;
  if (auto d = parse_double(s)) {
    if (*d == std::floor(*d) && std::abs(*d) < 9e15) return static_cast<std::int64_t>(*d);
    return std::nullopt;
  }
  if (s.size() >= 19) return parse_iso8601(s);
  return std::nullopt;
}

struct ResolvedColumns {
  int user, poi, lat, lon, timestamp, category;

  int required_max() const { return std::max({user, poi, lat, lon, timestamp}); }
};

ResolvedColumns validate_positions(const ColumnPositions& p) {
  const std::array<int, 5> req{p.user, p.poi, p.lat, p.lon, p.timestamp};
  std::set<int> seen;
  for (int c : req) {
    if (c < 0) throw ConfigError("column positions must be non-negative");
    if (!seen.insert(c).second) throw ConfigError("column positions must be distinct");
  }
  if (p.category >= 0 && seen.contains(p.category))
    throw ConfigError("category column overlaps another column");
  return {p.user, p.poi, p.lat, p.lon, p.timestamp, p.category};
}

ResolvedColumns resolve_header(const std::vector<std::string>& header, const ColumnNames& names) {
  auto find = [&](const std::string& name, bool required) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) == name) return static_cast<int>(i);
    }
    if (required) throw ConfigError("header has no column named '" + name + "'");
    return -1;
  };
  return {find(names.user, true),      find(names.poi, true),       find(names.lat, true),
          find(names.lon, true),       find(names.timestamp, true), find(names.category, false)};
}

std::string quote_if_needed(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double squared_distance(const GeoPoint& a, const GeoPoint& b) {
  const double dl = a.lat - b.lat;
  const double dn = a.lon - b.lon;
  return dl * dl + dn * dn;
}

}  // namespace

bool is_valid(const CheckIn& c) {
  return !c.user_id.empty() && !c.poi_id.empty() && is_valid(c.location()) && c.timestamp > 0;
}

std::vector<std::string> split_csv_line(std::string_view line, char delimiter) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delimiter) {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

ParseResult parse_checkins(std::istream& in, const CsvFormat& format) {
  ParseResult result;
  std::optional<ResolvedColumns> cols;
  if (format.header == HeaderMode::kAbsent || format.header == HeaderMode::kAuto)
    cols = validate_positions(format.positions);

  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line, format.delimiter);
    if (first) {
      first = false;
      bool is_header = format.header == HeaderMode::kPresent;
      if (format.header == HeaderMode::kAuto) {
        const auto& p = *cols;
        auto numeric_at = [&](int pos) {
          return pos < static_cast<int>(fields.size()) && parse_double(fields[pos]).has_value();
        };
        is_header = !numeric_at(p.lat) && !numeric_at(p.lon);
      }
      if (is_header) {
        cols = resolve_header(fields, format.names);
        continue;
      }
    }
    const auto& p = *cols;
    if (p.required_max() >= static_cast<int>(fields.size())) {
      ++result.rejected;
      continue;
    }
    CheckIn c;
    c.user_id = std::string(trim(fields[p.user]));
    c.poi_id = std::string(trim(fields[p.poi]));
    auto lat = parse_double(fields[p.lat]);
    auto lon = parse_double(fields[p.lon]);
    auto ts = parse_timestamp(fields[p.timestamp]);
    if (!lat || !lon || !ts) {
      ++result.rejected;
      continue;
    }
    c.lat = *lat;
    c.lon = *lon;
    c.timestamp = *ts;
    if (p.category >= 0 && p.category < static_cast<int>(fields.size())) {
      auto cat = trim(fields[p.category]);
      if (!cat.empty()) c.category = std::string(cat);
    }
    if (!is_valid(c)) {
      ++result.rejected;
      continue;
    }
    result.records.push_back(std::move(c));
  }
  if (result.records.empty()) throw DataError("no valid check-in records");
  return result;
}

ParseResult parse_checkins(const std::filesystem::path& path, const CsvFormat& format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open check-in file " + path.string());
  return parse_checkins(in, format);
}

void write_checkins(const std::filesystem::path& path, std::span<const CheckIn> records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << "user_id,poi_id,lat,lon,timestamp,category\n";
  for (const auto& c : records) {
    out << quote_if_needed(c.user_id) << ',' << quote_if_needed(c.poi_id) << ',' << shortest(c.lat)
        << ',' << shortest(c.lon) << ',' << c.timestamp << ','
        << (c.category ? quote_if_needed(*c.category) : std::string()) << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

// ---------------------------------------------------------------------------

TimeSlotSpec TimeSlotSpec::from_hours(int hours) {
  if (hours <= 0 || hours > 24 || 24 % hours != 0)
    throw ConfigError("slot_hours must divide 24, got " + std::to_string(hours));
  return TimeSlotSpec(hours);
}

int assign_time_slot(std::int64_t timestamp, const TimeSlotSpec& spec, double tz_offset_hours) {
  const std::int64_t local = timestamp + std::llround(tz_offset_hours * 3600.0);
  const std::int64_t second_of_day = ((local % 86400) + 86400) % 86400;
  return static_cast<int>(second_of_day / (spec.slot_hours() * 3600LL));
}

// ---------------------------------------------------------------------------

RegionModel RegionModel::from_centroids(std::vector<GeoPoint> centroids) {
  if (centroids.empty()) throw ConfigError("region model needs at least one centroid");
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    if (!std::isfinite(centroids[i].lat) || !std::isfinite(centroids[i].lon))
      throw ConfigError("non-finite centroid");
    for (std::size_t j = 0; j < i; ++j) {
      if (centroids[i] == centroids[j]) throw ConfigError("duplicate centroids");
    }
  }
  RegionModel m;
  m.mode_ = RegionMode::kKMeans;
  m.region_count_ = static_cast<int>(centroids.size());
  m.centroids_ = std::move(centroids);
  m.has_centroid_.assign(m.centroids_.size(), true);
  return m;
}

RegionModel RegionModel::from_labels(std::span<const std::pair<std::string, std::string>> poi_labels) {
  RegionModel m;
  m.mode_ = RegionMode::kPrecomputed;
  std::unordered_map<std::string, int> ids;
  for (const auto& [poi, label] : poi_labels) {
    auto [it, inserted] = ids.try_emplace(label, static_cast<int>(m.label_names_.size()));
    if (inserted) m.label_names_.push_back(label);
    m.labels_[poi] = it->second;
  }
  if (m.label_names_.empty()) throw ConfigError("region label table is empty");
  m.region_count_ = static_cast<int>(m.label_names_.size());
  m.centroids_.assign(m.region_count_, GeoPoint{});
  m.has_centroid_.assign(m.region_count_, false);
  return m;
}

RegionModel RegionModel::load_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open region label file " + path.string());
  std::vector<std::pair<std::string, std::string>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto f = split_csv_line(line, ',');
    if (f.size() < 2) throw ConfigError("region label rows need poi_id,label");
    if (first && trim(f[0]) == "poi_id") {
      first = false;
      continue;
    }
    first = false;
    rows.emplace_back(std::string(trim(f[0])), std::string(trim(f[1])));
  }
  return from_labels(rows);
}

int RegionModel::assign(const GeoPoint& p) const {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < region_count_; ++i) {
    if (!has_centroid_[i]) continue;
    const double d = squared_distance(p, centroids_[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  if (best < 0) throw DataError("region model has no centroids to resolve coordinates");
  return best;
}

int RegionModel::assign(const CheckIn& c) const {
  return mode_ == RegionMode::kPrecomputed ? assign_key(c.poi_id) : assign(c.location());
}

int RegionModel::assign_key(std::string_view poi_id) const {
  if (mode_ != RegionMode::kPrecomputed) throw ConfigError("key lookup needs precomputed regions");
  auto it = labels_.find(std::string(poi_id));
  if (it == labels_.end()) throw DataError("no region label for POI '" + std::string(poi_id) + "'");
  return it->second;
}

void RegionModel::fit_label_centroids(std::span<const CheckIn> records) {
  if (mode_ != RegionMode::kPrecomputed) return;
  std::vector<double> lat(region_count_, 0.0), lon(region_count_, 0.0);
  std::vector<std::size_t> n(region_count_, 0);
  for (const auto& c : records) {
    auto it = labels_.find(c.poi_id);
    if (it == labels_.end()) continue;
    lat[it->second] += c.lat;
    lon[it->second] += c.lon;
    ++n[it->second];
  }
  for (int i = 0; i < region_count_; ++i) {
    has_centroid_[i] = n[i] > 0;
    centroids_[i] = n[i] > 0 ? GeoPoint{lat[i] / n[i], lon[i] / n[i]} : GeoPoint{};
  }
}

nlohmann::json RegionModel::to_json() const {
  nlohmann::json j;
  j["mode"] = mode_ == RegionMode::kKMeans ? "kmeans" : "precomputed";
  j["region_count"] = region_count_;
  auto cents = nlohmann::json::array();
  for (int i = 0; i < region_count_; ++i) {
    if (has_centroid_[i])
      cents.push_back({centroids_[i].lat, centroids_[i].lon});
    else
      cents.push_back(nullptr);
  }
  j["centroids"] = std::move(cents);
  if (mode_ == RegionMode::kPrecomputed) {
    j["label_names"] = label_names_;
    std::map<std::string, int> sorted(labels_.begin(), labels_.end());
    j["labels"] = sorted;
  }
  return j;
}

RegionModel RegionModel::from_json(const nlohmann::json& j) {
  try {
    const std::string mode = j.at("mode");
    const int count = j.at("region_count");
    const auto& cents = j.at("centroids");
    if (static_cast<int>(cents.size()) != count) throw ConfigError("centroid count mismatch");
    if (mode == "kmeans") {
      std::vector<GeoPoint> pts;
      for (const auto& c : cents) pts.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
      return from_centroids(std::move(pts));
    }
    if (mode != "precomputed") throw ConfigError("unknown region mode '" + mode + "'");
    RegionModel m;
    m.mode_ = RegionMode::kPrecomputed;
    m.region_count_ = count;
    m.label_names_ = j.at("label_names").get<std::vector<std::string>>();
    for (const auto& [k, v] : j.at("labels").items()) m.labels_[k] = v.get<int>();
    for (const auto& c : cents) {
      m.has_centroid_.push_back(!c.is_null());
      m.centroids_.push_back(c.is_null() ? GeoPoint{}
                                         : GeoPoint{c.at(0).get<double>(), c.at(1).get<double>()});
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed region model: ") + e.what());
  }
}

void RegionModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << to_json().dump(2) << '\n';
}

RegionModel RegionModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open region model " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed region model: ") + e.what());
  }
  return from_json(j);
}

int assign_region(const GeoPoint& p, const RegionModel& model) { return model.assign(p); }

KMeansResult cluster_regions(std::span<const GeoPoint> points, int k, std::uint64_t seed,
                             int max_iters) {
  if (k < 1) throw ConfigError("region count must be positive");
  {
    std::vector<std::pair<double, double>> distinct;
    distinct.reserve(points.size());
    for (const auto& p : points) distinct.emplace_back(p.lat, p.lon);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (static_cast<int>(distinct.size()) < k)
      throw DataError("k-means needs at least " + std::to_string(k) + " distinct points, got " +
                      std::to_string(distinct.size()));
  }

  const std::size_t n = points.size();
  std::mt19937_64 rng(seed);
  std::vector<GeoPoint> centroids;
  centroids.reserve(k);

  // k-means++ seeding.
  centroids.push_back(points[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], centroids[0]);
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0;
    for (double d : d2) total += d;
    const double target = std::uniform_real_distribution<double>(0.0, total)(rng);
    double acc = 0;
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0) continue;
      acc += d2[i];
      pick = i;
      if (acc >= target) break;
    }
    centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], squared_distance(points[i], centroids.back()));
  }

  KMeansResult result;
  std::vector<int> assignment(n, -1);
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    double inertia = 0;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(points[i], centroids[0]);
      for (int c = 1; c < k; ++c) {
        const double d = squared_distance(points[i], centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assignment[i] != best) changed = true;
      assignment[i] = best;
      inertia += best_d;
    }
    result.inertia_trace.push_back(inertia);
    result.iterations = iter + 1;
    if (!changed) break;

    std::vector<double> lat(k, 0.0), lon(k, 0.0);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      lat[assignment[i]] += points[i].lat;
      lon[assignment[i]] += points[i].lon;
      ++count[assignment[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (count[c] > 0) centroids[c] = {lat[c] / count[c], lon[c] / count[c]};
    }
    for (int c = 0; c < k; ++c) {
      if (count[c] > 0) continue;
      std::size_t far = 0;
      double far_d = -1;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = squared_distance(points[i], centroids[assignment[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      centroids[c] = points[far];
      --count[assignment[far]];
      assignment[far] = c;
      count[c] = 1;
    }
  }
  result.assignment = std::move(assignment);
  result.model = RegionModel::from_centroids(std::move(centroids));
  return result;
}

// ---------------------------------------------------------------------------

SplitDataset split_by_date(std::span<const CheckIn> records, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train_fraction must lie in (0, 1)");
  if (records.empty()) throw DataError("cannot split an empty record set");

  std::vector<std::int64_t> ts;
  ts.reserve(records.size());
  for (const auto& r : records) ts.push_back(r.timestamp);
  std::sort(ts.begin(), ts.end());
  const std::size_t n = ts.size();
  // Nearest rank: the smallest value covering train_fraction of the records.
  auto rank = static_cast<std::size_t>(std::ceil(train_fraction * static_cast<double>(n) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::int64_t last_train = ts[rank - 1];
  if (last_train == ts.back()) {
    auto it = std::lower_bound(ts.begin(), ts.end(), ts.back());
    if (it == ts.begin()) throw DataError("all records share one timestamp; cannot split by date");
    last_train = *std::prev(it);
  }
  const std::int64_t cutoff = *std::upper_bound(ts.begin(), ts.end(), last_train);

  SplitDataset out;
  out.cutoff_timestamp = cutoff;
  for (const auto& r : records) (r.timestamp < cutoff ? out.train : out.test).push_back(r);
  return out;
}

// ---------------------------------------------------------------------------

double HomeLocation::spread_km() const {
  const double kx = kKmPerDegree;
  const double ky = kKmPerDegree * std::cos(mu.lat * 3.14159265358979323846 / 180.0);
  return std::sqrt(std::max(0.0, sigma[0][0] * kx * kx + sigma[1][1] * ky * ky));
}

HomeLocation fit_home_location(std::span<const CheckIn> user_train) {
  if (user_train.empty()) throw DataError("cannot fit a home location without check-ins");
  HomeLocation h;
  h.user_id = user_train.front().user_id;
  const double n = static_cast<double>(user_train.size());
  for (const auto& c : user_train) {
    h.mu.lat += c.lat;
    h.mu.lon += c.lon;
  }
  h.mu.lat /= n;
  h.mu.lon /= n;
  if (user_train.size() > 1) {
    double sxx = 0, syy = 0, sxy = 0;
    for (const auto& c : user_train) {
      const double dx = c.lat - h.mu.lat;
      const double dy = c.lon - h.mu.lon;
      sxx += dx * dx;
      syy += dy * dy;
      sxy += dx * dy;
    }
    h.sigma = {{{sxx / (n - 1), sxy / (n - 1)}, {sxy / (n - 1), syy / (n - 1)}}};
  }
  return h;
}

std::unordered_map<std::string, HomeLocation> fit_home_locations(std::span<const CheckIn> train) {
  std::unordered_map<std::string, std::vector<CheckIn>> by_user;
  for (const auto& c : train) by_user[c.user_id].push_back(c);
  std::unordered_map<std::string, HomeLocation> homes;
  for (const auto& [user, rows] : by_user) homes.emplace(user, fit_home_location(rows));
  return homes;
}

// ---------------------------------------------------------------------------

FrequencyMatrix::FrequencyMatrix(std::vector<std::string> rows, std::vector<std::string> cols)
    : rows_(std::move(rows)), cols_(std::move(cols)) {
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (!row_lookup_.emplace(rows_[i], i).second) throw DataError("duplicate row key " + rows_[i]);
  }
  for (std::size_t j = 0; j < cols_.size(); ++j) {
    if (!col_lookup_.emplace(cols_[j], j).second) throw DataError("duplicate column key " + cols_[j]);
  }
}

std::optional<std::size_t> FrequencyMatrix::row_of(std::string_view key) const {
  auto it = row_lookup_.find(std::string(key));
  if (it == row_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> FrequencyMatrix::col_of(std::string_view key) const {
  auto it = col_lookup_.find(std::string(key));
  if (it == col_lookup_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t FrequencyMatrix::at(std::size_t row, std::size_t col) const {
  if (row >= rows_.size() || col >= cols_.size()) throw std::out_of_range("frequency matrix index");
  auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair{row, col},
                             [](const Entry& e, const std::pair<std::size_t, std::size_t>& rc) {
                               return std::pair<std::size_t, std::size_t>{e.row, e.col} < rc;
                             });
  if (it != entries_.end() && it->row == row && it->col == col) return it->count;
  return 0;
}

std::vector<std::uint64_t> FrequencyMatrix::row_sums() const {
  std::vector<std::uint64_t> s(rows_.size(), 0);
  for (const auto& e : entries_) s[e.row] += e.count;
  return s;
}

std::vector<std::uint64_t> FrequencyMatrix::col_sums() const {
  std::vector<std::uint64_t> s(cols_.size(), 0);
  for (const auto& e : entries_) s[e.col] += e.count;
  return s;
}

FrequencyMatrix build_frequency_matrix(std::span<const CheckIn> train, std::vector<std::string> rows,
                                       std::vector<std::string> cols) {
  if (rows.empty() || cols.empty()) throw DataError("frequency matrix needs non-empty index sets");
  FrequencyMatrix m(std::move(rows), std::move(cols));
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> cells;
  for (const auto& c : train) {
    auto r = m.row_lookup_.find(c.user_id);
    if (r == m.row_lookup_.end()) continue;
    auto col = m.col_lookup_.find(c.poi_id);
    if (col == m.col_lookup_.end()) continue;
    ++cells[{static_cast<std::uint32_t>(r->second), static_cast<std::uint32_t>(col->second)}];
  }
  m.entries_.reserve(cells.size());
  for (const auto& [rc, n] : cells) m.entries_.push_back({rc.first, rc.second, n});
  return m;
}

}  // namespace poirec
