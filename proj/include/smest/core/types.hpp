#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "smest/core/date.hpp"
#include "smest/core/error.hpp"
#include "smest/core/geo.hpp"

namespace smest::core {

enum class LandCover { kCropland, kTreeCover, kGrassland, kSparseVegetation, kOther };

std::optional<LandCover> parse_land_cover(const std::string& text);
const char* to_string(LandCover lc);

/// Vegetated classes are the ones retained by station filtering.
inline bool is_vegetated(LandCover lc) { return lc != LandCover::kOther; }

/**
 * @brief In-situ monitoring site with geographic position and land cover.
 */
struct Station {
  std::string station_id;
  std::string network;
  double lat = 0.0;
  double lon = 0.0;
  LandCover land_cover = LandCover::kOther;

  [[nodiscard]] LatLon position() const { return LatLon{lat, lon}; }
};

/// Daily 5 cm volumetric soil moisture observation in m3/m3.
struct Measurement {
  std::string station_id;
  Date date;
  double sm = 0.0;
};

/**
 * @brief Ordered station collection with unique, validated ids.
 */
class StationTable {
 public:
  /// Appends a station; enforces id uniqueness and coordinate ranges.
  void add(Station station);

  [[nodiscard]] const Station* find(const std::string& station_id) const;
  [[nodiscard]] bool contains(const std::string& station_id) const { return find(station_id) != nullptr; }
  [[nodiscard]] std::size_t size() const { return rows_.size(); }
  [[nodiscard]] bool empty() const { return rows_.empty(); }

  [[nodiscard]] const std::vector<Station>& rows() const { return rows_; }
  [[nodiscard]] std::vector<std::string> ids() const;

  auto begin() const { return rows_.begin(); }
  auto end() const { return rows_.end(); }

 private:
  std::vector<Station> rows_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

/**
 * @brief Measurement collection keyed by (station_id, date), one row per key.
 */
class MeasurementTable {
 public:
  /// Appends a measurement; enforces the sm range and per-key uniqueness.
  void add(Measurement m);

  [[nodiscard]] const Measurement* find(const std::string& station_id, Date date) const;
  [[nodiscard]] std::size_t count_for(const std::string& station_id) const;
  [[nodiscard]] std::size_t size() const { return rows_.size(); }

  [[nodiscard]] const std::vector<Measurement>& rows() const { return rows_; }

  auto begin() const { return rows_.begin(); }
  auto end() const { return rows_.end(); }

 private:
  std::vector<Measurement> rows_;
  std::unordered_map<std::string, std::unordered_map<std::int32_t, std::size_t>> by_key_;
};

}  // namespace smest::core
