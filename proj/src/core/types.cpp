#include "smest/core/types.hpp"

#include <algorithm>

namespace smest::core {

std::optional<LandCover> parse_land_cover(const std::string& text) {
  if (text == "cropland") return LandCover::kCropland;
  if (text == "tree_cover") return LandCover::kTreeCover;
  if (text == "grassland") return LandCover::kGrassland;
  if (text == "sparse_vegetation") return LandCover::kSparseVegetation;
  if (text == "other") return LandCover::kOther;
  return std::nullopt;
}

const char* to_string(LandCover lc) {
  switch (lc) {
    case LandCover::kCropland: return "cropland";
    case LandCover::kTreeCover: return "tree_cover";
    case LandCover::kGrassland: return "grassland";
    case LandCover::kSparseVegetation: return "sparse_vegetation";
    case LandCover::kOther: return "other";
  }
  return "other";
}

void StationTable::add(Station station) {
  if (station.station_id.empty()) {
    throw ValidationError("station_id must be non-empty");
  }
  if (by_id_.count(station.station_id) != 0) {
    throw ValidationError("duplicate station_id '" + station.station_id + "'");
  }
  if (!(station.lat >= -90.0 && station.lat <= 90.0)) {
    throw ValidationError("station '" + station.station_id + "': lat out of range [-90,90]: " +
                          std::to_string(station.lat));
  }
  if (!(station.lon >= -180.0 && station.lon <= 180.0)) {
    throw ValidationError("station '" + station.station_id + "': lon out of range [-180,180]: " +
                          std::to_string(station.lon));
  }
  by_id_.emplace(station.station_id, rows_.size());
  rows_.push_back(std::move(station));
}

const Station* StationTable::find(const std::string& station_id) const {
  const auto it = by_id_.find(station_id);
  return it == by_id_.end() ? nullptr : &rows_[it->second];
}

std::vector<std::string> StationTable::ids() const {
  std::vector<std::string> out;
  out.reserve(rows_.size());
  for (const auto& s : rows_) out.push_back(s.station_id);
  return out;
}

void MeasurementTable::add(Measurement m) {
  if (!(m.sm >= 0.0 && m.sm <= 1.0)) {
    throw ValidationError("measurement for '" + m.station_id + "' on " + format_date(m.date) +
                          ": sm out of range [0,1]: " + std::to_string(m.sm));
  }
  auto& per_station = by_key_[m.station_id];
  if (per_station.count(m.date.days) != 0) {
    throw ValidationError("duplicate measurement for ('" + m.station_id + "', " +
                          format_date(m.date) + ")");
  }
  per_station.emplace(m.date.days, rows_.size());
  rows_.push_back(std::move(m));
}

const Measurement* MeasurementTable::find(const std::string& station_id, Date date) const {
  const auto it = by_key_.find(station_id);
  if (it == by_key_.end()) return nullptr;
  const auto jt = it->second.find(date.days);
  return jt == it->second.end() ? nullptr : &rows_[jt->second];
}

std::size_t MeasurementTable::count_for(const std::string& station_id) const {
  const auto it = by_key_.find(station_id);
  return it == by_key_.end() ? 0 : it->second.size();
}

}  // namespace smest::core
