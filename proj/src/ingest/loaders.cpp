#include "smest/ingest/loaders.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "smest/core/error.hpp"
#include "smest/core/geo.hpp"
#include "smest/ingest/csv.hpp"

namespace smest::ingest {

using core::ValidationError;

namespace {

const char* const kEra5Names[kEra5VariableCount] = {
    "precip_total",   "temp_air",      "temp_skin",        "temp_soil_l1", "evap_potential",
    "swv_l1",         "pressure_surface", "temp_dewpoint", "leaf_area_index",
    "rad_solar_down", "rad_thermal_down", "wind_u10",      "wind_v10",
};

std::string line_ref(const std::filesystem::path& path, int line) {
  return path.filename().string() + ":" + std::to_string(line);
}

}  // namespace

std::span<const char* const> era5_variable_names() {
  return std::span<const char* const>(kEra5Names, kEra5VariableCount);
}

void Era5Table::add(Era5Record record) {
  // Indices into values: 1-3 temperatures, 5 swv_l1, 7 dewpoint, 8 LAI.
  for (const std::size_t ti : {1u, 2u, 3u, 7u}) {
    if (!(record.values[ti] > 0.0)) {
      throw ValidationError("era5 record ('" + record.station_id + "', " +
                            core::format_date(record.date) + "): " + kEra5Names[ti] +
                            " must be > 0 K, got " + std::to_string(record.values[ti]));
    }
  }
  if (!(record.values[5] >= 0.0 && record.values[5] <= 1.0)) {
    throw ValidationError("era5 record ('" + record.station_id + "', " +
                          core::format_date(record.date) + "): swv_l1 out of [0,1]");
  }
  if (!(record.values[8] >= 0.0)) {
    throw ValidationError("era5 record ('" + record.station_id + "', " +
                          core::format_date(record.date) + "): leaf_area_index must be >= 0");
  }
  auto& per_station = by_key_[record.station_id];
  if (per_station.count(record.date.days) != 0) {
    throw ValidationError("duplicate era5 record for ('" + record.station_id + "', " +
                          core::format_date(record.date) + ")");
  }
  per_station.emplace(record.date.days, rows_.size());
  rows_.push_back(std::move(record));
}

const Era5Record* Era5Table::find(const std::string& station_id, core::Date date) const {
  const auto it = by_key_.find(station_id);
  if (it == by_key_.end()) return nullptr;
  const auto jt = it->second.find(date.days);
  return jt == it->second.end() ? nullptr : &rows_[jt->second];
}

void EmbeddingTable::add(EmbeddingRecord record, std::span<const double> vector) {
  if (vector.size() != kEmbeddingDim) {
    throw ValidationError("embedding for ('" + record.station_id + "', " +
                          core::format_date(record.date) + ") has " +
                          std::to_string(vector.size()) + " values, expected " +
                          std::to_string(kEmbeddingDim));
  }
  for (const double v : vector) {
    if (!std::isfinite(v)) {
      throw ValidationError("embedding for ('" + record.station_id + "', " +
                            core::format_date(record.date) + ") contains a non-finite value");
    }
  }
  auto& per_station = by_key_[record.station_id];
  if (per_station.count(record.date.days) != 0) {
    throw ValidationError("duplicate embedding for ('" + record.station_id + "', " +
                          core::format_date(record.date) + ")");
  }
  per_station.emplace(record.date.days, keys_.size());
  keys_.push_back(std::move(record));
  storage_.insert(storage_.end(), vector.begin(), vector.end());
}

const double* EmbeddingTable::find(const std::string& station_id, core::Date date) const {
  const auto it = by_key_.find(station_id);
  if (it == by_key_.end()) return nullptr;
  const auto jt = it->second.find(date.days);
  if (jt == it->second.end()) return nullptr;
  return storage_.data() + jt->second * kEmbeddingDim;
}

core::StationTable load_stations(const std::filesystem::path& path) {
  const CsvTable csv = read_csv(path);
  require_header(csv, {"station_id", "network", "lat", "lon", "land_cover"}, path.string());
  core::StationTable table;
  for (const auto& row : csv.rows) {
    if (row.fields.size() != 5) {
      throw ValidationError(line_ref(path, row.line) + ": expected 5 columns, got " +
                            std::to_string(row.fields.size()));
    }
    const auto lc = core::parse_land_cover(row.fields[4]);
    if (!lc) {
      throw ValidationError(line_ref(path, row.line) + ": unknown land_cover '" + row.fields[4] +
                            "'");
    }
    if (!core::is_vegetated(*lc)) continue;
    core::Station station;
    station.station_id = row.fields[0];
    station.network = row.fields[1];
    station.lat = parse_double_field(row.fields[2], path.string(), row.line, "lat");
    station.lon = parse_double_field(row.fields[3], path.string(), row.line, "lon");
    station.land_cover = *lc;
    try {
      table.add(std::move(station));
    } catch (const ValidationError& e) {
      throw ValidationError(line_ref(path, row.line) + ": " + e.what());
    }
  }
  return table;
}

MeasurementLoad load_measurements(const std::filesystem::path& path,
                                  const core::StationTable& stations) {
  const CsvTable csv = read_csv(path);
  require_header(csv, {"station_id", "date", "sm"}, path.string());
  MeasurementLoad out;
  std::unordered_map<std::string, std::unordered_map<std::int32_t, int>> first_line;
  for (const auto& row : csv.rows) {
    if (row.fields.size() != 3) {
      throw ValidationError(line_ref(path, row.line) + ": expected 3 columns, got " +
                            std::to_string(row.fields.size()));
    }
    if (!stations.contains(row.fields[0])) {
      ++out.dropped_unknown_station;
      continue;
    }
    core::Measurement m;
    m.station_id = row.fields[0];
    try {
      m.date = core::parse_date(row.fields[1]);
    } catch (const ValidationError& e) {
      throw ValidationError(line_ref(path, row.line) + ": " + e.what());
    }
    m.sm = parse_double_field(row.fields[2], path.string(), row.line, "sm");
    const auto prior = first_line.find(m.station_id);
    if (prior != first_line.end()) {
      const auto jt = prior->second.find(m.date.days);
      if (jt != prior->second.end()) {
        throw ValidationError(line_ref(path, row.line) + ": duplicate (station, date) ('" +
                              m.station_id + "', " + row.fields[1] + "), first seen at line " +
                              std::to_string(jt->second));
      }
    }
    first_line[m.station_id][m.date.days] = row.line;
    try {
      out.table.add(std::move(m));
    } catch (const ValidationError& e) {
      throw ValidationError(line_ref(path, row.line) + ": " + e.what());
    }
  }
  return out;
}

Era5Table load_era5(const std::filesystem::path& path) {
  const CsvTable csv = read_csv(path);
  std::vector<std::string> expected = {"station_id", "date"};
  for (const char* name : era5_variable_names()) expected.emplace_back(name);
  require_header(csv, expected, path.string());
  Era5Table table;
  for (const auto& row : csv.rows) {
    if (row.fields.size() != 2 + kEra5VariableCount) {
      throw ValidationError(line_ref(path, row.line) + ": expected " +
                            std::to_string(2 + kEra5VariableCount) + " columns, got " +
                            std::to_string(row.fields.size()));
    }
    Era5Record record;
    record.station_id = row.fields[0];
    try {
      record.date = core::parse_date(row.fields[1]);
    } catch (const ValidationError& e) {
      throw ValidationError(line_ref(path, row.line) + ": " + e.what());
    }
    for (std::size_t i = 0; i < kEra5VariableCount; ++i) {
      record.values[i] =
          parse_double_field(row.fields[2 + i], path.string(), row.line, kEra5Names[i]);
      if (!std::isfinite(record.values[i])) {
        throw ValidationError(line_ref(path, row.line) + ": column '" + kEra5Names[i] +
                              "': non-finite value");
      }
    }
    try {
      table.add(std::move(record));
    } catch (const ValidationError& e) {
      throw ValidationError(line_ref(path, row.line) + ": " + e.what());
    }
  }
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  const CsvTable csv = read_csv(path);
  std::vector<std::string> expected = {"station_id", "date"};
  for (std::size_t i = 0; i < kEmbeddingDim; ++i) {
    char name[8];
    std::snprintf(name, sizeof(name), "e%03zu", i);
    expected.emplace_back(name);
  }
  require_header(csv, expected, path.string());
  EmbeddingTable table;
  std::vector<double> vec(kEmbeddingDim);
  for (const auto& row : csv.rows) {
    if (row.fields.size() != 2 + kEmbeddingDim) {
      throw ValidationError(line_ref(path, row.line) + ": expected " +
                            std::to_string(2 + kEmbeddingDim) + " columns, got " +
                            std::to_string(row.fields.size()));
    }
    EmbeddingRecord record;
    record.station_id = row.fields[0];
    try {
      record.date = core::parse_date(row.fields[1]);
    } catch (const ValidationError& e) {
      throw ValidationError(line_ref(path, row.line) + ": " + e.what());
    }
    for (std::size_t i = 0; i < kEmbeddingDim; ++i) {
      vec[i] = parse_double_field(row.fields[2 + i], path.string(), row.line,
                                  expected[2 + i]);
      if (!std::isfinite(vec[i])) {
        throw ValidationError(line_ref(path, row.line) + ": column '" + expected[2 + i] +
                              "': non-finite value");
      }
    }
    try {
      table.add(std::move(record), vec);
    } catch (const ValidationError& e) {
      throw ValidationError(line_ref(path, row.line) + ": " + e.what());
    }
  }
  return table;
}

core::StationTable dedup_stations(const core::StationTable& stations,
                                  const core::MeasurementTable& measurements, double min_km) {
  if (!(min_km > 0.0)) {
    throw ValidationError("dedup_stations: min_km must be > 0, got " + std::to_string(min_km));
  }
  struct Ranked {
    const core::Station* station;
    std::size_t count;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(stations.size());
  for (const auto& s : stations.rows()) {
    ranked.push_back({&s, measurements.count_for(s.station_id)});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.station->station_id < b.station->station_id;
  });

  std::vector<const core::Station*> kept;
  for (const auto& r : ranked) {
    bool conflicts = false;
    for (const core::Station* k : kept) {
      if (core::haversine_km(r.station->position(), k->position()) < min_km) {
        conflicts = true;
        break;
      }
    }
    if (!conflicts) kept.push_back(r.station);
  }

  // Preserve the input row order among retained stations.
  core::StationTable out;
  for (const auto& s : stations.rows()) {
    if (std::find(kept.begin(), kept.end(), &s) != kept.end()) out.add(s);
  }
  return out;
}

}  // namespace smest::ingest
