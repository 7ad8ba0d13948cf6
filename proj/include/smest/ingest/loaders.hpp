#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "smest/core/date.hpp"
#include "smest/core/types.hpp"

namespace smest::ingest {

/// The 13 daily reanalysis variables, in CSV column order.
inline constexpr std::size_t kEra5VariableCount = 13;
std::span<const char* const> era5_variable_names();

/**
 * @brief One station-day of reanalysis variables.
 */
struct Era5Record {
  std::string station_id;
  core::Date date;
  std::array<double, kEra5VariableCount> values{};
};

class Era5Table {
 public:
  /// Appends a record; enforces physical invariants and per-key uniqueness.
  void add(Era5Record record);

  [[nodiscard]] const Era5Record* find(const std::string& station_id, core::Date date) const;
  [[nodiscard]] std::size_t size() const { return rows_.size(); }
  [[nodiscard]] const std::vector<Era5Record>& rows() const { return rows_; }

 private:
  std::vector<Era5Record> rows_;
  std::unordered_map<std::string, std::unordered_map<std::int32_t, std::size_t>> by_key_;
};

inline constexpr std::size_t kEmbeddingDim = 768;

/// Precomputed 768-dim encoder embedding for one station-date.
struct EmbeddingRecord {
  std::string station_id;
  core::Date date;
};

class EmbeddingTable {
 public:
  void add(EmbeddingRecord record, std::span<const double> vector);

  /// Pointer to the 768-value vector, or nullptr when absent.
  [[nodiscard]] const double* find(const std::string& station_id, core::Date date) const;
  [[nodiscard]] std::size_t size() const { return keys_.size(); }

 private:
  std::vector<EmbeddingRecord> keys_;
  std::vector<double> storage_;
  std::unordered_map<std::string, std::unordered_map<std::int32_t, std::size_t>> by_key_;
};

/**
 * @brief Stations CSV loader.
 *
 * Retains only vegetated land-cover rows (cropland, tree_cover, grassland,
 * sparse_vegetation), preserving file order. Duplicate ids and malformed
 * coordinates raise ValidationError citing the line.
 */
core::StationTable load_stations(const std::filesystem::path& path);

struct MeasurementLoad {
  core::MeasurementTable table;
  std::size_t dropped_unknown_station = 0;
};

/**
 * @brief Measurements CSV loader.
 *
 * Rows for stations absent from `stations` are dropped and counted; sm out of
 * [0,1] and duplicate (station, date) keys raise ValidationError citing lines.
 */
MeasurementLoad load_measurements(const std::filesystem::path& path,
                                  const core::StationTable& stations);

Era5Table load_era5(const std::filesystem::path& path);

EmbeddingTable load_embeddings(const std::filesystem::path& path);

/**
 * @brief Removes stations closer than min_km to an already retained station.
 *
 * Greedy over stations ordered by (-measurement_count, station_id), so the
 * member of a conflicting cluster with the most ground truth is kept and the
 * result is independent of input row order.
 */
core::StationTable dedup_stations(const core::StationTable& stations,
                                  const core::MeasurementTable& measurements,
                                  double min_km = 1.0);

}  // namespace smest::ingest
