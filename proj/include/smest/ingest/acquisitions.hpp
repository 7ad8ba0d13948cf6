#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "smest/core/date.hpp"
#include "smest/core/types.hpp"
#include "smest/ingest/patch.hpp"

namespace smest::ingest {

struct AcquisitionKey {
  std::string station_id;
  Sensor sensor = Sensor::kS2;
  Orbit orbit = Orbit::kNone;
  core::Date date;

  friend auto operator<=>(const AcquisitionKey&, const AcquisitionKey&) = default;
};

struct AcquisitionEntry {
  std::string file;
  /// Present iff sensor == S2.
  std::optional<double> cloud_fraction;
};

/**
 * @brief Catalogue of available patch files keyed by (station, sensor, orbit, date).
 */
class AcquisitionIndex {
 public:
  /// Inserts an entry; duplicate keys and cloud-fraction presence violations throw.
  void add(AcquisitionKey key, AcquisitionEntry entry);

  [[nodiscard]] const AcquisitionEntry* find(const AcquisitionKey& key) const;
  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] std::size_t count_sensor(Sensor sensor) const;

  [[nodiscard]] const std::map<AcquisitionKey, AcquisitionEntry>& entries() const {
    return entries_;
  }

 private:
  std::map<AcquisitionKey, AcquisitionEntry> entries_;
};

/// Reads and decodes one patch file. IoError if unreadable.
Patch read_patch_file(const std::filesystem::path& path);

struct ScanResult {
  AcquisitionIndex index;
  std::size_t skipped_unknown_station = 0;
};

/**
 * @brief Indexes `patches_dir/{station_id}/{sensor}/{date}_{orbit}.eopc`.
 *
 * Every file is decoded once to validate it and, for S2, to compute the SCL
 * cloud fraction. Files under stations absent from `stations` are skipped and
 * counted. Traversal is sorted so the result is filesystem-order independent.
 */
ScanResult scan_patches(const std::filesystem::path& patches_dir,
                        const core::StationTable& stations);

}  // namespace smest::ingest
