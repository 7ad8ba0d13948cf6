#include "smest/ingest/acquisitions.hpp"

#include <algorithm>
#include <fstream>

#include "smest/core/error.hpp"

namespace smest::ingest {

using core::IoError;
using core::ValidationError;

void AcquisitionIndex::add(AcquisitionKey key, AcquisitionEntry entry) {
  const bool wants_cloud = key.sensor == Sensor::kS2;
  if (wants_cloud != entry.cloud_fraction.has_value()) {
    throw ValidationError("acquisition '" + entry.file +
                          "': cloud_fraction must be present iff sensor is S2");
  }
  if (entries_.count(key) != 0) {
    throw ValidationError("duplicate acquisition ('" + key.station_id + "', " +
                          to_string(key.sensor) + ", " + to_string(key.orbit) + ", " +
                          core::format_date(key.date) + "); second file: " + entry.file);
  }
  entries_.emplace(std::move(key), std::move(entry));
}

const AcquisitionEntry* AcquisitionIndex::find(const AcquisitionKey& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::size_t AcquisitionIndex::count_sensor(Sensor sensor) const {
  std::size_t n = 0;
  for (const auto& [key, entry] : entries_) {
    if (key.sensor == sensor) ++n;
  }
  return n;
}

Patch read_patch_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open patch file '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_patch(bytes);
  } catch (const ValidationError& e) {
    throw ValidationError("'" + path.string() + "': " + e.what());
  }
}

ScanResult scan_patches(const std::filesystem::path& patches_dir,
                        const core::StationTable& stations) {
  ScanResult result;
  if (!std::filesystem::exists(patches_dir)) return result;

  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(patches_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".eopc") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  for (const auto& file : files) {
    // Layout: patches/{station_id}/{sensor}/{date}_{orbit}.eopc
    const auto station_id = file.parent_path().parent_path().filename().string();
    if (!stations.contains(station_id)) {
      ++result.skipped_unknown_station;
      continue;
    }
    const Patch patch = read_patch_file(file);
    AcquisitionKey key{station_id, patch.sensor, patch.orbit, patch.date};
    AcquisitionEntry entry;
    entry.file = file.string();
    if (patch.sensor == Sensor::kS2) {
      try {
        entry.cloud_fraction = cloud_fraction(patch);
      } catch (const ValidationError& e) {
        throw ValidationError("'" + file.string() + "': " + e.what());
      }
    }
    result.index.add(std::move(key), std::move(entry));
  }
  return result;
}

}  // namespace smest::ingest
