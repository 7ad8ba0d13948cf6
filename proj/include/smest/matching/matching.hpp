#pragma once

#include <optional>
#include <string>
#include <vector>

#include "smest/core/date.hpp"
#include "smest/core/types.hpp"
#include "smest/ingest/acquisitions.hpp"

namespace smest::matching {

/**
 * @brief Temporal pairing rule between a measurement date and an acquisition.
 */
struct MatchStrategy {
  enum class Kind { kCurrentDay, kClosest };

  Kind kind = Kind::kCurrentDay;
  /// Search half-width in days; used by kClosest only.
  int window_days = 10;

  static MatchStrategy current_day() { return {Kind::kCurrentDay, 10}; }
  static MatchStrategy closest(int window = 10) { return {Kind::kClosest, window}; }

  [[nodiscard]] const char* name() const {
    return kind == Kind::kCurrentDay ? "curr_day" : "closest";
  }
};

enum class OrbitConfig { kAsc, kDesc, kBoth };

const char* to_string(OrbitConfig cfg);

/// One candidate acquisition in a date-sorted pool.
struct PoolEntry {
  core::Date date;
  ingest::Orbit orbit = ingest::Orbit::kNone;
  std::string file;
};

using CandidatePool = std::vector<PoolEntry>;

/**
 * @brief Date-sorted acquisition pool for one station and sensor.
 *
 * S2 pools exclude acquisitions with cloud_fraction > 0.20 (inclusion at
 * exactly 0.20); S1 pools are restricted per orbit_cfg. Same-date entries
 * order DESC before ASC so downstream tie-breaks are total.
 */
CandidatePool candidate_pool(const ingest::AcquisitionIndex& index, const std::string& station_id,
                             ingest::Sensor sensor, OrbitConfig orbit_cfg);

/**
 * @brief Picks the acquisition matching target_date under the strategy.
 *
 * kClosest minimizes |date - target| within ±window_days, ties broken toward
 * the past, then DESC before ASC. kCurrentDay requires an exact date match.
 */
std::optional<PoolEntry> match_one(const CandidatePool& pool, core::Date target_date,
                                   const MatchStrategy& strategy);

/// Latest acquisition strictly before main_date and within max_gap_days of it.
std::optional<PoolEntry> previous_match(const CandidatePool& pool, core::Date main_date,
                                        int max_gap_days = 30);

/// Gap bound for the previous acquisition backing temporal-dynamics features.
inline constexpr int kPreviousMatchMaxGapDays = 30;

/**
 * @brief One measurement paired with its matched acquisitions.
 */
struct MatchedSample {
  std::string station_id;
  core::Date target_date;
  std::optional<PoolEntry> s2;
  std::optional<PoolEntry> s2_prev;
  std::optional<PoolEntry> s1;
  std::optional<PoolEntry> s1_prev;
};

/// Which modalities a sample must have matched to be emitted.
struct SampleRequirements {
  bool need_s2 = false;
  bool need_s1 = false;
};

struct BuildResult {
  std::vector<MatchedSample> samples;
  std::size_t dropped_missing_s2 = 0;
  std::size_t dropped_missing_s1 = 0;
};

/**
 * @brief Matches every measurement against the index under the given strategies.
 *
 * Emits one sample per measurement whose required modalities all matched;
 * drops (and counts) the rest. Previous acquisitions for dynamics features are
 * attached when available within 30 days; their absence never drops a sample.
 */
BuildResult build_samples(const core::MeasurementTable& measurements,
                          const ingest::AcquisitionIndex& index, const MatchStrategy& s2_strategy,
                          const MatchStrategy& s1_strategy, OrbitConfig orbit_cfg,
                          SampleRequirements requirements);

}  // namespace smest::matching
