#include "smest/matching/matching.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>

#include "smest/ingest/patch.hpp"

namespace smest::matching {

using ingest::Orbit;
using ingest::Sensor;

namespace {

// DESC sorts ahead of ASC at equal dates; NONE (S2) is unaffected.
int orbit_rank(Orbit o) { return o == Orbit::kAsc ? 1 : 0; }

bool wants_orbit(OrbitConfig cfg, Orbit o) {
  switch (cfg) {
    case OrbitConfig::kAsc: return o == Orbit::kAsc;
    case OrbitConfig::kDesc: return o == Orbit::kDesc;
    case OrbitConfig::kBoth: return o == Orbit::kAsc || o == Orbit::kDesc;
  }
  return false;
}

}  // namespace

const char* to_string(OrbitConfig cfg) {
  switch (cfg) {
    case OrbitConfig::kAsc: return "ASC";
    case OrbitConfig::kDesc: return "DESC";
    case OrbitConfig::kBoth: return "BOTH";
  }
  return "?";
}

CandidatePool candidate_pool(const ingest::AcquisitionIndex& index, const std::string& station_id,
                             Sensor sensor, OrbitConfig orbit_cfg) {
  CandidatePool pool;
  for (const auto& [key, entry] : index.entries()) {
    if (key.station_id != station_id || key.sensor != sensor) continue;
    if (sensor == Sensor::kS2) {
      if (entry.cloud_fraction.value_or(1.0) > ingest::kMaxCloudFraction) continue;
    } else {
      if (!wants_orbit(orbit_cfg, key.orbit)) continue;
    }
    pool.push_back({key.date, key.orbit, entry.file});
  }
  std::sort(pool.begin(), pool.end(), [](const PoolEntry& a, const PoolEntry& b) {
    if (a.date != b.date) return a.date < b.date;
    return orbit_rank(a.orbit) < orbit_rank(b.orbit);
  });
  return pool;
}

std::optional<PoolEntry> match_one(const CandidatePool& pool, core::Date target_date,
                                   const MatchStrategy& strategy) {
  const int window =
      strategy.kind == MatchStrategy::Kind::kCurrentDay ? 0 : strategy.window_days;
  const PoolEntry* best = nullptr;
  int best_abs = 0;
  int best_future = 0;
  for (const auto& entry : pool) {
    const int delta = core::days_between(target_date, entry.date);
    const int abs_delta = std::abs(delta);
    if (abs_delta > window) continue;
    const int future = delta > 0 ? 1 : 0;
    // Lexicographic preference: smaller |delta|, then past, then pool order
    // (which already puts DESC before ASC at equal dates).
    if (best == nullptr || abs_delta < best_abs ||
        (abs_delta == best_abs && future < best_future)) {
      best = &entry;
      best_abs = abs_delta;
      best_future = future;
    }
  }
  if (best == nullptr) return std::nullopt;
  return *best;
}

std::optional<PoolEntry> previous_match(const CandidatePool& pool, core::Date main_date,
                                        int max_gap_days) {
  const PoolEntry* best = nullptr;
  for (const auto& entry : pool) {
    if (entry.date >= main_date) break;
    if (core::days_between(entry.date, main_date) > max_gap_days) continue;
    // Keep the first pool entry of the latest admissible date (DESC over ASC).
    if (best == nullptr || entry.date > best->date) best = &entry;
  }
  if (best == nullptr) return std::nullopt;
  return *best;
}

BuildResult build_samples(const core::MeasurementTable& measurements,
                          const ingest::AcquisitionIndex& index, const MatchStrategy& s2_strategy,
                          const MatchStrategy& s1_strategy, OrbitConfig orbit_cfg,
                          SampleRequirements requirements) {
  BuildResult result;
  std::map<std::string, CandidatePool> s2_pools;
  std::map<std::string, CandidatePool> s1_pools;

  const auto pool_for = [&](std::map<std::string, CandidatePool>& pools, Sensor sensor,
                            const std::string& station) -> const CandidatePool& {
    auto it = pools.find(station);
    if (it == pools.end()) {
      it = pools.emplace(station, candidate_pool(index, station, sensor, orbit_cfg)).first;
    }
    return it->second;
  };

  for (const auto& m : measurements.rows()) {
    MatchedSample sample;
    sample.station_id = m.station_id;
    sample.target_date = m.date;

    if (requirements.need_s2) {
      const auto& pool = pool_for(s2_pools, Sensor::kS2, m.station_id);
      sample.s2 = match_one(pool, m.date, s2_strategy);
      if (!sample.s2) {
        ++result.dropped_missing_s2;
        continue;
      }
      sample.s2_prev = previous_match(pool, sample.s2->date, kPreviousMatchMaxGapDays);
    }
    if (requirements.need_s1) {
      const auto& pool = pool_for(s1_pools, Sensor::kS1, m.station_id);
      sample.s1 = match_one(pool, m.date, s1_strategy);
      if (!sample.s1) {
        ++result.dropped_missing_s1;
        continue;
      }
      sample.s1_prev = previous_match(pool, sample.s1->date, kPreviousMatchMaxGapDays);
    }
    result.samples.push_back(std::move(sample));
  }
  return result;
}

}  // namespace smest::matching
