#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "smest/core/rng.hpp"
#include "smest/matching/matching.hpp"

using namespace smest;
using ingest::AcquisitionEntry;
using ingest::AcquisitionIndex;
using ingest::AcquisitionKey;
using ingest::Orbit;
using ingest::Sensor;
using matching::CandidatePool;
using matching::MatchStrategy;
using matching::OrbitConfig;
using matching::PoolEntry;

namespace {

core::Date day(int d) { return core::Date{d}; }

void add_s1(AcquisitionIndex& index, const std::string& station, Orbit orbit, int d) {
  index.add({station, Sensor::kS1, orbit, day(d)},
            {"s1_" + std::string(to_string(orbit)) + "_" + std::to_string(d), std::nullopt});
}

void add_s2(AcquisitionIndex& index, const std::string& station, int d, double cloud) {
  index.add({station, Sensor::kS2, Orbit::kNone, day(d)},
            {"s2_" + std::to_string(d), cloud});
}

CandidatePool pool_of(std::initializer_list<int> dates) {
  CandidatePool pool;
  for (const int d : dates) pool.push_back({day(d), Orbit::kDesc, "f" + std::to_string(d)});
  std::sort(pool.begin(), pool.end(),
            [](const PoolEntry& a, const PoolEntry& b) { return a.date < b.date; });
  return pool;
}

}  // namespace

TEST_CASE("candidate_pool filters orbits") {
  AcquisitionIndex index;
  add_s1(index, "A", Orbit::kAsc, 1);
  add_s1(index, "A", Orbit::kDesc, 2);
  const auto desc = matching::candidate_pool(index, "A", Sensor::kS1, OrbitConfig::kDesc);
  REQUIRE(desc.size() == 1);
  CHECK(desc[0].date == day(2));
  const auto both = matching::candidate_pool(index, "A", Sensor::kS1, OrbitConfig::kBoth);
  REQUIRE(both.size() == 2);
  CHECK(both[0].date == day(1));
  CHECK(both[1].date == day(2));
}

TEST_CASE("candidate_pool applies the cloud screen to S2") {
  AcquisitionIndex index;
  add_s2(index, "A", 1, 0.1);
  add_s2(index, "A", 2, 0.25);
  add_s2(index, "A", 3, 0.20);  // inclusive at exactly 0.20
  const auto pool = matching::candidate_pool(index, "A", Sensor::kS2, OrbitConfig::kBoth);
  REQUIRE(pool.size() == 2);
  CHECK(pool[0].date == day(1));
  CHECK(pool[1].date == day(3));
}

TEST_CASE("candidate_pool orders DESC before ASC at equal dates") {
  AcquisitionIndex index;
  add_s1(index, "A", Orbit::kAsc, 5);
  add_s1(index, "A", Orbit::kDesc, 5);
  const auto pool = matching::candidate_pool(index, "A", Sensor::kS1, OrbitConfig::kBoth);
  REQUIRE(pool.size() == 2);
  CHECK(pool[0].orbit == Orbit::kDesc);
  CHECK(pool[1].orbit == Orbit::kAsc);
}

TEST_CASE("match_one closest prefers the smaller gap") {
  const auto pool = pool_of({97, 102});  // target 100: d-3 vs d+2
  const auto match = matching::match_one(pool, day(100), MatchStrategy::closest(10));
  REQUIRE(match.has_value());
  CHECK(match->date == day(102));
}

TEST_CASE("match_one breaks equidistant ties toward the past") {
  const auto pool = pool_of({97, 103});
  const auto match = matching::match_one(pool, day(100), MatchStrategy::closest(10));
  REQUIRE(match.has_value());
  CHECK(match->date == day(97));
}

TEST_CASE("match_one respects the window") {
  const auto pool = pool_of({89});  // d-11
  CHECK(!matching::match_one(pool, day(100), MatchStrategy::closest(10)).has_value());
}

TEST_CASE("current-day matching needs an exact date") {
  const auto pool = pool_of({99, 100, 105});
  const auto hit = matching::match_one(pool, day(100), MatchStrategy::current_day());
  REQUIRE(hit.has_value());
  CHECK(hit->date == day(100));
  CHECK(!matching::match_one(pool, day(101), MatchStrategy::current_day()).has_value());
}

TEST_CASE("closest with window 0 equals current-day on random pools") {
  core::RngStream rng(11, 0);
  for (int trial = 0; trial < 200; ++trial) {
    CandidatePool pool;
    const int n = 1 + static_cast<int>(rng.uniform(8));
    for (int i = 0; i < n; ++i) {
      pool.push_back({day(static_cast<int>(rng.uniform(20))), Orbit::kDesc, "f"});
    }
    std::sort(pool.begin(), pool.end(),
              [](const PoolEntry& a, const PoolEntry& b) { return a.date < b.date; });
    const core::Date target = day(static_cast<int>(rng.uniform(20)));
    const auto a = matching::match_one(pool, target, MatchStrategy::closest(0));
    const auto b = matching::match_one(pool, target, MatchStrategy::current_day());
    CHECK(a.has_value() == b.has_value());
    if (a && b) CHECK(a->date == b->date);
  }
}

TEST_CASE("match_one is invariant under entry duplication") {
  const auto pool = pool_of({97, 103});
  auto doubled = pool;
  doubled.insert(doubled.end(), pool.begin(), pool.end());
  std::sort(doubled.begin(), doubled.end(),
            [](const PoolEntry& a, const PoolEntry& b) { return a.date < b.date; });
  const auto a = matching::match_one(pool, day(100), MatchStrategy::closest(10));
  const auto b = matching::match_one(doubled, day(100), MatchStrategy::closest(10));
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  CHECK(a->date == b->date);
}

TEST_CASE("previous_match picks the latest prior acquisition within the gap") {
  const auto pool = pool_of({60, 95, 100});
  const auto prev = matching::previous_match(pool, day(100), 30);
  REQUIRE(prev.has_value());
  CHECK(prev->date == day(95));
}

TEST_CASE("previous_match enforces the gap bound and strictness") {
  CHECK(!matching::previous_match(pool_of({60, 100}), day(100), 30).has_value());
  CHECK(!matching::previous_match(pool_of({100}), day(100), 30).has_value());
}

TEST_CASE("build_samples composes the two matchers") {
  AcquisitionIndex index;
  add_s2(index, "A", 100, 0.0);
  add_s1(index, "A", Orbit::kDesc, 104);
  core::MeasurementTable meas;
  meas.add({"A", day(100), 0.25});

  const auto result = matching::build_samples(meas, index, MatchStrategy::current_day(),
                                              MatchStrategy::closest(10), OrbitConfig::kDesc,
                                              {true, true});
  REQUIRE(result.samples.size() == 1);
  const auto& sample = result.samples[0];
  CHECK(sample.s2->date == day(100));
  CHECK(sample.s1->date == day(104));
  CHECK(!sample.s2_prev.has_value());
}

TEST_CASE("build_samples drops rows missing a required modality") {
  AcquisitionIndex index;
  add_s1(index, "A", Orbit::kDesc, 104);
  core::MeasurementTable meas;
  meas.add({"A", day(100), 0.25});

  const auto both = matching::build_samples(meas, index, MatchStrategy::current_day(),
                                            MatchStrategy::closest(10), OrbitConfig::kDesc,
                                            {true, true});
  CHECK(both.samples.empty());
  CHECK(both.dropped_missing_s2 == 1);

  const auto s1_only = matching::build_samples(meas, index, MatchStrategy::current_day(),
                                               MatchStrategy::closest(10), OrbitConfig::kDesc,
                                               {false, true});
  CHECK(s1_only.samples.size() == 1);
  CHECK(!s1_only.samples[0].s2.has_value());
}

TEST_CASE("emitted samples satisfy the window invariants") {
  AcquisitionIndex index;
  core::MeasurementTable meas;
  core::RngStream rng(3, 3);
  for (int d = 0; d < 120; d += 5) add_s2(index, "A", d, rng.next_double() * 0.4);
  for (int d = 2; d < 120; d += 7) add_s1(index, "A", Orbit::kDesc, d);
  for (int d = 0; d < 120; ++d) meas.add({"A", day(d), 0.2});

  const auto result = matching::build_samples(meas, index, MatchStrategy::closest(10),
                                              MatchStrategy::closest(10), OrbitConfig::kDesc,
                                              {true, true});
  CHECK(!result.samples.empty());
  for (const auto& s : result.samples) {
    CHECK(std::abs(core::days_between(s.target_date, s.s2->date)) <= 10);
    CHECK(std::abs(core::days_between(s.target_date, s.s1->date)) <= 10);
    if (s.s2_prev) {
      CHECK(s.s2_prev->date < s.s2->date);
      CHECK(core::days_between(s.s2_prev->date, s.s2->date) <= 30);
    }
    if (s.s1_prev) {
      CHECK(s.s1_prev->date < s.s1->date);
      CHECK(core::days_between(s.s1_prev->date, s.s1->date) <= 30);
    }
  }
}
