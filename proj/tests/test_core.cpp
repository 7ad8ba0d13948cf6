#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "smest/core/date.hpp"
#include "smest/core/error.hpp"
#include "smest/core/geo.hpp"
#include "smest/core/rng.hpp"
#include "smest/core/types.hpp"

using namespace smest;

namespace {

// Independent check for haversine: spherical law of cosines.
double law_of_cosines_km(core::LatLon a, core::LatLon b) {
  const double rad = 3.14159265358979323846 / 180.0;
  const double c = std::sin(a.lat * rad) * std::sin(b.lat * rad) +
                   std::cos(a.lat * rad) * std::cos(b.lat * rad) *
                       std::cos((b.lon - a.lon) * rad);
  return core::kEarthRadiusKm * std::acos(std::min(1.0, std::max(-1.0, c)));
}

}  // namespace

TEST_CASE("haversine identity and antipodal cases") {
  CHECK(core::haversine_km({48.0, 2.0}, {48.0, 2.0}) == doctest::Approx(0.0).epsilon(1e-12));
  const double half_circumference = 6371.0 * 3.14159265358979323846;
  CHECK(core::haversine_km({0.0, 0.0}, {0.0, 180.0}) ==
        doctest::Approx(half_circumference).epsilon(1e-12));
}

TEST_CASE("haversine 1 km latitude step agrees with law of cosines") {
  const core::LatLon a{48.0, 2.0};
  const core::LatLon b{48.009, 2.0};
  // acos() near 1 limits the law-of-cosines reference to ~1e-8 km here.
  const double expected = law_of_cosines_km(a, b);
  CHECK(core::haversine_km(a, b) == doctest::Approx(expected).epsilon(1e-6));
  CHECK(core::haversine_km(a, b) == doctest::Approx(1.0006).epsilon(1e-3));
}

TEST_CASE("haversine rejects out-of-range coordinates naming the field") {
  CHECK_THROWS_WITH_AS(core::haversine_km({91.0, 0.0}, {0.0, 0.0}),
                       doctest::Contains("a.lat"), core::ValidationError);
  CHECK_THROWS_WITH_AS(core::haversine_km({0.0, 0.0}, {0.0, -181.0}),
                       doctest::Contains("b.lon"), core::ValidationError);
}

TEST_CASE("haversine symmetry and triangle inequality over random coordinates") {
  core::RngStream rng(7, 1);
  for (int i = 0; i < 500; ++i) {
    const core::LatLon a{rng.next_double() * 180.0 - 90.0, rng.next_double() * 360.0 - 180.0};
    const core::LatLon b{rng.next_double() * 180.0 - 90.0, rng.next_double() * 360.0 - 180.0};
    const core::LatLon c{rng.next_double() * 180.0 - 90.0, rng.next_double() * 360.0 - 180.0};
    const double ab = core::haversine_km(a, b);
    const double ba = core::haversine_km(b, a);
    CHECK(ab == ba);
    CHECK(ab >= 0.0);
    CHECK(ab <= core::haversine_km(a, c) + core::haversine_km(c, b) + 1e-9);
  }
}

TEST_CASE("epoch_day anchors") {
  CHECK(core::epoch_day(core::parse_date("1970-01-01")) == 0);
  CHECK(core::epoch_day(core::parse_date("1970-01-02")) == 1);
  // 49 years of 365 days plus the 12 leap days 1972..2016.
  CHECK(core::epoch_day(core::parse_date("2019-01-01")) == 49 * 365 + 12);
  CHECK(core::epoch_day(core::parse_date("2019-01-01")) == 17897);
}

TEST_CASE("date round-trip is a bijection over a contiguous range") {
  const std::int32_t start = core::parse_date("1969-05-01").days;
  const std::int32_t end = core::parse_date("2101-03-01").days;
  std::int32_t previous = start - 1;
  for (std::int32_t d = start; d <= end; d += 97) {
    const core::Date date{d};
    const core::Date back = core::parse_date(core::format_date(date));
    CHECK(back.days == d);
    CHECK(d > previous);
    previous = d;
  }
}

TEST_CASE("date parsing is strict") {
  CHECK_THROWS_AS(core::parse_date("2019-13-01"), core::ValidationError);
  CHECK_THROWS_AS(core::parse_date("2019-02-29"), core::ValidationError);
  CHECK_THROWS_AS(core::parse_date("2019/01/01"), core::ValidationError);
  CHECK_THROWS_AS(core::parse_date("not-a-date"), core::ValidationError);
  CHECK_THROWS_WITH_AS(core::parse_date("2019-1-1"), doctest::Contains("2019-1-1"),
                       core::ValidationError);
  CHECK(core::parse_date("2020-02-29").days == core::parse_date("2020-02-28").days + 1);
}

TEST_CASE("equal rng streams agree on the first 10000 draws") {
  core::RngStream a(123456789, 42);
  core::RngStream b(123456789, 42);
  for (int i = 0; i < 10000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct stream ids decorrelate") {
  core::RngStream a(1, 0);
  core::RngStream b(1, 1);
  int equal = 0;
  for (int i = 0; i < 1000; ++i) {
    if (a.next_u64() == b.next_u64()) ++equal;
  }
  CHECK(equal == 0);
}

TEST_CASE("uniform draws are in range and shuffles are deterministic") {
  core::RngStream rng(9, 9);
  for (int i = 0; i < 1000; ++i) CHECK(rng.uniform(7) < 7);

  std::vector<int> v1{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<int> v2 = v1;
  core::RngStream s1(5, 5);
  core::RngStream s2(5, 5);
  s1.shuffle(v1);
  s2.shuffle(v2);
  CHECK(v1 == v2);

  core::RngStream s3(5, 6);
  auto sample = s3.sample_without_replacement(10, 4);
  CHECK(sample.size() == 4);
  CHECK(std::set<int>(sample.begin(), sample.end()).size() == 4);
  for (const int x : sample) {
    CHECK(x >= 0);
    CHECK(x < 10);
  }
}

TEST_CASE("normal and exponential draws are sane") {
  core::RngStream rng(2024, 0);
  double sum = 0.0;
  double sum_sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum_sq += x * x;
  }
  CHECK(sum / n == doctest::Approx(0.0).epsilon(0.05));
  CHECK(sum_sq / n == doctest::Approx(1.0).epsilon(0.05));

  double esum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.exponential(0.004);
    CHECK(x >= 0.0);
    esum += x;
  }
  CHECK(esum / n == doctest::Approx(0.004).epsilon(0.05));
}

TEST_CASE("station table enforces invariants") {
  core::StationTable table;
  table.add({"A", "NET", 40.0, 2.0, core::LandCover::kCropland});
  CHECK_THROWS_AS(table.add({"A", "NET", 41.0, 2.0, core::LandCover::kCropland}),
                  core::ValidationError);
  CHECK_THROWS_AS(table.add({"", "NET", 41.0, 2.0, core::LandCover::kCropland}),
                  core::ValidationError);
  CHECK_THROWS_AS(table.add({"B", "NET", 95.0, 2.0, core::LandCover::kCropland}),
                  core::ValidationError);
  CHECK(table.size() == 1);
  CHECK(table.find("A") != nullptr);
  CHECK(table.find("B") == nullptr);
}

TEST_CASE("measurement table enforces range and uniqueness") {
  core::MeasurementTable table;
  table.add({"A", core::parse_date("2021-05-01"), 0.29});
  CHECK_THROWS_AS(table.add({"A", core::parse_date("2021-05-01"), 0.3}),
                  core::ValidationError);
  CHECK_THROWS_AS(table.add({"A", core::parse_date("2021-05-02"), 1.2}),
                  core::ValidationError);
  CHECK(table.count_for("A") == 1);
  CHECK(table.find("A", core::parse_date("2021-05-01"))->sm == doctest::Approx(0.29));
}
