#include "smest/core/geo.hpp"

#include <cmath>
#include <string>

#include "smest/core/error.hpp"

namespace smest::core {

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

void check_coordinate(LatLon p, const char* which) {
  if (!(p.lat >= -90.0 && p.lat <= 90.0)) {
    throw ValidationError(std::string("coordinate ") + which + ".lat out of range [-90,90]: " +
                          std::to_string(p.lat));
  }
  if (!(p.lon >= -180.0 && p.lon <= 180.0)) {
    throw ValidationError(std::string("coordinate ") + which + ".lon out of range [-180,180]: " +
                          std::to_string(p.lon));
  }
}

}  // namespace

double haversine_km(LatLon a, LatLon b) {
  check_coordinate(a, "a");
  check_coordinate(b, "b");
  const double lat1 = a.lat * kDegToRad;
  const double lat2 = b.lat * kDegToRad;
  const double dlat = (b.lat - a.lat) * kDegToRad;
  const double dlon = (b.lon - a.lon) * kDegToRad;
  const double s1 = std::sin(dlat / 2.0);
  const double s2 = std::sin(dlon / 2.0);
  const double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

}  // namespace smest::core
