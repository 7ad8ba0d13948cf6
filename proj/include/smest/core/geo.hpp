#pragma once

namespace smest::core {

/// Mean Earth radius used for all great-circle arithmetic.
inline constexpr double kEarthRadiusKm = 6371.0;

/// WGS84 geographic coordinate in degrees.
struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

/**
 * @brief Great-circle (haversine) distance in kilometres.
 *
 * Symmetric and non-negative. Throws ValidationError naming the offending
 * field when a coordinate is outside [-90,90] x [-180,180].
 */
double haversine_km(LatLon a, LatLon b);

}  // namespace smest::core
