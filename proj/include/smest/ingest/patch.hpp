#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smest/core/date.hpp"

namespace smest::ingest {

enum class Sensor : std::uint8_t { kS2 = 1, kS1 = 2 };
enum class Orbit : std::uint8_t { kNone = 0, kAsc = 1, kDesc = 2 };

const char* to_string(Sensor s);
const char* to_string(Orbit o);
std::optional<Sensor> sensor_from_string(const std::string& text);
std::optional<Orbit> orbit_from_string(const std::string& text);

/**
 * @brief Band identifiers; the numeric values are the on-disk codes.
 */
enum class BandId : std::uint8_t {
  kB01 = 1,
  kB02 = 2,
  kB03 = 3,
  kB04 = 4,
  kB05 = 5,
  kB06 = 6,
  kB07 = 7,
  kB08 = 8,
  kB8A = 9,
  kB09 = 10,
  kB11 = 11,
  kB12 = 12,
  kSCL = 13,
  kVV = 14,
  kVH = 15,
};

inline constexpr std::uint8_t kMaxBandCode = 15;

const char* to_string(BandId b);

/// True for the 12 optical reflectance bands (SCL excluded).
bool is_optical(BandId b);

/// Band/sensor compatibility: S2 carries optical bands + SCL, S1 carries VV/VH.
bool band_allowed(Sensor sensor, BandId band);

/// The 12 optical bands in code order; the raw-band feature block follows this order.
std::span<const BandId> optical_bands();

/**
 * @brief Decoded multiband square image patch.
 *
 * Pixels are band-major, row-major within a band: reflectance in [0,1] for S2
 * optical bands, linear backscatter power for S1, class codes 0-11 for SCL.
 */
struct Patch {
  Sensor sensor = Sensor::kS2;
  Orbit orbit = Orbit::kNone;
  core::Date date;
  std::uint16_t rows = 0;
  std::uint16_t cols = 0;
  std::vector<BandId> bands;
  std::vector<float> pixels;

  [[nodiscard]] bool has_band(BandId b) const;
  /// Pixel view for one band; throws ValidationError if the band is absent.
  [[nodiscard]] std::span<const float> band(BandId b) const;
  [[nodiscard]] std::span<float> band(BandId b);
  [[nodiscard]] std::size_t pixels_per_band() const {
    return static_cast<std::size_t>(rows) * cols;
  }

  /// Enforces all structural invariants; throws ValidationError on violation.
  void validate() const;
};

inline constexpr std::uint16_t kPatchFormatVersion = 1;

/// Serializes a validated patch to the EOPC byte layout (little-endian).
std::vector<std::uint8_t> encode_patch(const Patch& patch);

/// Parses and validates an EOPC byte stream. Throws ValidationError with
/// expected/actual byte counts on truncation.
Patch decode_patch(std::span<const std::uint8_t> bytes);

/// SCL classes screened as cloud: shadow (3), cloud medium/high probability (8, 9), thin cirrus (10).
bool is_cloud_class(int scl_class);

/**
 * @brief Fraction of SCL pixels in a cloud class, over all rows x cols pixels.
 *
 * Requires an S2 patch with an SCL band; throws ValidationError otherwise.
 */
double cloud_fraction(const Patch& patch);

/// Acquisitions with cloud_fraction strictly above this are excluded from matching.
inline constexpr double kMaxCloudFraction = 0.20;

}  // namespace smest::ingest
