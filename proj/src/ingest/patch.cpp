#include "smest/ingest/patch.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>

#include "smest/core/error.hpp"

namespace smest::ingest {

using core::ValidationError;

namespace {

constexpr char kMagic[4] = {'E', 'O', 'P', 'C'};
constexpr std::uint16_t kMinPatchSize = 16;

// Little-endian primitives; explicit so the format is byte-exact everywhere.
void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_i32(std::vector<std::uint8_t>& out, std::int32_t v) {
  const auto u = static_cast<std::uint32_t>(v);
  out.push_back(static_cast<std::uint8_t>(u & 0xFF));
  out.push_back(static_cast<std::uint8_t>((u >> 8) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((u >> 16) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((u >> 24) & 0xFF));
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
  std::uint32_t bits = 0;
  std::memcpy(&bits, &v, sizeof(bits));
  out.push_back(static_cast<std::uint8_t>(bits & 0xFF));
  out.push_back(static_cast<std::uint8_t>((bits >> 8) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((bits >> 16) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((bits >> 24) & 0xFF));
}

struct ByteReader {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;

  std::uint8_t u8() { return bytes[pos++]; }
  std::uint16_t u16() {
    const std::uint16_t v = static_cast<std::uint16_t>(bytes[pos]) |
                            static_cast<std::uint16_t>(bytes[pos + 1]) << 8;
    pos += 2;
    return v;
  }
  std::int32_t i32() {
    const std::uint32_t v = static_cast<std::uint32_t>(bytes[pos]) |
                            static_cast<std::uint32_t>(bytes[pos + 1]) << 8 |
                            static_cast<std::uint32_t>(bytes[pos + 2]) << 16 |
                            static_cast<std::uint32_t>(bytes[pos + 3]) << 24;
    pos += 4;
    return static_cast<std::int32_t>(v);
  }
  float f32() {
    std::uint32_t bits = static_cast<std::uint32_t>(bytes[pos]) |
                         static_cast<std::uint32_t>(bytes[pos + 1]) << 8 |
                         static_cast<std::uint32_t>(bytes[pos + 2]) << 16 |
                         static_cast<std::uint32_t>(bytes[pos + 3]) << 24;
    pos += 4;
    float v = 0.0f;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }
};

}  // namespace

const char* to_string(Sensor s) { return s == Sensor::kS2 ? "S2" : "S1"; }

const char* to_string(Orbit o) {
  switch (o) {
    case Orbit::kNone: return "NONE";
    case Orbit::kAsc: return "ASC";
    case Orbit::kDesc: return "DESC";
  }
  return "NONE";
}

std::optional<Sensor> sensor_from_string(const std::string& text) {
  if (text == "S2") return Sensor::kS2;
  if (text == "S1") return Sensor::kS1;
  return std::nullopt;
}

std::optional<Orbit> orbit_from_string(const std::string& text) {
  if (text == "NONE") return Orbit::kNone;
  if (text == "ASC") return Orbit::kAsc;
  if (text == "DESC") return Orbit::kDesc;
  return std::nullopt;
}

const char* to_string(BandId b) {
  switch (b) {
    case BandId::kB01: return "B01";
    case BandId::kB02: return "B02";
    case BandId::kB03: return "B03";
    case BandId::kB04: return "B04";
    case BandId::kB05: return "B05";
    case BandId::kB06: return "B06";
    case BandId::kB07: return "B07";
    case BandId::kB08: return "B08";
    case BandId::kB8A: return "B8A";
    case BandId::kB09: return "B09";
    case BandId::kB11: return "B11";
    case BandId::kB12: return "B12";
    case BandId::kSCL: return "SCL";
    case BandId::kVV: return "VV";
    case BandId::kVH: return "VH";
  }
  return "?";
}

bool is_optical(BandId b) {
  return b != BandId::kSCL && b != BandId::kVV && b != BandId::kVH;
}

bool band_allowed(Sensor sensor, BandId band) {
  if (sensor == Sensor::kS2) return band != BandId::kVV && band != BandId::kVH;
  return band == BandId::kVV || band == BandId::kVH;
}

std::span<const BandId> optical_bands() {
  static constexpr std::array<BandId, 12> kOptical = {
      BandId::kB01, BandId::kB02, BandId::kB03, BandId::kB04, BandId::kB05, BandId::kB06,
      BandId::kB07, BandId::kB08, BandId::kB8A, BandId::kB09, BandId::kB11, BandId::kB12,
  };
  return kOptical;
}

bool Patch::has_band(BandId b) const {
  return std::find(bands.begin(), bands.end(), b) != bands.end();
}

std::span<const float> Patch::band(BandId b) const {
  for (std::size_t i = 0; i < bands.size(); ++i) {
    if (bands[i] == b) {
      return std::span<const float>(pixels).subspan(i * pixels_per_band(), pixels_per_band());
    }
  }
  throw ValidationError(std::string("patch has no band ") + to_string(b));
}

std::span<float> Patch::band(BandId b) {
  for (std::size_t i = 0; i < bands.size(); ++i) {
    if (bands[i] == b) {
      return std::span<float>(pixels).subspan(i * pixels_per_band(), pixels_per_band());
    }
  }
  throw ValidationError(std::string("patch has no band ") + to_string(b));
}

void Patch::validate() const {
  if (rows != cols) {
    throw ValidationError("patch must be square, got " + std::to_string(rows) + "x" +
                          std::to_string(cols));
  }
  if (rows < kMinPatchSize) {
    throw ValidationError("patch size " + std::to_string(rows) + " below minimum " +
                          std::to_string(kMinPatchSize));
  }
  if (sensor == Sensor::kS2 && orbit != Orbit::kNone) {
    throw ValidationError("S2 patch must carry orbit NONE");
  }
  if (sensor == Sensor::kS1 && orbit == Orbit::kNone) {
    throw ValidationError("S1 patch must carry orbit ASC or DESC");
  }
  if (bands.empty()) throw ValidationError("patch declares no bands");
  for (std::size_t i = 0; i < bands.size(); ++i) {
    if (!band_allowed(sensor, bands[i])) {
      throw ValidationError(std::string("band ") + to_string(bands[i]) +
                            " not allowed on sensor " + to_string(sensor));
    }
    for (std::size_t j = i + 1; j < bands.size(); ++j) {
      if (bands[i] == bands[j]) {
        throw ValidationError(std::string("duplicate band ") + to_string(bands[i]));
      }
    }
  }
  if (pixels.size() != bands.size() * pixels_per_band()) {
    throw ValidationError("pixel buffer size " + std::to_string(pixels.size()) +
                          " does not match bands x rows x cols = " +
                          std::to_string(bands.size() * pixels_per_band()));
  }
}

std::vector<std::uint8_t> encode_patch(const Patch& patch) {
  patch.validate();
  std::vector<std::uint8_t> out;
  out.reserve(14 + patch.bands.size() + patch.pixels.size() * 4);
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u16(out, kPatchFormatVersion);
  out.push_back(static_cast<std::uint8_t>(patch.sensor));
  out.push_back(static_cast<std::uint8_t>(patch.orbit));
  put_i32(out, core::epoch_day(patch.date));
  put_u16(out, patch.rows);
  put_u16(out, patch.cols);
  out.push_back(static_cast<std::uint8_t>(patch.bands.size()));
  for (const BandId b : patch.bands) out.push_back(static_cast<std::uint8_t>(b));
  for (const float v : patch.pixels) put_f32(out, v);
  return out;
}

Patch decode_patch(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kFixedHeader = 4 + 2 + 1 + 1 + 4 + 2 + 2 + 1;  // up to band_count
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ValidationError("not a patch file (bad magic)");
  }
  if (bytes.size() < kFixedHeader) {
    throw ValidationError("truncated patch header: expected at least " +
                          std::to_string(kFixedHeader) + " bytes, got " +
                          std::to_string(bytes.size()));
  }
  ByteReader r{bytes, 4};
  const std::uint16_t version = r.u16();
  if (version != kPatchFormatVersion) {
    throw ValidationError("unsupported patch format version " + std::to_string(version));
  }
  const std::uint8_t sensor_code = r.u8();
  if (sensor_code != 1 && sensor_code != 2) {
    throw ValidationError("unknown sensor code " + std::to_string(sensor_code));
  }
  const std::uint8_t orbit_code = r.u8();
  if (orbit_code > 2) {
    throw ValidationError("unknown orbit code " + std::to_string(orbit_code));
  }

  Patch patch;
  patch.sensor = static_cast<Sensor>(sensor_code);
  patch.orbit = static_cast<Orbit>(orbit_code);
  patch.date = core::Date{r.i32()};
  patch.rows = r.u16();
  patch.cols = r.u16();
  const std::uint8_t band_count = r.u8();

  const std::size_t expected = kFixedHeader + band_count +
                               static_cast<std::size_t>(band_count) * patch.rows * patch.cols * 4;
  if (bytes.size() != expected) {
    throw ValidationError("patch payload size mismatch: expected " + std::to_string(expected) +
                          " bytes, got " + std::to_string(bytes.size()));
  }

  patch.bands.reserve(band_count);
  for (int i = 0; i < band_count; ++i) {
    const std::uint8_t code = r.u8();
    if (code < 1 || code > kMaxBandCode) {
      throw ValidationError("unknown band code " + std::to_string(code));
    }
    patch.bands.push_back(static_cast<BandId>(code));
  }
  patch.pixels.resize(static_cast<std::size_t>(band_count) * patch.pixels_per_band());
  for (float& v : patch.pixels) v = r.f32();

  patch.validate();
  return patch;
}

bool is_cloud_class(int scl_class) {
  return scl_class == 3 || scl_class == 8 || scl_class == 9 || scl_class == 10;
}

double cloud_fraction(const Patch& patch) {
  if (patch.sensor != Sensor::kS2) {
    throw ValidationError("cloud_fraction requires an S2 patch");
  }
  if (!patch.has_band(BandId::kSCL)) {
    throw ValidationError("cloud_fraction requires the SCL band");
  }
  const auto scl = patch.band(BandId::kSCL);
  std::size_t cloudy = 0;
  for (const float v : scl) {
    if (is_cloud_class(static_cast<int>(std::lround(v)))) ++cloudy;
  }
  return static_cast<double>(cloudy) / static_cast<double>(patch.pixels_per_band());
}

}  // namespace smest::ingest
