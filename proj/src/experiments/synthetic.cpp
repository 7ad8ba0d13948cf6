#include "smest/experiments/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "smest/core/error.hpp"
#include "smest/core/rng.hpp"
#include "smest/ingest/loaders.hpp"
#include "smest/ingest/patch.hpp"

namespace smest::experiments {

using core::ConfigError;
using core::Date;
using core::IoError;
using core::RngStream;
using ingest::BandId;
using ingest::Orbit;
using ingest::Patch;
using ingest::Sensor;

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
constexpr int kLeadInDays = 21;

// Stream kinds; combined with station/day/extra into a unique stream id.
enum StreamKind : std::uint64_t {
  kStationLatent = 1,
  kEra5Value = 2,
  kSmNoise = 3,
  kCloudDraw = 4,
  kOpticalScene = 5,
  kOpticalPixels = 6,
  kSarScene = 7,
  kSarPixels = 8,
  kEmbeddingMap = 9,
};

RngStream stream(std::uint64_t seed, StreamKind kind, int station, int day, int extra) {
  const std::uint64_t id = (static_cast<std::uint64_t>(kind) << 48) |
                           (static_cast<std::uint64_t>(station) << 32) |
                           (static_cast<std::uint64_t>(day + 1024) << 10) |
                           static_cast<std::uint64_t>(extra);
  return RngStream(seed, id);
}

/// Per-station latent parameters drawn once from the station stream.
struct StationLatent {
  double ndvi_phase = 0.0;
  double moisture_phase = 0.0;
  double sar_phase = 0.0;
};

StationLatent station_latent(std::uint64_t seed, int station) {
  RngStream rng = stream(seed, kStationLatent, station, 0, 0);
  StationLatent lat;
  lat.ndvi_phase = rng.next_double() * 365.0;
  lat.moisture_phase = rng.next_double() * 181.0;
  lat.sar_phase = rng.next_double() * 120.0;
  return lat;
}

double ndvi_true(const StationLatent& lat, int day) {
  return 0.45 + 0.25 * std::sin(kTwoPi * (day + lat.ndvi_phase) / 365.0);
}

double moisture_latent(const StationLatent& lat, int day) {
  return 0.5 + 0.3 * std::sin(kTwoPi * (day + lat.moisture_phase) / 181.0);
}

double sar_ratio_true(const StationLatent& lat, int day) {
  return 0.10 + 0.05 * std::sin(kTwoPi * (day + lat.sar_phase) / 240.0);
}

double sar_vv_true(const StationLatent& lat, int day) {
  return 0.045 + 0.015 * std::sin(kTwoPi * (day + lat.sar_phase) / 180.0 + 1.0);
}

/// Noiseless reflectance for each optical band, driven by the two latents.
double optical_base(BandId band, double ndvi, double moisture) {
  switch (band) {
    case BandId::kB01: return 0.05 + 0.02 * moisture;
    case BandId::kB02: return 0.07 + 0.02 * ndvi;
    case BandId::kB03: return 0.08 + 0.06 * moisture;
    case BandId::kB04: return 0.6 * (1.0 - ndvi) / 2.0;
    case BandId::kB05: return 0.15 + 0.08 * ndvi;
    case BandId::kB06: return 0.22 + 0.10 * ndvi;
    case BandId::kB07: return 0.26 + 0.10 * ndvi;
    case BandId::kB08: return 0.6 * (1.0 + ndvi) / 2.0;
    case BandId::kB8A: return 0.6 * (1.0 + ndvi) / 2.0 * 0.96;
    case BandId::kB09: return 0.09 + 0.03 * moisture;
    case BandId::kB11: return 0.30 - 0.10 * moisture;
    case BandId::kB12: return 0.20 - 0.06 * moisture;
    default: return 0.0;
  }
}

double clip01(double v) { return std::min(1.0, std::max(0.0, v)); }

std::string station_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "SYN%04d", i + 1);
  return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

void write_patch_file(const std::filesystem::path& path, const Patch& patch) {
  const auto bytes = ingest::encode_patch(patch);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

std::string fmt(double v, const char* spec = "%.7g") {
  char buf[40];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

}  // namespace

SynthSummary generate_synthetic(const SynthConfig& config,
                                const std::filesystem::path& out_dir) {
  if (config.stations < 1) throw ConfigError("synth: stations must be >= 1");
  if (config.days < 1) throw ConfigError("synth: days must be >= 1");
  if (config.true_lag < 0 || config.true_lag > 20) {
    throw ConfigError("synth: true_lag must be in [0,20], got " +
                      std::to_string(config.true_lag));
  }
  if (config.patch_size < 16) throw ConfigError("synth: patch_size must be >= 16");
  if (config.s2_revisit < 1 || config.s1_revisit < 1) {
    throw ConfigError("synth: revisit periods must be >= 1");
  }
  if (!(config.noise >= 0.0)) throw ConfigError("synth: noise must be >= 0");

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "'");

  const Date start = core::parse_date(config.start_date);
  const SynthTruth truth;
  const std::uint64_t seed = config.seed;
  const int n_px = config.patch_size * config.patch_size;

  // Noise scales relative to the single CLI noise level. SAR carries a
  // per-acquisition scene term (does not average out over the patch) and a
  // per-pixel speckle term; ascending orbit doubles both.
  const double opt_scene_sigma = 0.5 * config.noise;
  const double opt_pixel_sigma = 1.0 * config.noise;
  const double sar_scene_sigma = 4.0 * config.noise;
  const double sar_pixel_sigma = 6.0 * config.noise;

  SynthSummary summary;

  // --- stations.csv ------------------------------------------------------
  {
    std::string csv = "station_id,network,lat,lon,land_cover\n";
    static const char* kNetworks[4] = {"ALPHA", "BRAVO", "CHARLIE", "DELTA"};
    static const char* kCovers[4] = {"cropland", "grassland", "tree_cover", "sparse_vegetation"};
    for (int s = 0; s < config.stations; ++s) {
      RngStream rng = stream(seed, kStationLatent, s, 0, 1);
      const double lat = 40.0 + (s / 12) * 0.08 + (rng.next_double() - 0.5) * 0.02;
      const double lon = 2.0 + (s % 12) * 0.08 + (rng.next_double() - 0.5) * 0.02;
      csv += station_name(s) + "," + kNetworks[s % 4] + "," + fmt(lat, "%.6f") + "," +
             fmt(lon, "%.6f") + "," + kCovers[s % 4] + "\n";
    }
    write_text_file(out_dir / "stations.csv", csv);
    summary.stations = static_cast<std::size_t>(config.stations);
  }

  // --- era5.csv (with lead-in so lag stacks and the sm memory are covered) --
  // Precipitation follows a wet-spell process (AR(1) wetness with exponential
  // rain innovations): persistent enough that the lookback mean is learnable
  // from daily lag columns, with fresh innovation at every lag so the last
  // window day still carries signal of its own.
  std::vector<std::vector<double>> precip(
      static_cast<std::size_t>(config.stations),
      std::vector<double>(static_cast<std::size_t>(kLeadInDays + config.days), 0.0));
  for (int s = 0; s < config.stations; ++s) {
    const int burn_in = kLeadInDays + 12;
    double wet = stream(seed, kEra5Value, s, -burn_in - 1, 0).exponential(0.0023);
    for (int d = -burn_in; d < config.days; ++d) {
      RngStream rng = stream(seed, kEra5Value, s, d, 0);
      const bool rainy = rng.next_double() < 0.45;
      wet = 0.75 * wet + (rainy ? rng.exponential(0.0018) : 0.0);
      if (d >= -kLeadInDays) {
        precip[static_cast<std::size_t>(s)][static_cast<std::size_t>(d + kLeadInDays)] = wet;
      }
    }
  }
  {
    std::string csv = "station_id,date";
    for (const char* name : ingest::era5_variable_names()) csv += std::string(",") + name;
    csv += "\n";
    for (int s = 0; s < config.stations; ++s) {
      const StationLatent lat = station_latent(seed, s);
      for (int d = -kLeadInDays; d < config.days; ++d) {
        const auto draw = [&](int var) { return stream(seed, kEra5Value, s, d, var); };
        const double p = precip[static_cast<std::size_t>(s)][static_cast<std::size_t>(d + kLeadInDays)];
        const double temp_air = 283.0 + 12.0 * std::sin(kTwoPi * d / 365.25) +
                                draw(1).normal(0.0, 0.5);
        const double temp_skin = temp_air + 1.5 + draw(2).normal(0.0, 0.3);
        const double temp_soil = temp_air - 0.5 + draw(3).normal(0.0, 0.3);
        const double evap = -0.003 + 0.002 * std::sin(kTwoPi * d / 365.25) +
                            draw(4).normal(0.0, 0.0005);
        const double swv =
            clip01(0.25 + 0.10 * std::sin(kTwoPi * (d + lat.moisture_phase) / 90.0) +
                   draw(5).normal(0.0, 0.02));
        const double pressure = 101300.0 + 800.0 * std::sin(kTwoPi * d / 180.0) +
                                draw(6).normal(0.0, 50.0);
        const double dewpoint = temp_air - 5.0 + draw(7).normal(0.0, 0.5);
        const double lai =
            std::max(0.0, 1.5 + 1.2 * std::sin(kTwoPi * (d + lat.ndvi_phase) / 365.0) +
                              draw(8).normal(0.0, 0.05));
        const double solar = 1.2e7 * (1.0 + 0.5 * std::sin(kTwoPi * d / 365.25)) +
                             draw(9).normal(0.0, 1.0e5);
        const double thermal = 2.8e7 + 2.0e6 * std::sin(kTwoPi * d / 365.25) +
                               draw(10).normal(0.0, 1.0e5);
        const double wind_u = draw(11).normal(0.0, 2.0);
        const double wind_v = draw(12).normal(1.0, 2.0);

        csv += station_name(s) + "," + core::format_date(core::add_days(start, d));
        for (const double v : {p, temp_air, temp_skin, temp_soil, evap, swv, pressure, dewpoint,
                               lai, solar, thermal, wind_u, wind_v}) {
          csv += "," + fmt(v);
        }
        csv += "\n";
        ++summary.era5_rows;
      }
    }
    write_text_file(out_dir / "era5.csv", csv);
  }

  // --- measurements.csv ---------------------------------------------------
  {
    std::string csv = "station_id,date,sm\n";
    for (int s = 0; s < config.stations; ++s) {
      const StationLatent lat = station_latent(seed, s);
      for (int d = 0; d < config.days; ++d) {
        double precip_mean = 0.0;
        for (int l = 1; l <= config.true_lag; ++l) {
          precip_mean +=
              precip[static_cast<std::size_t>(s)][static_cast<std::size_t>(d - l + kLeadInDays)];
        }
        if (config.true_lag > 0) precip_mean /= config.true_lag;
        const double eps = stream(seed, kSmNoise, s, d, 0).normal(0.0, config.noise);
        const double sm = clip01(truth.a0 + truth.a1 * ndvi_true(lat, d) +
                                 truth.a2 * sar_ratio_true(lat, d) + truth.a3 * precip_mean + eps);
        csv += station_name(s) + "," + core::format_date(core::add_days(start, d)) + "," +
               fmt(sm, "%.6f") + "\n";
        ++summary.measurements;
      }
    }
    write_text_file(out_dir / "measurements.csv", csv);
  }

  // --- embedding scramble: 16 axis-aligned copies, then dense mixtures -----
  // e_j (j < 16) = c_j * g_perm[j] + d_j keeps the map trivially invertible;
  // the remaining rows are dense random combinations of all 16 features.
  std::vector<double> emb_scale(16), emb_offset(16);
  std::vector<int> emb_perm;
  std::vector<double> emb_mix((ingest::kEmbeddingDim - 16) * 16);
  {
    RngStream rng = stream(seed, kEmbeddingMap, 0, 0, 0);
    for (int i = 0; i < 16; ++i) {
      emb_scale[static_cast<std::size_t>(i)] = 0.5 + 1.5 * rng.next_double();
      emb_offset[static_cast<std::size_t>(i)] = rng.next_double() - 0.5;
    }
    emb_perm = rng.sample_without_replacement(16, 16);
    for (double& w : emb_mix) w = rng.normal(0.0, 0.25);
  }

  const auto embed = [&](const std::array<double, 16>& g) {
    std::vector<double> e(ingest::kEmbeddingDim, 0.0);
    for (std::size_t j = 0; j < 16; ++j) {
      e[j] = emb_scale[j] * g[static_cast<std::size_t>(emb_perm[j])] + emb_offset[j];
    }
    for (std::size_t j = 16; j < ingest::kEmbeddingDim; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < 16; ++k) acc += emb_mix[(j - 16) * 16 + k] * g[k];
      e[j] = acc;
    }
    return e;
  };

  // --- patches + embeddings ------------------------------------------------
  std::string emb_csv = "station_id,date";
  {
    char name[8];
    for (std::size_t i = 0; i < ingest::kEmbeddingDim; ++i) {
      std::snprintf(name, sizeof(name), ",e%03zu", i);
      emb_csv += name;
    }
    emb_csv += "\n";
  }

  const auto optical = ingest::optical_bands();
  for (int s = 0; s < config.stations; ++s) {
    const StationLatent lat = station_latent(seed, s);
    const std::filesystem::path s2_dir = out_dir / "patches" / station_name(s) / "S2";
    const std::filesystem::path s1_dir = out_dir / "patches" / station_name(s) / "S1";
    std::filesystem::create_directories(s2_dir, ec);
    std::filesystem::create_directories(s1_dir, ec);
    if (ec) throw IoError("cannot create patch directories under '" + out_dir.string() + "'");

    // Sentinel-2: optical bands + SCL every s2_revisit days.
    for (int d = s % config.s2_revisit; d < config.days; d += config.s2_revisit) {
      const double ndvi = ndvi_true(lat, d);
      const double moisture = moisture_latent(lat, d);
      const bool cloudy = stream(seed, kCloudDraw, s, d, 0).next_double() < config.cloud_prob;

      Patch patch;
      patch.sensor = Sensor::kS2;
      patch.orbit = Orbit::kNone;
      patch.date = core::add_days(start, d);
      patch.rows = patch.cols = static_cast<std::uint16_t>(config.patch_size);
      patch.bands.assign(optical.begin(), optical.end());
      patch.bands.push_back(BandId::kSCL);
      patch.pixels.resize(patch.bands.size() * static_cast<std::size_t>(n_px));

      std::array<double, 16> g{};
      for (std::size_t b = 0; b < optical.size(); ++b) {
        const double base = optical_base(optical[b], ndvi, moisture);
        const double scene =
            stream(seed, kOpticalScene, s, d, static_cast<int>(b)).normal(0.0, opt_scene_sigma);
        const double mean = clip01(base + scene);
        g[b] = mean;
        RngStream px = stream(seed, kOpticalPixels, s, d, static_cast<int>(b));
        auto band = patch.band(optical[b]);
        for (int i = 0; i < n_px; ++i) {
          band[static_cast<std::size_t>(i)] =
              static_cast<float>(clip01(mean + px.normal(0.0, opt_pixel_sigma)));
        }
      }
      // Indices of the scene-level means; the embedding sees what band_means recovers.
      const double b3 = g[2], b4 = g[3], b8 = g[7], b8a = g[8], b11 = g[10];
      g[12] = (b8 + b4) > 0.0 ? (b8 - b4) / (b8 + b4) : 0.0;
      g[13] = (b3 + b8) > 0.0 ? (b3 - b8) / (b3 + b8) : 0.0;
      g[14] = (b8 + b11) > 0.0 ? (b8 - b11) / (b8 + b11) : 0.0;
      g[15] = b8a > 0.0 ? b11 / b8a : 0.0;

      auto scl = patch.band(BandId::kSCL);
      std::fill(scl.begin(), scl.end(), 4.0f);  // vegetation
      if (cloudy) {
        RngStream rng = stream(seed, kCloudDraw, s, d, 1);
        const double frac = 0.25 + 0.35 * rng.next_double();
        const int n_cloud = static_cast<int>(std::lround(frac * n_px));
        for (int i = 0; i < n_cloud; ++i) scl[static_cast<std::size_t>(i)] = 9.0f;
      }

      write_patch_file(s2_dir / (core::format_date(patch.date) + "_NONE.eopc"), patch);
      ++summary.s2_patches;

      const std::vector<double> e = embed(g);
      emb_csv += station_name(s) + "," + core::format_date(patch.date);
      for (const double v : e) emb_csv += "," + fmt(v, "%.6g");
      emb_csv += "\n";
      ++summary.embedding_rows;
    }

    // Sentinel-1: both orbits observe the same latent truth; ascending is noisier.
    for (const Orbit orbit : {Orbit::kDesc, Orbit::kAsc}) {
      const double k_orbit = orbit == Orbit::kAsc ? 2.0 : 1.0;
      const int offset = orbit == Orbit::kDesc ? (s * 2) % config.s1_revisit
                                               : (s * 2 + 3) % config.s1_revisit;
      for (int d = offset; d < config.days; d += config.s1_revisit) {
        const double vv_true = sar_vv_true(lat, d);
        const double vh_true = vv_true * sar_ratio_true(lat, d);

        Patch patch;
        patch.sensor = Sensor::kS1;
        patch.orbit = orbit;
        patch.date = core::add_days(start, d);
        patch.rows = patch.cols = static_cast<std::uint16_t>(config.patch_size);
        patch.bands = {BandId::kVV, BandId::kVH};
        patch.pixels.resize(2 * static_cast<std::size_t>(n_px));

        const int orbit_tag = orbit == Orbit::kAsc ? 16 : 0;
        const double bases[2] = {vv_true, vh_true};
        const BandId band_ids[2] = {BandId::kVV, BandId::kVH};
        for (int b = 0; b < 2; ++b) {
          const double scene = bases[b] * std::exp(stream(seed, kSarScene, s, d, orbit_tag + b)
                                                       .normal(0.0, sar_scene_sigma * k_orbit));
          RngStream px = stream(seed, kSarPixels, s, d, orbit_tag + b);
          auto band = patch.band(band_ids[b]);
          for (int i = 0; i < n_px; ++i) {
            band[static_cast<std::size_t>(i)] =
                static_cast<float>(scene * std::exp(px.normal(0.0, sar_pixel_sigma * k_orbit)));
          }
        }
        write_patch_file(
            s1_dir / (core::format_date(patch.date) + "_" + to_string(orbit) + ".eopc"), patch);
        ++summary.s1_patches;
      }
    }
  }
  write_text_file(out_dir / "embeddings.csv", emb_csv);

  // --- manifest -------------------------------------------------------------
  {
    nlohmann::json manifest;
    manifest["format_version"] = 1;
    manifest["seed"] = config.seed;
    manifest["stations"] = config.stations;
    manifest["start_date"] = config.start_date;
    manifest["days"] = config.days;
    manifest["s2_revisit"] = config.s2_revisit;
    manifest["s1_revisit"] = config.s1_revisit;
    manifest["patch_size"] = config.patch_size;
    manifest["cloud_prob"] = config.cloud_prob;
    manifest["noise_sigma"] = config.noise;
    manifest["true_lag"] = config.true_lag;
    manifest["coefficients"] = {{"a0", truth.a0}, {"a1", truth.a1}, {"a2", truth.a2},
                                {"a3", truth.a3}};
    manifest["asc_to_desc_noise_ratio"] = 2.0;
    write_text_file(out_dir / "synth_manifest.json", manifest.dump(2) + "\n");
  }

  return summary;
}

}  // namespace smest::experiments
