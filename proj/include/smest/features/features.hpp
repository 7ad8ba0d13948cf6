#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "smest/core/types.hpp"
#include "smest/features/matrix.hpp"
#include "smest/ingest/loaders.hpp"
#include "smest/ingest/patch.hpp"
#include "smest/matching/matching.hpp"

namespace smest::features {

using BandMeans = std::map<ingest::BandId, double>;

/// Central aggregation window side length (pixels); must be even and <= patch size.
inline constexpr int kDefaultBandWindow = 32;

/**
 * @brief Mean of each non-SCL band over the central window x window block.
 *
 * Non-finite pixels are ignored; a band whose central block is entirely
 * non-finite is absent from the result. Throws ValidationError when the
 * window is invalid or exceeds the patch size.
 */
BandMeans band_means(const ingest::Patch& patch, int window = kDefaultBandWindow);

/// NDVI/NDWI/NDMI in [-1,1] and MSI >= 0 when inputs are valid; absent on
/// missing bands or zero denominators.
struct SpectralIndices {
  std::optional<double> ndvi;
  std::optional<double> ndwi;
  std::optional<double> ndmi;
  std::optional<double> msi;
};

/// Index formulas from the band-ratio definitions; each index fails independently.
SpectralIndices spectral_indices(const BandMeans& means);

/// Backscatter in dB (converted after linear-power averaging) plus VH/VV ratio.
struct SarFeatures {
  std::optional<double> vv_db;
  std::optional<double> vh_db;
  std::optional<double> ratio;
};

/// All three features are absent unless both polarizations have positive mean power.
SarFeatures sar_features(const BandMeans& means);

struct Dynamics {
  double diff = 0.0;
  double rate = 0.0;
};

/// First-order difference and per-day rate; absent when either value is.
std::optional<Dynamics> temporal_dynamics(std::optional<double> curr, std::optional<double> prev,
                                          int gap_days);

/// Column names `{var}_lag{l}` for l = 0..lookback, lag-major (13 per lag).
std::vector<std::string> era5_lag_columns(int lookback_days);

/**
 * @brief Reanalysis values at target_date - l for l = 0..lookback.
 *
 * 13 x (lookback+1) entries; a missing (station, date) record leaves its 13
 * entries absent.
 */
std::vector<std::optional<double>> era5_lag_stack(const ingest::Era5Table& era5,
                                                  const std::string& station_id,
                                                  core::Date target_date, int lookback_days);

/**
 * @brief Which feature blocks the design matrix carries.
 *
 * ERA5 columns are always present. Raw S2 bands imply the spectral indices;
 * use_s2_indices requests the indices alone (embeddings runs that keep the
 * hand-crafted indices).
 */
struct FeatureSpec {
  bool use_s2 = false;
  bool use_s2_indices = false;
  bool use_s1 = false;
  bool use_embeddings = false;
  int era5_lookback = 20;
};

/// Full ordered column schema for a spec; assemble() emits exactly this.
std::vector<std::string> column_schema(const FeatureSpec& spec);

/**
 * @brief Memoizing provider of per-file band means.
 *
 * Each patch file is decoded at most once per store instance. Thread-safe.
 */
class PatchMeansStore {
 public:
  explicit PatchMeansStore(int window = kDefaultBandWindow) : window_(window) {}

  /// Band means for a patch file; loads and caches on first use.
  const BandMeans& means_for(const std::string& file) const;

  [[nodiscard]] int window() const { return window_; }

 private:
  int window_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::string, std::unique_ptr<BandMeans>> cache_;
};

struct AssembledData {
  FeatureMatrix matrix;
  std::vector<double> targets;
};

/**
 * @brief Builds the design matrix and target vector from matched samples.
 *
 * Column blocks, in order: S2 raw band means, spectral indices, S2 dynamics
 * (diff and rate per spectral feature), S1 features, S1 dynamics, the ERA5
 * lag stack, then embedding columns. Rows without a target measurement never
 * appear. Throws ConfigError when the spec requests embeddings but none are
 * supplied.
 */
AssembledData assemble(const std::vector<matching::MatchedSample>& samples,
                       const core::MeasurementTable& measurements, const FeatureSpec& spec,
                       const ingest::Era5Table& era5, const ingest::EmbeddingTable* embeddings,
                       const PatchMeansStore& patch_means);

}  // namespace smest::features
