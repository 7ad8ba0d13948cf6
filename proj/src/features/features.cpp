#include "smest/features/features.hpp"

#include <cmath>
#include <cstdio>

#include "smest/core/error.hpp"
#include "smest/ingest/acquisitions.hpp"

namespace smest::features {

using core::ConfigError;
using core::ValidationError;
using ingest::BandId;

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

double opt_value(std::optional<double> v) { return v ? *v : kMissing; }

std::optional<double> band_value(const BandMeans& means, BandId b) {
  const auto it = means.find(b);
  if (it == means.end()) return std::nullopt;
  return it->second;
}

std::optional<double> normalized_difference(std::optional<double> a, std::optional<double> b) {
  if (!a || !b) return std::nullopt;
  const double denom = *a + *b;
  if (denom == 0.0) return std::nullopt;
  return (*a - *b) / denom;
}

/// Names of the spectral features carrying dynamics columns, per spec.
std::vector<std::string> s2_feature_names(const FeatureSpec& spec) {
  std::vector<std::string> names;
  if (spec.use_s2) {
    for (const BandId b : ingest::optical_bands()) {
      names.push_back(std::string("s2_") + ingest::to_string(b));
    }
  }
  if (spec.use_s2 || spec.use_s2_indices) {
    names.insert(names.end(), {"ndvi", "ndwi", "ndmi", "msi"});
  }
  return names;
}

const char* kSarNames[3] = {"vv_db", "vh_db", "vh_vv_ratio"};

}  // namespace

BandMeans band_means(const ingest::Patch& patch, int window) {
  if (window <= 0 || window % 2 != 0) {
    throw ValidationError("band_means window must be a positive even integer, got " +
                          std::to_string(window));
  }
  if (window > patch.rows) {
    throw ValidationError("band_means window " + std::to_string(window) +
                          " exceeds patch size " + std::to_string(patch.rows));
  }
  const int r0 = patch.rows / 2 - window / 2;
  const int c0 = patch.cols / 2 - window / 2;
  BandMeans means;
  for (const BandId b : patch.bands) {
    if (b == BandId::kSCL) continue;
    const auto pixels = patch.band(b);
    double sum = 0.0;
    std::size_t count = 0;
    for (int r = r0; r < r0 + window; ++r) {
      for (int c = c0; c < c0 + window; ++c) {
        const float v = pixels[static_cast<std::size_t>(r) * patch.cols + c];
        if (!std::isfinite(v)) continue;
        sum += v;
        ++count;
      }
    }
    if (count > 0) means[b] = sum / static_cast<double>(count);
  }
  return means;
}

SpectralIndices spectral_indices(const BandMeans& means) {
  SpectralIndices out;
  const auto b3 = band_value(means, BandId::kB03);
  const auto b4 = band_value(means, BandId::kB04);
  const auto b8 = band_value(means, BandId::kB08);
  const auto b8a = band_value(means, BandId::kB8A);
  const auto b11 = band_value(means, BandId::kB11);
  out.ndvi = normalized_difference(b8, b4);
  out.ndwi = normalized_difference(b3, b8);
  out.ndmi = normalized_difference(b8, b11);
  if (b11 && b8a && *b8a != 0.0) out.msi = *b11 / *b8a;
  return out;
}

SarFeatures sar_features(const BandMeans& means) {
  SarFeatures out;
  const auto vv = band_value(means, BandId::kVV);
  const auto vh = band_value(means, BandId::kVH);
  if (!vv || !vh || !(*vv > 0.0) || !(*vh > 0.0)) return out;
  out.vv_db = 10.0 * std::log10(*vv);
  out.vh_db = 10.0 * std::log10(*vh);
  out.ratio = *vh / *vv;
  return out;
}

std::optional<Dynamics> temporal_dynamics(std::optional<double> curr, std::optional<double> prev,
                                          int gap_days) {
  if (!curr || !prev) return std::nullopt;
  if (gap_days < 1) {
    throw ValidationError("temporal_dynamics gap_days must be >= 1, got " +
                          std::to_string(gap_days));
  }
  const double diff = *curr - *prev;
  return Dynamics{diff, diff / static_cast<double>(gap_days)};
}

std::vector<std::string> era5_lag_columns(int lookback_days) {
  if (lookback_days < 0 || lookback_days > 20) {
    throw ValidationError("era5 lookback must be in [0,20], got " +
                          std::to_string(lookback_days));
  }
  std::vector<std::string> names;
  names.reserve(ingest::kEra5VariableCount * (lookback_days + 1));
  for (int lag = 0; lag <= lookback_days; ++lag) {
    for (const char* var : ingest::era5_variable_names()) {
      names.push_back(std::string(var) + "_lag" + std::to_string(lag));
    }
  }
  return names;
}

std::vector<std::optional<double>> era5_lag_stack(const ingest::Era5Table& era5,
                                                  const std::string& station_id,
                                                  core::Date target_date, int lookback_days) {
  if (lookback_days < 0 || lookback_days > 20) {
    throw ValidationError("era5 lookback must be in [0,20], got " +
                          std::to_string(lookback_days));
  }
  std::vector<std::optional<double>> out;
  out.reserve(ingest::kEra5VariableCount * (lookback_days + 1));
  for (int lag = 0; lag <= lookback_days; ++lag) {
    const ingest::Era5Record* rec = era5.find(station_id, core::add_days(target_date, -lag));
    for (std::size_t v = 0; v < ingest::kEra5VariableCount; ++v) {
      if (rec == nullptr) {
        out.emplace_back(std::nullopt);
      } else {
        out.emplace_back(rec->values[v]);
      }
    }
  }
  return out;
}

std::vector<std::string> column_schema(const FeatureSpec& spec) {
  std::vector<std::string> names;
  const auto s2_features = s2_feature_names(spec);
  names.insert(names.end(), s2_features.begin(), s2_features.end());
  for (const auto& f : s2_features) {
    names.push_back(f + "_diff");
    names.push_back(f + "_rate");
  }
  if (spec.use_s1) {
    for (const char* f : kSarNames) names.emplace_back(f);
    for (const char* f : kSarNames) {
      names.push_back(std::string(f) + "_diff");
      names.push_back(std::string(f) + "_rate");
    }
  }
  const auto era5 = era5_lag_columns(spec.era5_lookback);
  names.insert(names.end(), era5.begin(), era5.end());
  if (spec.use_embeddings) {
    char buf[8];
    for (std::size_t i = 0; i < ingest::kEmbeddingDim; ++i) {
      std::snprintf(buf, sizeof(buf), "e%03zu", i);
      names.emplace_back(buf);
    }
  }
  return names;
}

const BandMeans& PatchMeansStore::means_for(const std::string& file) const {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto it = cache_.find(file);
    if (it != cache_.end()) return *it->second;
  }
  const ingest::Patch patch = ingest::read_patch_file(file);
  auto means = std::make_unique<BandMeans>(band_means(patch, window_));
  std::lock_guard<std::mutex> lock(mutex_);
  const auto [it, inserted] = cache_.emplace(file, std::move(means));
  return *it->second;
}

namespace {

struct S2Block {
  std::vector<std::optional<double>> values;  // bands then indices, per s2_feature_names
};

S2Block s2_block(const FeatureSpec& spec, const BandMeans& means) {
  S2Block block;
  if (spec.use_s2) {
    for (const BandId b : ingest::optical_bands()) {
      block.values.push_back(band_value(means, b));
    }
  }
  if (spec.use_s2 || spec.use_s2_indices) {
    const SpectralIndices idx = spectral_indices(means);
    block.values.push_back(idx.ndvi);
    block.values.push_back(idx.ndwi);
    block.values.push_back(idx.ndmi);
    block.values.push_back(idx.msi);
  }
  return block;
}

}  // namespace

AssembledData assemble(const std::vector<matching::MatchedSample>& samples,
                       const core::MeasurementTable& measurements, const FeatureSpec& spec,
                       const ingest::Era5Table& era5, const ingest::EmbeddingTable* embeddings,
                       const PatchMeansStore& patch_means) {
  if (spec.use_embeddings && embeddings == nullptr) {
    throw ConfigError("dataset spec requests embeddings but no embedding table is available");
  }
  AssembledData out;
  out.matrix = FeatureMatrix(column_schema(spec));
  const bool wants_s2_patch = spec.use_s2 || spec.use_s2_indices || spec.use_embeddings;

  std::vector<double> row;
  row.reserve(out.matrix.cols());
  for (const auto& sample : samples) {
    const core::Measurement* target = measurements.find(sample.station_id, sample.target_date);
    if (target == nullptr) continue;
    row.clear();

    if (wants_s2_patch && !sample.s2) {
      throw ValidationError("sample for '" + sample.station_id +
                            "' lacks the S2 match required by the dataset spec");
    }

    if (spec.use_s2 || spec.use_s2_indices) {
      const BandMeans& curr_means = patch_means.means_for(sample.s2->file);
      const S2Block curr = s2_block(spec, curr_means);
      for (const auto& v : curr.values) row.push_back(opt_value(v));
      if (sample.s2_prev) {
        const BandMeans& prev_means = patch_means.means_for(sample.s2_prev->file);
        const S2Block prev = s2_block(spec, prev_means);
        const int gap = core::days_between(sample.s2_prev->date, sample.s2->date);
        for (std::size_t i = 0; i < curr.values.size(); ++i) {
          const auto dyn = temporal_dynamics(curr.values[i], prev.values[i], gap);
          row.push_back(dyn ? dyn->diff : kMissing);
          row.push_back(dyn ? dyn->rate : kMissing);
        }
      } else {
        for (std::size_t i = 0; i < curr.values.size(); ++i) {
          row.push_back(kMissing);
          row.push_back(kMissing);
        }
      }
    }

    if (spec.use_s1) {
      if (!sample.s1) {
        throw ValidationError("sample for '" + sample.station_id +
                              "' lacks the S1 match required by the dataset spec");
      }
      const SarFeatures curr = sar_features(patch_means.means_for(sample.s1->file));
      const std::optional<double> curr_vals[3] = {curr.vv_db, curr.vh_db, curr.ratio};
      for (const auto& v : curr_vals) row.push_back(opt_value(v));
      if (sample.s1_prev) {
        const SarFeatures prev = sar_features(patch_means.means_for(sample.s1_prev->file));
        const std::optional<double> prev_vals[3] = {prev.vv_db, prev.vh_db, prev.ratio};
        const int gap = core::days_between(sample.s1_prev->date, sample.s1->date);
        for (int i = 0; i < 3; ++i) {
          const auto dyn = temporal_dynamics(curr_vals[i], prev_vals[i], gap);
          row.push_back(dyn ? dyn->diff : kMissing);
          row.push_back(dyn ? dyn->rate : kMissing);
        }
      } else {
        for (int i = 0; i < 6; ++i) row.push_back(kMissing);
      }
    }

    for (const auto& v :
         era5_lag_stack(era5, sample.station_id, sample.target_date, spec.era5_lookback)) {
      row.push_back(opt_value(v));
    }

    if (spec.use_embeddings) {
      const double* vec = embeddings->find(sample.station_id, sample.s2->date);
      if (vec == nullptr) {
        for (std::size_t i = 0; i < ingest::kEmbeddingDim; ++i) row.push_back(kMissing);
      } else {
        row.insert(row.end(), vec, vec + ingest::kEmbeddingDim);
      }
    }

    out.matrix.add_row({sample.station_id, sample.target_date}, row);
    out.targets.push_back(target->sm);
  }
  return out;
}

}  // namespace smest::features
