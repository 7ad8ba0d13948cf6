#pragma once

#include <filesystem>

#include "smest/experiments/config.hpp"

namespace smest::experiments {

/// Coefficients of the closed-form ground-truth model; recorded in the manifest.
struct SynthTruth {
  double a0 = 0.05;   // intercept
  double a1 = 0.50;   // NDVI weight
  double a2 = 1.30;   // descending-orbit VH/VV ratio weight
  double a3 = 26.0;   // weight of mean precipitation over the last true_lag days
};

struct SynthSummary {
  std::size_t stations = 0;
  std::size_t measurements = 0;
  std::size_t s2_patches = 0;
  std::size_t s1_patches = 0;
  std::size_t era5_rows = 0;
  std::size_t embedding_rows = 0;
};

/**
 * @brief Writes a complete synthetic dataset in the ingestion formats.
 *
 * Ground truth follows sm = clip(a0 + a1*NDVI + a2*(VH/VV)_DESC +
 * a3*mean(precip over the last true_lag days) + noise, 0, 1); patches are
 * rendered so central band means recover the latent NDVI and backscatter up
 * to the configured noise, with ascending-orbit SAR carrying twice the
 * descending noise. Embeddings are an invertible linear scramble of the 16
 * hand-crafted S2 features. Byte-identical output for identical seeds; the
 * generative parameters land in `synth_manifest.json`.
 */
SynthSummary generate_synthetic(const SynthConfig& config,
                                const std::filesystem::path& out_dir);

}  // namespace smest::experiments
