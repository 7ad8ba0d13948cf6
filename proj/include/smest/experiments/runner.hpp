#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "smest/eval/evaluation.hpp"
#include "smest/experiments/config.hpp"
#include "smest/experiments/dataset_spec.hpp"
#include "smest/features/features.hpp"
#include "smest/ingest/acquisitions.hpp"
#include "smest/ingest/loaders.hpp"

namespace smest::experiments {

/**
 * @brief All validated inputs for one data directory.
 *
 * Stations are land-cover filtered and distance-deduplicated; measurements of
 * removed stations are discarded. The embedding table is optional.
 */
struct DataBundle {
  core::StationTable stations;
  core::MeasurementTable measurements;
  ingest::AcquisitionIndex index;
  ingest::Era5Table era5;
  std::optional<ingest::EmbeddingTable> embeddings;
  std::shared_ptr<features::PatchMeansStore> patch_means;

  std::size_t stations_before_dedup = 0;
  std::size_t measurements_dropped_unknown = 0;
  std::size_t measurements_dropped_dedup = 0;
  std::size_t patches_skipped_unknown = 0;
};

/// Loads stations.csv, measurements.csv, era5.csv, patches/ and, when
/// present, embeddings.csv from `data_dir`.
DataBundle load_bundle(const std::filesystem::path& data_dir, int patch_window);

struct RowResult {
  DatasetSpec spec;
  std::string label;
  eval::EvalResult eval;
  std::size_t dropped_samples = 0;
  bool skipped = false;
  std::string skip_reason;
};

struct ExperimentReport {
  std::string experiment;  // "E1", "E2", "E3"
  int format_version = 1;
  std::uint64_t seed = 0;
  std::vector<RowResult> rows;
  std::vector<std::pair<std::string, std::string>> config_snapshot;
};

struct LagPoint {
  int lag = 0;
  eval::EvalResult eval;
};

struct E2Result {
  ExperimentReport report;
  std::vector<LagPoint> curve;
};

/// Evaluates one grid row end to end (matching, assembly, grouped CV).
RowResult run_row(const DataBundle& bundle, const DatasetSpec& spec, const RunConfig& config,
                  const eval::FoldPlan& plan);

/// The 13 modality/matching rows at the configured ERA5 lookback.
ExperimentReport run_e1(const DataBundle& bundle, const RunConfig& config);

/// Lag sweep lag_min..lag_max over the optimal configuration.
E2Result run_e2(const DataBundle& bundle, const RunConfig& config);

/// The three embedding rows; requires embeddings.csv.
ExperimentReport run_e3(const DataBundle& bundle, const RunConfig& config);

/**
 * @brief Writes results.csv, results.md and (for E2) lag_curve.csv.
 *
 * Floats are printed with 4 decimals; identical reports serialize to
 * byte-identical files.
 */
void emit_report(const ExperimentReport& report, const std::filesystem::path& out_dir,
                 const std::vector<LagPoint>* curve = nullptr);

/// Renders the aligned results table (used by emit_report and the report command).
std::string render_results_table(const ExperimentReport& report);

/// Formats a metric with 4 decimals (round-half-even).
std::string format_metric(double value);

}  // namespace smest::experiments
