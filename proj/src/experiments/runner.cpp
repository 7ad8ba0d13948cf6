#include "smest/experiments/runner.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "smest/core/error.hpp"
#include "smest/matching/matching.hpp"

namespace smest::experiments {

using core::ConfigError;
using core::IoError;

namespace {

struct RowData {
  features::AssembledData data;
  std::size_t dropped = 0;
};

/// Matching + assembly for one dataset spec; embeddings-only drops are counted here.
RowData build_row_data(const DataBundle& bundle, const DatasetSpec& spec,
                       const RunConfig& config) {
  (void)config;
  const matching::SampleRequirements req = spec.requirements();
  matching::BuildResult built =
      matching::build_samples(bundle.measurements, bundle.index, spec.s2_strategy,
                              spec.s1_strategy, spec.orbit, req);
  RowData out;
  out.dropped = built.dropped_missing_s2 + built.dropped_missing_s1;

  if (spec.use_embeddings) {
    if (!bundle.embeddings) {
      throw ConfigError("dataset spec '" + spec.label() +
                        "' requires embeddings but embeddings.csv is absent");
    }
    std::vector<matching::MatchedSample> kept;
    kept.reserve(built.samples.size());
    for (auto& sample : built.samples) {
      if (bundle.embeddings->find(sample.station_id, sample.s2->date) != nullptr) {
        kept.push_back(std::move(sample));
      } else {
        ++out.dropped;
      }
    }
    built.samples = std::move(kept);
  }

  const ingest::EmbeddingTable* embeddings =
      bundle.embeddings ? &*bundle.embeddings : nullptr;
  out.data = features::assemble(built.samples, bundle.measurements, spec.feature_spec(),
                                bundle.era5, embeddings, *bundle.patch_means);
  return out;
}

std::string csv_escape_label(const std::string& label) {
  // Labels contain no commas by construction; keep them verbatim.
  return label;
}

}  // namespace

DataBundle load_bundle(const std::filesystem::path& data_dir, int patch_window) {
  if (!std::filesystem::exists(data_dir)) {
    throw IoError("data directory '" + data_dir.string() + "' does not exist");
  }
  DataBundle bundle;
  const core::StationTable all_stations = ingest::load_stations(data_dir / "stations.csv");
  ingest::MeasurementLoad measurements =
      ingest::load_measurements(data_dir / "measurements.csv", all_stations);
  bundle.measurements_dropped_unknown = measurements.dropped_unknown_station;
  bundle.stations_before_dedup = all_stations.size();

  bundle.stations = ingest::dedup_stations(all_stations, measurements.table);
  if (bundle.stations.size() == all_stations.size()) {
    bundle.measurements = std::move(measurements.table);
  } else {
    for (const auto& m : measurements.table.rows()) {
      if (bundle.stations.contains(m.station_id)) {
        bundle.measurements.add(m);
      } else {
        ++bundle.measurements_dropped_dedup;
      }
    }
  }

  ingest::ScanResult scan = ingest::scan_patches(data_dir / "patches", bundle.stations);
  bundle.index = std::move(scan.index);
  bundle.patches_skipped_unknown = scan.skipped_unknown_station;
  bundle.era5 = ingest::load_era5(data_dir / "era5.csv");
  if (std::filesystem::exists(data_dir / "embeddings.csv")) {
    bundle.embeddings = ingest::load_embeddings(data_dir / "embeddings.csv");
  }
  bundle.patch_means = std::make_shared<features::PatchMeansStore>(patch_window);
  return bundle;
}

RowResult run_row(const DataBundle& bundle, const DatasetSpec& spec, const RunConfig& config,
                  const eval::FoldPlan& plan) {
  spec.validate();
  RowResult result;
  result.spec = spec;
  result.label = spec.label();

  const matching::SampleRequirements req = spec.requirements();
  if (req.need_s2 && bundle.index.count_sensor(ingest::Sensor::kS2) == 0) {
    result.skipped = true;
    result.skip_reason = "no S2 acquisitions in index";
    return result;
  }
  if (req.need_s1 && bundle.index.count_sensor(ingest::Sensor::kS1) == 0) {
    result.skipped = true;
    result.skip_reason = "no S1 acquisitions in index";
    return result;
  }

  RowData row = build_row_data(bundle, spec, config);
  result.dropped_samples = row.dropped;
  if (row.data.matrix.rows() == 0) {
    result.skipped = true;
    result.skip_reason = "no matched samples";
    return result;
  }

  forest::ForestParams params = config.forest;
  params.seed = config.seed;
  result.eval = eval::cross_validate(row.data.matrix, row.data.targets, plan, params);
  return result;
}

ExperimentReport run_e1(const DataBundle& bundle, const RunConfig& config) {
  ExperimentReport report;
  report.experiment = "E1";
  report.seed = config.seed;
  report.config_snapshot = config.snapshot();
  const eval::FoldPlan plan =
      eval::make_group_folds(bundle.stations.ids(), config.folds, config.seed);
  for (const DatasetSpec& spec : e1_grid(config.era5_lag)) {
    report.rows.push_back(run_row(bundle, spec, config, plan));
  }
  if (!config.dump_features.empty()) {
    const RowData row = build_row_data(bundle, optimal_spec(config.era5_lag), config);
    row.data.matrix.write_csv(config.dump_features, row.data.targets);
  }
  return report;
}

E2Result run_e2(const DataBundle& bundle, const RunConfig& config) {
  if (config.lag_min < 0 || config.lag_max > 20 || config.lag_min > config.lag_max) {
    throw ConfigError("lag range [" + std::to_string(config.lag_min) + "," +
                      std::to_string(config.lag_max) + "] must lie within [0,20]");
  }
  E2Result out;
  out.report.experiment = "E2";
  out.report.seed = config.seed;
  out.report.config_snapshot = config.snapshot();
  const eval::FoldPlan plan =
      eval::make_group_folds(bundle.stations.ids(), config.folds, config.seed);
  for (int lag = config.lag_min; lag <= config.lag_max; ++lag) {
    DatasetSpec spec = optimal_spec(lag);
    RowResult row = run_row(bundle, spec, config, plan);
    row.label += " (lag " + std::to_string(lag) + ")";
    if (!row.skipped) out.curve.push_back({lag, row.eval});
    out.report.rows.push_back(std::move(row));
  }
  if (!config.dump_features.empty()) {
    const RowData row = build_row_data(bundle, optimal_spec(config.lag_max), config);
    row.data.matrix.write_csv(config.dump_features, row.data.targets);
  }
  return out;
}

ExperimentReport run_e3(const DataBundle& bundle, const RunConfig& config) {
  if (!bundle.embeddings) {
    throw ConfigError("E3 requires embeddings.csv in the data directory");
  }
  ExperimentReport report;
  report.experiment = "E3";
  report.seed = config.seed;
  report.config_snapshot = config.snapshot();
  const eval::FoldPlan plan =
      eval::make_group_folds(bundle.stations.ids(), config.folds, config.seed);
  for (const DatasetSpec& spec : e3_grid(config.era5_lag)) {
    report.rows.push_back(run_row(bundle, spec, config, plan));
  }
  if (!config.dump_features.empty()) {
    const RowData row = build_row_data(bundle, e3_grid(config.era5_lag).back(), config);
    row.data.matrix.write_csv(config.dump_features, row.data.targets);
  }
  return report;
}

std::string format_metric(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", value);
  return buf;
}

std::string render_results_table(const ExperimentReport& report) {
  std::size_t label_width = std::string("Dataset").size();
  for (const auto& row : report.rows) label_width = std::max(label_width, row.label.size());

  std::ostringstream out;
  const auto pad = [&](const std::string& s, std::size_t width) {
    out << s;
    for (std::size_t i = s.size(); i < width; ++i) out << ' ';
  };
  pad("Dataset", label_width);
  out << "  R2      RMSE    MAE     N\n";
  for (const auto& row : report.rows) {
    pad(row.label, label_width);
    if (row.skipped) {
      out << "  skipped: " << row.skip_reason << "\n";
      continue;
    }
    out << "  " << format_metric(row.eval.r2) << "  " << format_metric(row.eval.rmse) << "  "
        << format_metric(row.eval.mae) << "  " << row.eval.n_samples << "\n";
  }
  return out.str();
}

void emit_report(const ExperimentReport& report, const std::filesystem::path& out_dir,
                 const std::vector<LagPoint>* curve) {
  if (report.rows.empty()) throw ConfigError("cannot emit an empty report");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "'");

  {
    std::ofstream csv(out_dir / "results.csv", std::ios::binary);
    if (!csv) throw IoError("cannot write results.csv in '" + out_dir.string() + "'");
    csv << "dataset,strategy_s2,strategy_s1,orbit,era5_lag,r2,rmse,mae,n_samples,seed\n";
    for (const auto& row : report.rows) {
      if (row.skipped) continue;
      const auto req = row.spec.requirements();
      csv << csv_escape_label(row.label) << ','
          << (req.need_s2 ? row.spec.s2_strategy.name() : "") << ','
          << (row.spec.use_s1 ? row.spec.s1_strategy.name() : "") << ','
          << (row.spec.use_s1 ? matching::to_string(row.spec.orbit) : "") << ','
          << row.spec.era5_lookback << ',' << format_metric(row.eval.r2) << ','
          << format_metric(row.eval.rmse) << ',' << format_metric(row.eval.mae) << ','
          << row.eval.n_samples << ',' << report.seed << "\n";
    }
  }

  if (curve != nullptr) {
    std::ofstream csv(out_dir / "lag_curve.csv", std::ios::binary);
    if (!csv) throw IoError("cannot write lag_curve.csv in '" + out_dir.string() + "'");
    csv << "lag,r2,rmse,mae\n";
    for (const auto& point : *curve) {
      csv << point.lag << ',' << format_metric(point.eval.r2) << ','
          << format_metric(point.eval.rmse) << ',' << format_metric(point.eval.mae) << "\n";
    }
  }

  {
    std::ofstream md(out_dir / "results.md", std::ios::binary);
    if (!md) throw IoError("cannot write results.md in '" + out_dir.string() + "'");
    md << "# " << report.experiment << " results\n\n";
    md << "## Configuration\n\n```\n";
    for (const auto& [key, value] : report.config_snapshot) {
      md << key << " = " << value << "\n";
    }
    md << "```\n\n## Results\n\n```\n" << render_results_table(report) << "```\n";
    bool any_folds = false;
    for (const auto& row : report.rows) any_folds |= !row.skipped;
    if (any_folds) {
      md << "\n## Per-fold diagnostics\n\n```\n";
      for (const auto& row : report.rows) {
        if (row.skipped) continue;
        md << row.label << ":";
        for (const auto& fm : row.eval.per_fold) {
          md << " fold" << fm.fold << " r2=" << format_metric(fm.r2) << " (n=" << fm.n_samples
             << ")";
        }
        md << "\n";
      }
      md << "```\n";
    }
  }
}

}  // namespace smest::experiments
