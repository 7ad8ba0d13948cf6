// smest - multimodal soil moisture estimation pipeline CLI.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "smest/core/error.hpp"
#include "smest/experiments/config.hpp"
#include "smest/experiments/runner.hpp"
#include "smest/experiments/synthetic.hpp"
#include "smest/forest/forest.hpp"
#include "smest/ingest/csv.hpp"

namespace {

using namespace smest;

struct CliState {
  experiments::AppConfig config;
  std::string config_file;
};

void apply_config_file_if_set(CliState& state) {
  if (!state.config_file.empty()) {
    experiments::apply_config_file(state.config, state.config_file);
  }
}

int cmd_ingest_validate(const experiments::RunConfig& run) {
  const experiments::DataBundle bundle =
      experiments::load_bundle(run.data_dir, run.patch_window);
  std::cout << "stations: " << bundle.stations.size() << " retained ("
            << bundle.stations_before_dedup - bundle.stations.size() << " removed by the 1 km screen)\n"
            << "measurements: " << bundle.measurements.size() << " ("
            << bundle.measurements_dropped_unknown << " dropped for unknown stations, "
            << bundle.measurements_dropped_dedup << " dropped with removed stations)\n"
            << "acquisitions: " << bundle.index.count_sensor(ingest::Sensor::kS2) << " S2, "
            << bundle.index.count_sensor(ingest::Sensor::kS1) << " S1 ("
            << bundle.patches_skipped_unknown << " files under unknown stations skipped)\n"
            << "era5 rows: " << bundle.era5.size() << "\n"
            << "embeddings: "
            << (bundle.embeddings ? std::to_string(bundle.embeddings->size()) : std::string("absent"))
            << "\n";
  std::cout << "ok\n";
  return 0;
}

int cmd_synth_gen(const experiments::SynthConfig& synth, const std::string& out_dir) {
  const experiments::SynthSummary summary = experiments::generate_synthetic(synth, out_dir);
  std::cout << "wrote " << summary.stations << " stations, " << summary.measurements
            << " measurements, " << summary.s2_patches << " S2 patches, " << summary.s1_patches
            << " S1 patches, " << summary.era5_rows << " era5 rows, " << summary.embedding_rows
            << " embeddings to " << out_dir << "\n";
  return 0;
}

int cmd_run(const std::string& which, const experiments::RunConfig& run) {
  const experiments::DataBundle bundle =
      experiments::load_bundle(run.data_dir, run.patch_window);
  if (which == "e1") {
    const experiments::ExperimentReport report = experiments::run_e1(bundle, run);
    experiments::emit_report(report, run.out_dir);
    std::cout << experiments::render_results_table(report);
  } else if (which == "e2") {
    const experiments::E2Result result = experiments::run_e2(bundle, run);
    experiments::emit_report(result.report, run.out_dir, &result.curve);
    std::cout << experiments::render_results_table(result.report);
  } else {
    const experiments::ExperimentReport report = experiments::run_e3(bundle, run);
    experiments::emit_report(report, run.out_dir);
    std::cout << experiments::render_results_table(report);
  }
  std::cout << "report written to " << run.out_dir << "\n";
  return 0;
}

int cmd_report(const std::string& in_dir) {
  const ingest::CsvTable csv = ingest::read_csv(std::filesystem::path(in_dir) / "results.csv");
  std::size_t width = std::string("Dataset").size();
  for (const auto& row : csv.rows) width = std::max(width, row.fields[0].size());
  const auto pad = [&](const std::string& s) {
    std::cout << s;
    for (std::size_t i = s.size(); i < width; ++i) std::cout << ' ';
  };
  pad("Dataset");
  std::cout << "  R2      RMSE    MAE     N\n";
  for (const auto& row : csv.rows) {
    if (row.fields.size() < 9) continue;
    pad(row.fields[0]);
    std::cout << "  " << row.fields[5] << "  " << row.fields[6] << "  " << row.fields[7] << "  "
              << row.fields[8] << "\n";
  }
  return 0;
}

int cmd_train(const experiments::RunConfig& run, const std::string& dataset_label,
              const std::string& model_path) {
  const auto spec = experiments::DatasetSpec::from_label(dataset_label, run.era5_lag);
  if (!spec) {
    throw core::ConfigError("unknown dataset label '" + dataset_label + "'");
  }
  const experiments::DataBundle bundle =
      experiments::load_bundle(run.data_dir, run.patch_window);
  const eval::FoldPlan plan =
      eval::make_group_folds(bundle.stations.ids(), run.folds, run.seed);
  (void)plan;  // validates station count; training itself uses all rows

  matching::BuildResult built =
      matching::build_samples(bundle.measurements, bundle.index, spec->s2_strategy,
                              spec->s1_strategy, spec->orbit, spec->requirements());
  const ingest::EmbeddingTable* embeddings =
      bundle.embeddings ? &*bundle.embeddings : nullptr;
  features::AssembledData data =
      features::assemble(built.samples, bundle.measurements, spec->feature_spec(), bundle.era5,
                         embeddings, *bundle.patch_means);
  if (data.matrix.rows() == 0) throw core::ValidationError("no matched samples to train on");

  forest::ForestParams params = run.forest;
  params.seed = run.seed;
  forest::Forest model = forest::fit_forest(data.matrix, data.targets, params);
  model.meta["dataset"] = spec->label();
  model.meta["era5_lag"] = std::to_string(spec->era5_lookback);
  model.meta["patch_window"] = std::to_string(run.patch_window);
  forest::save_forest(model, model_path);
  std::cout << "trained on " << data.matrix.rows() << " samples x " << data.matrix.cols()
            << " features; model written to " << model_path << "\n";
  return 0;
}

int cmd_predict(const experiments::RunConfig& run, const std::string& model_path,
                const std::string& out_path) {
  const forest::Forest model = forest::load_forest(model_path);
  const auto label_it = model.meta.find("dataset");
  if (label_it == model.meta.end()) {
    throw core::ValidationError("model file lacks the dataset label metadata");
  }
  int era5_lag = 20;
  if (const auto it = model.meta.find("era5_lag"); it != model.meta.end()) {
    era5_lag = std::stoi(it->second);
  }
  int window = run.patch_window;
  if (const auto it = model.meta.find("patch_window"); it != model.meta.end()) {
    window = std::stoi(it->second);
  }
  const auto spec = experiments::DatasetSpec::from_label(label_it->second, era5_lag);
  if (!spec) {
    throw core::ValidationError("model carries unknown dataset label '" + label_it->second + "'");
  }

  const experiments::DataBundle bundle = experiments::load_bundle(run.data_dir, window);
  matching::BuildResult built =
      matching::build_samples(bundle.measurements, bundle.index, spec->s2_strategy,
                              spec->s1_strategy, spec->orbit, spec->requirements());
  const ingest::EmbeddingTable* embeddings =
      bundle.embeddings ? &*bundle.embeddings : nullptr;
  const features::AssembledData data =
      features::assemble(built.samples, bundle.measurements, spec->feature_spec(), bundle.era5,
                         embeddings, *bundle.patch_means);
  const std::vector<double> preds = model.predict_matrix(data.matrix);

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw core::IoError("cannot write '" + out_path + "'");
  out << "station_id,date,sm,prediction\n";
  char buf[32];
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto& key = data.matrix.provenance()[i];
    std::snprintf(buf, sizeof(buf), "%.6f", data.targets[i]);
    out << key.station_id << ',' << core::format_date(key.date) << ',' << buf;
    std::snprintf(buf, sizeof(buf), "%.6f", preds[i]);
    out << ',' << buf << "\n";
  }
  std::cout << "wrote " << preds.size() << " predictions to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"smest - multimodal soil moisture estimation pipeline"};
  app.require_subcommand(1);

  CliState state;
  std::string dataset_label;
  std::string model_path;
  std::string out_path;
  std::string report_in;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", state.config_file, "key = value configuration file");
  };
  const auto add_run_options = [&](CLI::App* cmd) {
    add_common(cmd);
    cmd->add_option("--data-dir", state.config.run.data_dir, "input data directory");
    cmd->add_option("--out", state.config.run.out_dir, "report output directory");
    cmd->add_option("--seed", state.config.run.seed, "run seed");
    cmd->add_option("--folds", state.config.run.folds, "cross-validation folds");
    cmd->add_option("--trees", state.config.run.forest.n_trees, "trees per forest");
    cmd->add_option("--dump-features", state.config.run.dump_features,
                    "write the assembled feature matrix CSV to this path");
  };

  CLI::App* validate = app.add_subcommand("ingest-validate", "load and validate a data directory");
  add_common(validate);
  validate->add_option("--data-dir", state.config.run.data_dir, "input data directory")
      ->required();

  CLI::App* synth = app.add_subcommand("synth-gen", "generate a synthetic dataset");
  add_common(synth);
  std::string synth_out;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--seed", state.config.synth.seed, "generator seed");
  synth->add_option("--stations", state.config.synth.stations, "station count");
  synth->add_option("--noise", state.config.synth.noise, "noise level sigma");
  synth->add_option("--true-lag", state.config.synth.true_lag,
                    "precipitation memory of the generative model, days");
  synth->add_option("--days", state.config.synth.days, "measurement period length, days");

  CLI::App* e1 = app.add_subcommand("run-e1", "modality and temporal matching grid");
  add_run_options(e1);
  CLI::App* e2 = app.add_subcommand("run-e2", "ERA5 lookback sweep");
  add_run_options(e2);
  CLI::App* e3 = app.add_subcommand("run-e3", "embedding representation rows");
  add_run_options(e3);

  CLI::App* report = app.add_subcommand("report", "print a written report");
  report->add_option("--in", report_in, "report directory")->required();

  CLI::App* train = app.add_subcommand("train", "fit a forest on the full dataset");
  add_run_options(train);
  train->add_option("--dataset", dataset_label, "dataset row label")->required();
  train->add_option("--model", model_path, "output model file")->required();

  CLI::App* predict = app.add_subcommand("predict", "predict with a saved model");
  add_common(predict);
  predict->add_option("--data-dir", state.config.run.data_dir, "input data directory")
      ->required();
  predict->add_option("--model", model_path, "model file")->required();
  predict->add_option("--out", out_path, "output predictions CSV")->required();

  // Parse twice: the first pass discovers --config, then file values are
  // loaded into a fresh config and the CLI flags re-parsed on top so they win.
  try {
    app.parse(argc, argv);
    if (!state.config_file.empty()) {
      state.config = experiments::AppConfig{};
      apply_config_file_if_set(state);
      app.clear();
      app.parse(argc, argv);
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const smest::core::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  }

  try {
    if (validate->parsed()) return cmd_ingest_validate(state.config.run);
    if (synth->parsed()) return cmd_synth_gen(state.config.synth, synth_out);
    if (e1->parsed()) return cmd_run("e1", state.config.run);
    if (e2->parsed()) return cmd_run("e2", state.config.run);
    if (e3->parsed()) return cmd_run("e3", state.config.run);
    if (report->parsed()) return cmd_report(report_in);
    if (train->parsed()) return cmd_train(state.config.run, dataset_label, model_path);
    if (predict->parsed()) return cmd_predict(state.config.run, model_path, out_path);
  } catch (const smest::core::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
