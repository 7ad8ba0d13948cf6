#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "smest/core/error.hpp"
#include "smest/experiments/runner.hpp"
#include "smest/experiments/synthetic.hpp"
#include "test_util.hpp"

using namespace smest;
using smest_test::TempDir;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

experiments::SynthConfig tiny_synth(std::uint64_t seed) {
  experiments::SynthConfig cfg;
  cfg.stations = 6;
  cfg.days = 60;
  cfg.noise = 0.01;
  cfg.true_lag = 3;
  cfg.seed = seed;
  return cfg;
}

experiments::RunConfig tiny_run(const std::filesystem::path& data_dir,
                                const std::filesystem::path& out_dir) {
  experiments::RunConfig run;
  run.data_dir = data_dir.string();
  run.out_dir = out_dir.string();
  run.folds = 3;
  run.seed = 5;
  run.forest.n_trees = 8;
  return run;
}

}  // namespace

TEST_CASE("e1 grid is exactly the 13 configured rows") {
  const auto grid = experiments::e1_grid(20);
  REQUIRE(grid.size() == 13);
  std::vector<std::string> labels;
  for (const auto& spec : grid) labels.push_back(spec.label());
  const std::vector<std::string> expected = {
      "S2_curr_day",
      "S1_ASC_curr_day",
      "S1_DESC_curr_day",
      "S1_BOTH_curr_day",
      "S2_closest + S1_ASC_closest",
      "S2_closest + S1_DESC_closest",
      "S2_closest + S1_BOTH_closest",
      "S1_ASC_curr_day + S2_closest",
      "S1_DESC_curr_day + S2_closest",
      "S1_BOTH_curr_day + S2_closest",
      "S2_curr_day + S1_ASC_closest",
      "S2_curr_day + S1_DESC_closest",
      "S2_curr_day + S1_BOTH_closest",
  };
  CHECK(labels == expected);
  for (const auto& spec : grid) CHECK(spec.era5_lookback == 20);
}

TEST_CASE("e3 grid labels") {
  const auto grid = experiments::e3_grid(20);
  REQUIRE(grid.size() == 3);
  CHECK(grid[0].label() == "Prithvi_S2");
  CHECK(grid[1].label() == "Prithvi_S2 + S1_DESC_closest");
  CHECK(grid[2].label() == "Prithvi_S2 + indices + S1_DESC_closest");
}

TEST_CASE("dataset specs round-trip through labels") {
  for (const auto& spec : experiments::e1_grid(10)) {
    const auto parsed = experiments::DatasetSpec::from_label(spec.label(), 10);
    REQUIRE(parsed.has_value());
    CHECK(parsed->label() == spec.label());
  }
  const auto compact = experiments::DatasetSpec::from_label("S2_curr_day+S1_DESC_closest", 20);
  REQUIRE(compact.has_value());
  CHECK(compact->label() == "S2_curr_day + S1_DESC_closest");
  CHECK(!experiments::DatasetSpec::from_label("bogus", 20).has_value());
}

TEST_CASE("spec validation rejects empty modality sets") {
  experiments::DatasetSpec spec;
  CHECK_THROWS_AS(spec.validate(), core::ConfigError);
}

TEST_CASE("synthetic generation is deterministic byte for byte") {
  TempDir a;
  TempDir b;
  const auto cfg = tiny_synth(77);
  const auto sa = experiments::generate_synthetic(cfg, a.path);
  const auto sb = experiments::generate_synthetic(cfg, b.path);
  CHECK(sa.measurements == sb.measurements);

  std::vector<std::filesystem::path> rel;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(a.path)) {
    if (entry.is_regular_file()) rel.push_back(std::filesystem::relative(entry.path(), a.path));
  }
  CHECK(rel.size() > 10);
  for (const auto& r : rel) {
    REQUIRE(std::filesystem::exists(b.path / r));
    CHECK(slurp(a.path / r) == slurp(b.path / r));
  }

  TempDir c;
  auto other = cfg;
  other.seed = 78;
  experiments::generate_synthetic(other, c.path);
  CHECK(slurp(a.path / "measurements.csv") != slurp(c.path / "measurements.csv"));
}

TEST_CASE("synthetic output loads cleanly as a bundle") {
  TempDir tmp;
  const auto cfg = tiny_synth(3);
  const auto summary = experiments::generate_synthetic(cfg, tmp.path);
  const auto bundle = experiments::load_bundle(tmp.path, 32);
  CHECK(bundle.stations.size() == 6);
  CHECK(bundle.measurements.size() == summary.measurements);
  CHECK(bundle.index.count_sensor(ingest::Sensor::kS2) == summary.s2_patches);
  CHECK(bundle.index.count_sensor(ingest::Sensor::kS1) == summary.s1_patches);
  CHECK(bundle.era5.size() == summary.era5_rows);
  REQUIRE(bundle.embeddings.has_value());
  CHECK(bundle.embeddings->size() == summary.embedding_rows);
  CHECK(std::filesystem::exists(tmp.path / "synth_manifest.json"));
}

TEST_CASE("four stations with five folds raise the configuration error") {
  TempDir tmp;
  auto cfg = tiny_synth(4);
  cfg.stations = 4;
  experiments::generate_synthetic(cfg, tmp.path);
  const auto bundle = experiments::load_bundle(tmp.path, 32);
  experiments::RunConfig run = tiny_run(tmp.path, tmp.path / "out");
  run.folds = 5;
  CHECK_THROWS_AS(experiments::run_e1(bundle, run), core::ConfigError);
}

TEST_CASE("run_e1 evaluates all rows and emit_report round-trips") {
  TempDir tmp;
  experiments::generate_synthetic(tiny_synth(9), tmp.path / "data");
  const auto bundle = experiments::load_bundle(tmp.path / "data", 32);
  const auto run = tiny_run(tmp.path / "data", tmp.path / "out");
  const auto report = experiments::run_e1(bundle, run);
  REQUIRE(report.rows.size() == 13);
  for (const auto& row : report.rows) {
    CHECK(!row.skipped);
    CHECK(row.eval.n_samples > 0);
    CHECK(row.eval.r2 <= 1.0);
  }
  // ERA5 columns present in every row's schema by construction: check via
  // the column count of a rebuilt matrix for one spec.
  experiments::emit_report(report, run.out_dir);
  CHECK(std::filesystem::exists(tmp.path / "out" / "results.csv"));
  CHECK(std::filesystem::exists(tmp.path / "out" / "results.md"));

  const std::string csv = slurp(tmp.path / "out" / "results.csv");
  CHECK(csv.find("dataset,strategy_s2,strategy_s1,orbit,era5_lag,r2,rmse,mae,n_samples,seed") == 0);
  std::size_t lines = 0;
  for (const char ch : csv) {
    if (ch == '\n') ++lines;
  }
  CHECK(lines == 14);  // header + 13 rows
}

TEST_CASE("reports are byte-identical across reruns") {
  TempDir tmp;
  experiments::generate_synthetic(tiny_synth(12), tmp.path / "data");
  const auto bundle = experiments::load_bundle(tmp.path / "data", 32);
  const auto run1 = tiny_run(tmp.path / "data", tmp.path / "out1");
  const auto run2 = tiny_run(tmp.path / "data", tmp.path / "out2");
  const auto r1 = experiments::run_e1(bundle, run1);
  const auto r2 = experiments::run_e1(bundle, run2);
  experiments::emit_report(r1, run1.out_dir);
  experiments::emit_report(r2, run2.out_dir);
  CHECK(slurp(tmp.path / "out1" / "results.csv") == slurp(tmp.path / "out2" / "results.csv"));
}

TEST_CASE("run_e2 sweeps the lag range and writes the curve") {
  TempDir tmp;
  auto synth = tiny_synth(15);
  experiments::generate_synthetic(synth, tmp.path / "data");
  const auto bundle = experiments::load_bundle(tmp.path / "data", 32);
  auto run = tiny_run(tmp.path / "data", tmp.path / "out");
  run.lag_min = 0;
  run.lag_max = 4;
  const auto result = experiments::run_e2(bundle, run);
  REQUIRE(result.curve.size() == 5);
  REQUIRE(result.report.rows.size() == 5);
  std::set<std::string> labels;
  for (const auto& row : result.report.rows) labels.insert(row.label);
  CHECK(labels.size() == 5);  // lag suffix keeps labels unique

  experiments::emit_report(result.report, run.out_dir, &result.curve);
  const std::string curve = slurp(tmp.path / "out" / "lag_curve.csv");
  CHECK(curve.find("lag,r2,rmse,mae") == 0);
  std::size_t lines = 0;
  for (const char ch : curve) {
    if (ch == '\n') ++lines;
  }
  CHECK(lines == 6);
}

TEST_CASE("lag-0 rows carry exactly 13 era5 columns") {
  features::FeatureSpec spec;
  spec.use_s2 = true;
  spec.era5_lookback = 0;
  const auto schema = features::column_schema(spec);
  std::size_t era5_cols = 0;
  for (const auto& name : schema) {
    if (name.find("_lag") != std::string::npos) ++era5_cols;
  }
  CHECK(era5_cols == 13);
}

TEST_CASE("run_e3 needs embeddings and evaluates the three rows") {
  TempDir tmp;
  experiments::generate_synthetic(tiny_synth(21), tmp.path / "data");
  auto bundle = experiments::load_bundle(tmp.path / "data", 32);
  const auto run = tiny_run(tmp.path / "data", tmp.path / "out");
  const auto report = experiments::run_e3(bundle, run);
  REQUIRE(report.rows.size() == 3);
  for (const auto& row : report.rows) CHECK(!row.skipped);

  bundle.embeddings.reset();
  CHECK_THROWS_AS(experiments::run_e3(bundle, run), core::ConfigError);
}

TEST_CASE("rows with an absent modality are skipped with a reason") {
  TempDir tmp;
  experiments::generate_synthetic(tiny_synth(33), tmp.path / "data");
  std::filesystem::remove_all(tmp.path / "data" / "patches");
  // Regenerate only S2 by rebuilding with s1 patches dropped: simplest is to
  // delete the S1 subdirectories from a fresh tree.
  experiments::generate_synthetic(tiny_synth(33), tmp.path / "data2");
  for (const auto& entry :
       std::filesystem::recursive_directory_iterator(tmp.path / "data2" / "patches")) {
    if (entry.is_directory() && entry.path().filename() == "S1") {
      std::filesystem::remove_all(entry.path());
      break;  // iterator invalidated; one removal is enough for the check
    }
  }
  const auto bundle2 = experiments::load_bundle(tmp.path / "data2", 32);
  const auto run = tiny_run(tmp.path / "data2", tmp.path / "out");
  const auto report = experiments::run_e1(bundle2, run);
  CHECK(report.rows.size() == 13);
}

TEST_CASE("e1 rows with no S1 data at all are skipped") {
  TempDir tmp;
  experiments::generate_synthetic(tiny_synth(40), tmp.path / "data");
  for (const auto& station_dir :
       std::filesystem::directory_iterator(tmp.path / "data" / "patches")) {
    std::filesystem::remove_all(station_dir.path() / "S1");
  }
  const auto bundle = experiments::load_bundle(tmp.path / "data", 32);
  CHECK(bundle.index.count_sensor(ingest::Sensor::kS1) == 0);
  const auto run = tiny_run(tmp.path / "data", tmp.path / "out");
  const auto report = experiments::run_e1(bundle, run);
  int skipped = 0;
  for (const auto& row : report.rows) {
    if (row.skipped) {
      ++skipped;
      CHECK(row.skip_reason.find("S1") != std::string::npos);
    }
  }
  CHECK(skipped == 12);  // all but the S2-only row
}

TEST_CASE("metric formatting is fixed to four decimals") {
  CHECK(experiments::format_metric(0.51423) == "0.5142");
  CHECK(experiments::format_metric(0.0) == "0.0000");
  CHECK(experiments::format_metric(1.0) == "1.0000");
  CHECK(experiments::format_metric(-0.25) == "-0.2500");
}

TEST_CASE("config file values apply and unknown keys fail") {
  TempDir tmp;
  const auto path = smest_test::write_file(tmp.path, "run.conf",
                                           "# comment\n"
                                           "folds = 7\n"
                                           "trees = 33\n"
                                           "lag_max = 12\n"
                                           "noise = 0.05\n");
  experiments::AppConfig cfg;
  experiments::apply_config_file(cfg, path);
  CHECK(cfg.run.folds == 7);
  CHECK(cfg.run.forest.n_trees == 33);
  CHECK(cfg.run.lag_max == 12);
  CHECK(cfg.synth.noise == doctest::Approx(0.05));

  const auto bad = smest_test::write_file(tmp.path, "bad.conf", "mystery = 1\n");
  experiments::AppConfig cfg2;
  CHECK_THROWS_AS(experiments::apply_config_file(cfg2, bad), core::ConfigError);
  const auto bad2 = smest_test::write_file(tmp.path, "bad2.conf", "folds = soon\n");
  CHECK_THROWS_AS(experiments::apply_config_file(cfg2, bad2), core::ConfigError);
}

TEST_CASE("dump-features writes the matrix csv") {
  TempDir tmp;
  experiments::generate_synthetic(tiny_synth(50), tmp.path / "data");
  const auto bundle = experiments::load_bundle(tmp.path / "data", 32);
  auto run = tiny_run(tmp.path / "data", tmp.path / "out");
  run.lag_min = 0;
  run.lag_max = 1;
  run.dump_features = (tmp.path / "features.csv").string();
  const auto result = experiments::run_e2(bundle, run);
  (void)result;
  REQUIRE(std::filesystem::exists(tmp.path / "features.csv"));
  const std::string head = slurp(tmp.path / "features.csv");
  CHECK(head.find("station_id,date,") == 0);
  CHECK(head.find(",sm\n") != std::string::npos);
}
