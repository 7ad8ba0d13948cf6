#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "smest/forest/forest.hpp"

namespace smest::experiments {

/**
 * @brief Resolved run parameters shared by the experiment commands.
 *
 * Populated from the optional key=value config file, then overridden by CLI
 * flags; the final snapshot is embedded in every report.
 */
struct RunConfig {
  std::string data_dir;
  std::string out_dir;
  int folds = 5;
  std::uint64_t seed = 42;
  int era5_lag = 20;      // E1/E3 lookback
  int lag_min = 0;        // E2 sweep range
  int lag_max = 20;
  int patch_window = 32;
  forest::ForestParams forest;
  std::string dump_features;  // empty = no dump

  /// Sorted key=value pairs describing this configuration.
  [[nodiscard]] std::vector<std::pair<std::string, std::string>> snapshot() const;
};

/// Generator parameters; see synthetic.hpp for the data model itself.
struct SynthConfig {
  int stations = 20;
  std::string start_date = "2021-01-01";
  int days = 270;
  int s2_revisit = 5;
  int s1_revisit = 6;
  int patch_size = 32;
  double cloud_prob = 0.10;
  double noise = 0.0;
  int true_lag = 6;
  std::uint64_t seed = 42;

  [[nodiscard]] std::vector<std::pair<std::string, std::string>> snapshot() const;
};

struct AppConfig {
  RunConfig run;
  SynthConfig synth;
};

/**
 * @brief Applies a `key = value` config file (# comments, blank lines ok).
 *
 * Unknown keys and unparseable values raise ConfigError citing the line.
 */
void apply_config_file(AppConfig& config, const std::filesystem::path& path);

}  // namespace smest::experiments
