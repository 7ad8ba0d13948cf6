#include "smest/experiments/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>

#include "smest/core/error.hpp"

namespace smest::experiments {

using core::ConfigError;
using core::IoError;

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

long parse_int(const std::string& value, const std::string& key, int line) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE) {
    throw ConfigError("config line " + std::to_string(line) + ": key '" + key +
                      "': not an integer: '" + value + "'");
  }
  return v;
}

double parse_float(const std::string& value, const std::string& key, int line) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE) {
    throw ConfigError("config line " + std::to_string(line) + ": key '" + key +
                      "': not a number: '" + value + "'");
  }
  return v;
}

bool parse_bool(const std::string& value, const std::string& key, int line) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config line " + std::to_string(line) + ": key '" + key +
                    "': expected true/false, got '" + value + "'");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> RunConfig::snapshot() const {
  std::vector<std::pair<std::string, std::string>> out = {
      {"bootstrap", forest.bootstrap ? "true" : "false"},
      {"data_dir", data_dir},
      {"era5_lag", std::to_string(era5_lag)},
      {"folds", std::to_string(folds)},
      {"lag_max", std::to_string(lag_max)},
      {"lag_min", std::to_string(lag_min)},
      {"max_depth", std::to_string(forest.max_depth)},
      {"max_features", forest::to_string(forest.max_features)},
      {"min_samples_leaf", std::to_string(forest.min_samples_leaf)},
      {"min_samples_split", std::to_string(forest.min_samples_split)},
      {"out_dir", out_dir},
      {"patch_window", std::to_string(patch_window)},
      {"seed", std::to_string(seed)},
      {"trees", std::to_string(forest.n_trees)},
  };
  return out;
}

std::vector<std::pair<std::string, std::string>> SynthConfig::snapshot() const {
  return {
      {"cloud_prob", format_double(cloud_prob)},
      {"days", std::to_string(days)},
      {"noise", format_double(noise)},
      {"patch_size", std::to_string(patch_size)},
      {"s1_revisit", std::to_string(s1_revisit)},
      {"s2_revisit", std::to_string(s2_revisit)},
      {"seed", std::to_string(seed)},
      {"start_date", start_date},
      {"stations", std::to_string(stations)},
      {"true_lag", std::to_string(true_lag)},
  };
}

void apply_config_file(AppConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));

    if (key == "data_dir") {
      config.run.data_dir = value;
    } else if (key == "out_dir") {
      config.run.out_dir = value;
    } else if (key == "folds") {
      config.run.folds = static_cast<int>(parse_int(value, key, line_no));
    } else if (key == "seed") {
      config.run.seed = static_cast<std::uint64_t>(parse_int(value, key, line_no));
      config.synth.seed = config.run.seed;
    } else if (key == "era5_lag") {
      config.run.era5_lag = static_cast<int>(parse_int(value, key, line_no));
    } else if (key == "lag_min") {
      config.run.lag_min = static_cast<int>(parse_int(value, key, line_no));
    } else if (key == "lag_max") {
      config.run.lag_max = static_cast<int>(parse_int(value, key, line_no));
    } else if (key == "patch_window") {
      config.run.patch_window = static_cast<int>(parse_int(value, key, line_no));
    } else if (key == "trees") {
      config.run.forest.n_trees = static_cast<int>(parse_int(value, key, line_no));
    } else if (key == "max_features") {
      const auto rule = forest::max_features_from_string(value);
      if (!rule) {
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": max_features must be third|sqrt|all, got '" + value + "'");
      }
      config.run.forest.max_features = *rule;
    } else if (key == "min_samples_split") {
      config.run.forest.min_samples_split = static_cast<int>(parse_int(value, key, line_no));
    } else if (key == "min_samples_leaf") {
      config.run.forest.min_samples_leaf = static_cast<int>(parse_int(value, key, line_no));
    } else if (key == "max_depth") {
      config.run.forest.max_depth = static_cast<int>(parse_int(value, key, line_no));
    } else if (key == "bootstrap") {
      config.run.forest.bootstrap = parse_bool(value, key, line_no);
    } else if (key == "threads") {
      config.run.forest.n_threads = static_cast<int>(parse_int(value, key, line_no));
    } else if (key == "dump_features") {
      config.run.dump_features = value;
    } else if (key == "stations") {
      config.synth.stations = static_cast<int>(parse_int(value, key, line_no));
    } else if (key == "start_date") {
      config.synth.start_date = value;
    } else if (key == "days") {
      config.synth.days = static_cast<int>(parse_int(value, key, line_no));
    } else if (key == "s2_revisit") {
      config.synth.s2_revisit = static_cast<int>(parse_int(value, key, line_no));
    } else if (key == "s1_revisit") {
      config.synth.s1_revisit = static_cast<int>(parse_int(value, key, line_no));
    } else if (key == "patch_size") {
      config.synth.patch_size = static_cast<int>(parse_int(value, key, line_no));
    } else if (key == "cloud_prob") {
      config.synth.cloud_prob = parse_float(value, key, line_no);
    } else if (key == "noise") {
      config.synth.noise = parse_float(value, key, line_no);
    } else if (key == "true_lag") {
      config.synth.true_lag = static_cast<int>(parse_int(value, key, line_no));
    } else {
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
}

}  // namespace smest::experiments
