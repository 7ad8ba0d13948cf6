#include "smest/features/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "smest/core/error.hpp"

namespace smest::features {

using core::IoError;
using core::ValidationError;

FeatureMatrix::FeatureMatrix(std::vector<std::string> column_names)
    : column_names_(std::move(column_names)) {}

void FeatureMatrix::add_row(RowKey key, std::span<const double> values) {
  if (values.size() != cols()) {
    throw ValidationError("feature row for '" + key.station_id + "' has " +
                          std::to_string(values.size()) + " values, schema has " +
                          std::to_string(cols()));
  }
  provenance_.push_back(std::move(key));
  for (const double v : values) {
    const bool miss = !std::isfinite(v);
    values_.push_back(miss ? std::numeric_limits<double>::quiet_NaN() : v);
    missing_.push_back(miss ? 1 : 0);
  }
}

void FeatureMatrix::write_csv(const std::filesystem::path& path,
                              std::span<const double> targets) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "station_id,date";
  for (const auto& name : column_names_) out << ',' << name;
  out << ",sm\n";
  char buf[40];
  for (std::size_t r = 0; r < rows(); ++r) {
    out << provenance_[r].station_id << ',' << core::format_date(provenance_[r].date);
    for (std::size_t c = 0; c < cols(); ++c) {
      out << ',';
      if (!is_missing(r, c)) {
        std::snprintf(buf, sizeof(buf), "%.9g", at(r, c));
        out << buf;
      }
    }
    std::snprintf(buf, sizeof(buf), "%.9g", targets[r]);
    out << ',' << buf << '\n';
  }
}

std::vector<double> column_medians(const FeatureMatrix& matrix,
                                   std::span<const std::size_t> row_indices) {
  std::vector<double> medians(matrix.cols(), 0.0);
  std::vector<double> values;
  values.reserve(row_indices.size());
  for (std::size_t c = 0; c < matrix.cols(); ++c) {
    values.clear();
    for (const std::size_t r : row_indices) {
      if (!matrix.is_missing(r, c)) values.push_back(matrix.at(r, c));
    }
    if (values.empty()) continue;
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    medians[c] = (n % 2 == 1) ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  }
  return medians;
}

std::vector<double> impute_rows(const FeatureMatrix& matrix,
                                std::span<const std::size_t> row_indices,
                                std::span<const double> medians) {
  std::vector<double> out;
  out.reserve(row_indices.size() * matrix.cols());
  for (const std::size_t r : row_indices) {
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      out.push_back(matrix.is_missing(r, c) ? medians[c] : matrix.at(r, c));
    }
  }
  return out;
}

}  // namespace smest::features
