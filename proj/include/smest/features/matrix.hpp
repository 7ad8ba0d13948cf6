#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "smest/core/date.hpp"

namespace smest::features {

/**
 * @brief Dense numeric design matrix with named columns and a missing mask.
 *
 * Missing entries hold NaN and are flagged in the mask; they must be imputed
 * before any model arithmetic. Each row carries (station_id, target_date)
 * provenance for grouped cross-validation.
 */
class FeatureMatrix {
 public:
  struct RowKey {
    std::string station_id;
    core::Date date;
  };

  FeatureMatrix() = default;
  explicit FeatureMatrix(std::vector<std::string> column_names);

  [[nodiscard]] std::size_t rows() const { return provenance_.size(); }
  [[nodiscard]] std::size_t cols() const { return column_names_.size(); }
  [[nodiscard]] const std::vector<std::string>& column_names() const { return column_names_; }
  [[nodiscard]] const std::vector<RowKey>& provenance() const { return provenance_; }

  /// Appends a row; values.size() must equal cols(). NaN entries are masked.
  void add_row(RowKey key, std::span<const double> values);

  [[nodiscard]] double at(std::size_t row, std::size_t col) const {
    return values_[row * cols() + col];
  }
  [[nodiscard]] bool is_missing(std::size_t row, std::size_t col) const {
    return missing_[row * cols() + col] != 0;
  }
  [[nodiscard]] std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values_).subspan(r * cols(), cols());
  }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }
  [[nodiscard]] const std::vector<std::uint8_t>& missing_mask() const { return missing_; }

  /// Dumps `station_id,date,<columns...>,sm`; missing entries are empty fields.
  void write_csv(const std::filesystem::path& path, std::span<const double> targets) const;

 private:
  std::vector<std::string> column_names_;
  std::vector<double> values_;
  std::vector<std::uint8_t> missing_;
  std::vector<RowKey> provenance_;
};

/**
 * @brief Per-column medians over the given rows, missing entries excluded.
 *
 * Columns with no observed value fall back to 0.0 so imputation stays total.
 */
std::vector<double> column_medians(const FeatureMatrix& matrix,
                                   std::span<const std::size_t> row_indices);

/// Row-major copy of the selected rows with masked entries replaced by medians.
std::vector<double> impute_rows(const FeatureMatrix& matrix,
                                std::span<const std::size_t> row_indices,
                                std::span<const double> medians);

}  // namespace smest::features
