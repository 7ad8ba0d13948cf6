#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "smest/features/matrix.hpp"
#include "smest/forest/forest.hpp"

namespace smest::eval {

/// Coefficient of determination 1 - SSE/SST. Throws when Var(y) = 0 or
/// lengths mismatch/empty.
double r2(std::span<const double> y, std::span<const double> y_hat);

/// Root mean squared error.
double rmse(std::span<const double> y, std::span<const double> y_hat);

/// Mean absolute error.
double mae(std::span<const double> y, std::span<const double> y_hat);

/**
 * @brief Station-level fold assignment; no station spans folds.
 */
struct FoldPlan {
  int k = 5;
  std::map<std::string, int> assignment;

  [[nodiscard]] int fold_of(const std::string& station_id) const;
};

/**
 * @brief Seeded station shuffle + round-robin assignment into k folds.
 *
 * Deterministic given (station set, k, seed); fold sizes differ by at most 1.
 * Throws ConfigError with fewer stations than folds.
 */
FoldPlan make_group_folds(const std::vector<std::string>& station_ids, int k, std::uint64_t seed);

struct FoldMetrics {
  int fold = 0;
  double r2 = 0.0;  // NaN when the fold's target variance is zero
  double rmse = 0.0;
  double mae = 0.0;
  std::size_t n_samples = 0;
};

struct EvalResult {
  double r2 = 0.0;
  double rmse = 0.0;
  double mae = 0.0;
  std::size_t n_samples = 0;
  std::vector<FoldMetrics> per_fold;
  std::size_t skipped_folds = 0;
};

/**
 * @brief Grouped K-fold cross-validation with pooled out-of-fold metrics.
 *
 * Per fold: imputation medians come from the training rows only, a forest is
 * fit on them, and the held-out stations' rows are predicted. The train/test
 * station disjointness is asserted on every run. Pooled metrics cover the
 * concatenated out-of-fold predictions; per-fold metrics are diagnostics.
 */
EvalResult cross_validate(const features::FeatureMatrix& matrix, std::span<const double> targets,
                          const FoldPlan& plan, const forest::ForestParams& params);

}  // namespace smest::eval
