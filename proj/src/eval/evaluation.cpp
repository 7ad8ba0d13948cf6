#include "smest/eval/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "smest/core/error.hpp"
#include "smest/core/rng.hpp"

namespace smest::eval {

using core::ConfigError;
using core::ValidationError;

namespace {

void check_lengths(std::span<const double> y, std::span<const double> y_hat) {
  if (y.size() != y_hat.size()) {
    throw ValidationError("metric length mismatch: " + std::to_string(y.size()) + " vs " +
                          std::to_string(y_hat.size()));
  }
  if (y.empty()) throw ValidationError("metrics require at least one sample");
}

}  // namespace

double r2(std::span<const double> y, std::span<const double> y_hat) {
  check_lengths(y, y_hat);
  double mean = 0.0;
  for (const double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double sse = 0.0;
  double sst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sse += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
    sst += (y[i] - mean) * (y[i] - mean);
  }
  if (sst == 0.0) throw ValidationError("r2 undefined: Var(y) = 0");
  return 1.0 - sse / sst;
}

double rmse(std::span<const double> y, std::span<const double> y_hat) {
  check_lengths(y, y_hat);
  double sse = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sse += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
  }
  return std::sqrt(sse / static_cast<double>(y.size()));
}

double mae(std::span<const double> y, std::span<const double> y_hat) {
  check_lengths(y, y_hat);
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) sum += std::abs(y[i] - y_hat[i]);
  return sum / static_cast<double>(y.size());
}

int FoldPlan::fold_of(const std::string& station_id) const {
  const auto it = assignment.find(station_id);
  if (it == assignment.end()) {
    throw ValidationError("station '" + station_id + "' is not in the fold plan");
  }
  return it->second;
}

FoldPlan make_group_folds(const std::vector<std::string>& station_ids, int k,
                          std::uint64_t seed) {
  if (k < 1) throw ConfigError("fold count must be >= 1, got " + std::to_string(k));
  if (station_ids.size() < static_cast<std::size_t>(k)) {
    throw ConfigError("cannot make " + std::to_string(k) + " folds from " +
                      std::to_string(station_ids.size()) + " stations");
  }
  std::vector<std::string> ids = station_ids;
  std::sort(ids.begin(), ids.end());
  core::RngStream rng(seed, 0);
  rng.shuffle(ids);
  FoldPlan plan;
  plan.k = k;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    plan.assignment[ids[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  }
  return plan;
}

EvalResult cross_validate(const features::FeatureMatrix& matrix, std::span<const double> targets,
                          const FoldPlan& plan, const forest::ForestParams& params) {
  const std::size_t n = matrix.rows();
  if (targets.size() != n) {
    throw ValidationError("target vector length " + std::to_string(targets.size()) +
                          " does not match matrix rows " + std::to_string(n));
  }
  std::vector<int> row_fold(n);
  for (std::size_t i = 0; i < n; ++i) {
    row_fold[i] = plan.fold_of(matrix.provenance()[i].station_id);
  }

  EvalResult result;
  std::vector<double> pooled_y;
  std::vector<double> pooled_pred;
  pooled_y.reserve(n);
  pooled_pred.reserve(n);

  // Canonical row order per fold: bootstrap resampling and metric pooling
  // then come out identical for any permutation of the input rows.
  const auto by_provenance = [&](std::size_t a, std::size_t b) {
    const auto& ka = matrix.provenance()[a];
    const auto& kb = matrix.provenance()[b];
    if (ka.station_id != kb.station_id) return ka.station_id < kb.station_id;
    return ka.date < kb.date;
  };

  for (int fold = 0; fold < plan.k; ++fold) {
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    for (std::size_t i = 0; i < n; ++i) {
      (row_fold[i] == fold ? test_rows : train_rows).push_back(i);
    }
    std::sort(train_rows.begin(), train_rows.end(), by_provenance);
    std::sort(test_rows.begin(), test_rows.end(), by_provenance);
    if (test_rows.empty()) {
      ++result.skipped_folds;
      continue;
    }
    if (train_rows.empty()) {
      throw ValidationError("fold " + std::to_string(fold) + " leaves no training rows");
    }

    // Leakage guard, asserted on every run: no station may appear on both sides.
    std::set<std::string> train_stations;
    for (const std::size_t i : train_rows) {
      train_stations.insert(matrix.provenance()[i].station_id);
    }
    for (const std::size_t i : test_rows) {
      if (train_stations.count(matrix.provenance()[i].station_id) != 0) {
        throw ValidationError("station leakage in fold " + std::to_string(fold) + ": '" +
                              matrix.provenance()[i].station_id + "' in both train and test");
      }
    }

    const std::vector<double> medians = features::column_medians(matrix, train_rows);
    const std::vector<double> x_train = features::impute_rows(matrix, train_rows, medians);
    std::vector<double> y_train;
    y_train.reserve(train_rows.size());
    for (const std::size_t i : train_rows) y_train.push_back(targets[i]);

    forest::ForestParams fold_params = params;
    fold_params.seed = core::derive_seed(params.seed, 0x1000 + static_cast<std::uint64_t>(fold));
    const forest::Forest model =
        forest::fit_forest(x_train, train_rows.size(), matrix.cols(), y_train, fold_params,
                           matrix.column_names(), medians);

    const std::vector<double> x_test = features::impute_rows(matrix, test_rows, medians);
    const std::vector<double> preds = model.predict_rows(x_test, test_rows.size());

    FoldMetrics fm;
    fm.fold = fold;
    fm.n_samples = test_rows.size();
    std::vector<double> y_test;
    y_test.reserve(test_rows.size());
    for (const std::size_t i : test_rows) y_test.push_back(targets[i]);
    fm.rmse = rmse(y_test, preds);
    fm.mae = mae(y_test, preds);
    try {
      fm.r2 = r2(y_test, preds);
    } catch (const ValidationError&) {
      fm.r2 = std::numeric_limits<double>::quiet_NaN();  // degenerate fold target
    }
    result.per_fold.push_back(fm);

    pooled_y.insert(pooled_y.end(), y_test.begin(), y_test.end());
    pooled_pred.insert(pooled_pred.end(), preds.begin(), preds.end());
  }

  if (pooled_y.empty()) {
    throw ValidationError("cross-validation produced no out-of-fold predictions");
  }
  result.n_samples = pooled_y.size();
  result.r2 = r2(pooled_y, pooled_pred);
  result.rmse = rmse(pooled_y, pooled_pred);
  result.mae = mae(pooled_y, pooled_pred);
  return result;
}

}  // namespace smest::eval
