#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smest/core/rng.hpp"
#include "smest/features/matrix.hpp"

namespace smest::forest {

enum class MaxFeaturesRule { kThird, kSqrt, kAll };

const char* to_string(MaxFeaturesRule rule);
std::optional<MaxFeaturesRule> max_features_from_string(const std::string& text);

/// Candidate features per split under a rule; always at least 1.
int max_features_count(MaxFeaturesRule rule, int n_features);

/**
 * @brief Ensemble hyperparameters; the defaults are the pipeline's
 * "default settings" and are recorded in every experiment report.
 */
struct ForestParams {
  int n_trees = 100;
  MaxFeaturesRule max_features = MaxFeaturesRule::kThird;
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  int max_depth = 0;  // 0 = unlimited
  bool bootstrap = true;
  std::uint64_t seed = 0;
  /// Worker threads for tree fitting; 0 = hardware concurrency.
  int n_threads = 0;
};

/// Flattened tree node: internal nodes route x[feature] <= threshold left.
struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double prediction = 0.0;
  std::int32_t n = 0;

  [[nodiscard]] bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;

  [[nodiscard]] double predict_row(std::span<const double> row) const;
};

struct SplitCandidate {
  int feature = 0;
  double threshold = 0.0;
  /// Variance reduction n*Var(y) - n_L*Var(y_L) - n_R*Var(y_R).
  double reduction = 0.0;
};

/**
 * @brief Best variance-reduction split over the given feature subset.
 *
 * Candidate thresholds are midpoints between consecutive distinct sorted
 * values. Both children must hold at least min_samples_leaf rows. Returns
 * nothing when no candidate has strictly positive reduction. Ties break
 * toward the lower feature index, then the lower threshold.
 *
 * `x` is row-major n x p.
 */
std::optional<SplitCandidate> best_split(std::span<const double> x, std::size_t n, std::size_t p,
                                         std::span<const double> y,
                                         std::span<const int> feature_subset,
                                         int min_samples_leaf = 1);

/// Fits one CART regression tree; feature subsets are drawn fresh per node
/// from `rng`, so the result is a pure function of (data, params, rng state).
Tree fit_tree(std::span<const double> x, std::size_t n, std::size_t p, std::span<const double> y,
              const ForestParams& params, core::RngStream rng);

/**
 * @brief Bagged regression forest with frozen column schema and imputation state.
 */
class Forest {
 public:
  Forest() = default;
  Forest(ForestParams params, std::vector<std::string> column_schema,
         std::vector<double> imputation_medians, std::vector<Tree> trees)
      : params_(params),
        column_schema_(std::move(column_schema)),
        imputation_medians_(std::move(imputation_medians)),
        trees_(std::move(trees)) {}

  [[nodiscard]] const ForestParams& params() const { return params_; }
  [[nodiscard]] const std::vector<std::string>& column_schema() const { return column_schema_; }
  [[nodiscard]] const std::vector<double>& imputation_medians() const {
    return imputation_medians_;
  }
  [[nodiscard]] const std::vector<Tree>& trees() const { return trees_; }

  /// Mean of per-tree predictions for each row of an imputed row-major matrix.
  [[nodiscard]] std::vector<double> predict_rows(std::span<const double> x, std::size_t n) const;

  /// Schema-checked prediction: masked entries are filled with the stored
  /// training medians first. Throws listing missing/extra columns on mismatch.
  [[nodiscard]] std::vector<double> predict_matrix(const features::FeatureMatrix& matrix) const;

  /// Free-form metadata persisted alongside the model (dataset label etc.).
  std::map<std::string, std::string> meta;

 private:
  ForestParams params_;
  std::vector<std::string> column_schema_;
  std::vector<double> imputation_medians_;
  std::vector<Tree> trees_;
};

/**
 * @brief Fits n_trees trees on bootstrap resamples (tree t draws from stream
 * id t of params.seed), in parallel, with a scheduling-independent result.
 *
 * `x` must be fully imputed; non-finite entries raise a fit error naming the
 * column. The schema and medians are stored for prediction-time checks.
 */
Forest fit_forest(std::span<const double> x, std::size_t n, std::size_t p,
                  std::span<const double> y, const ForestParams& params,
                  std::vector<std::string> column_schema, std::vector<double> imputation_medians);

/// Convenience overload: imputes with whole-matrix medians, then fits.
Forest fit_forest(const features::FeatureMatrix& matrix, std::span<const double> y,
                  const ForestParams& params);

/// Versioned binary model serialization (magic "SMRF").
void save_forest(const Forest& forest, const std::filesystem::path& path);
Forest load_forest(const std::filesystem::path& path);

}  // namespace smest::forest
