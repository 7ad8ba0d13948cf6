#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "smest/core/error.hpp"
#include "smest/core/rng.hpp"
#include "smest/eval/evaluation.hpp"

using namespace smest;

TEST_CASE("metric closed forms on the three-point example") {
  const std::vector<double> y = {0.0, 0.2, 0.4};
  const std::vector<double> y_hat = {0.1, 0.2, 0.3};
  CHECK(eval::r2(y, y_hat) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(eval::mae(y, y_hat) == doctest::Approx(0.2 / 3.0).epsilon(1e-12));
  CHECK(eval::rmse(y, y_hat) == doctest::Approx(std::sqrt(0.02 / 3.0)).epsilon(1e-12));
}

TEST_CASE("perfect fit and mean predictor identities") {
  const std::vector<double> y = {0.1, 0.5, 0.9, 0.3};
  CHECK(eval::r2(y, y) == 1.0);
  CHECK(eval::rmse(y, y) == 0.0);
  CHECK(eval::mae(y, y) == 0.0);
  const double mean = (0.1 + 0.5 + 0.9 + 0.3) / 4.0;
  const std::vector<double> mean_pred(4, mean);
  CHECK(eval::r2(y, mean_pred) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("metric error paths") {
  const std::vector<double> y = {0.1, 0.2};
  const std::vector<double> shorter = {0.1};
  CHECK_THROWS_AS(eval::r2(y, shorter), core::ValidationError);
  CHECK_THROWS_AS(eval::rmse({}, {}), core::ValidationError);
  const std::vector<double> constant = {0.3, 0.3, 0.3};
  CHECK_THROWS_WITH_AS(eval::r2(constant, constant), doctest::Contains("undefined"),
                       core::ValidationError);
}

TEST_CASE("rmse dominates mae and both shift-invariant, r2 shift-invariant") {
  core::RngStream rng(808, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.uniform(20);
    std::vector<double> y(n), y_hat(n), y_s(n), y_hat_s(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.next_double();
      y_hat[i] = rng.next_double();
      y_s[i] = y[i] + 5.0;
      y_hat_s[i] = y_hat[i] + 5.0;
    }
    CHECK(eval::rmse(y, y_hat) >= eval::mae(y, y_hat) - 1e-15);
    CHECK(eval::rmse(y_s, y_hat_s) == doctest::Approx(eval::rmse(y, y_hat)).epsilon(1e-9));
    CHECK(eval::mae(y_s, y_hat_s) == doctest::Approx(eval::mae(y, y_hat)).epsilon(1e-9));
    bool constant = true;
    for (std::size_t i = 1; i < n; ++i) constant &= (y[i] == y[0]);
    if (!constant) {
      CHECK(eval::r2(y_s, y_hat_s) == doctest::Approx(eval::r2(y, y_hat)).epsilon(1e-9));
    }
  }
}

namespace {

std::vector<std::string> make_ids(int n) {
  std::vector<std::string> ids;
  char buf[16];
  for (int i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof(buf), "ST%04d", i);
    ids.emplace_back(buf);
  }
  return ids;
}

std::map<int, int> fold_sizes(const eval::FoldPlan& plan) {
  std::map<int, int> sizes;
  for (const auto& [id, fold] : plan.assignment) ++sizes[fold];
  return sizes;
}

}  // namespace

TEST_CASE("ten stations split five ways gives folds of two") {
  const auto plan = eval::make_group_folds(make_ids(10), 5, 1);
  for (const auto& [fold, size] : fold_sizes(plan)) CHECK(size == 2);
}

TEST_CASE("113 stations split five ways gives sizes 23,23,23,22,22") {
  const auto plan = eval::make_group_folds(make_ids(113), 5, 99);
  std::vector<int> sizes;
  for (const auto& [fold, size] : fold_sizes(plan)) sizes.push_back(size);
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<int>{22, 22, 23, 23, 23});
}

TEST_CASE("fold assignment is deterministic and seed-sensitive") {
  const auto ids = make_ids(30);
  const auto a = eval::make_group_folds(ids, 5, 7);
  const auto b = eval::make_group_folds(ids, 5, 7);
  CHECK(a.assignment == b.assignment);
  const auto c = eval::make_group_folds(ids, 5, 8);
  CHECK(a.assignment != c.assignment);

  // Input order must not matter.
  auto shuffled = ids;
  core::RngStream rng(1, 2);
  rng.shuffle(shuffled);
  const auto d = eval::make_group_folds(shuffled, 5, 7);
  CHECK(a.assignment == d.assignment);
}

TEST_CASE("fewer stations than folds is a configuration error") {
  CHECK_THROWS_AS(eval::make_group_folds(make_ids(4), 5, 1), core::ConfigError);
}

namespace {

/// Two-feature toy matrix: y is a deterministic step function of feature 0.
struct CvFixture {
  features::FeatureMatrix matrix{std::vector<std::string>{"x0", "x1"}};
  std::vector<double> targets;

  explicit CvFixture(int stations, int rows_per_station, bool constant_target = false) {
    core::RngStream rng(31, 0);
    for (int s = 0; s < stations; ++s) {
      const std::string id = "ST" + std::to_string(1000 + s);
      for (int r = 0; r < rows_per_station; ++r) {
        const double x0 = rng.next_double();
        const double row[2] = {x0, rng.next_double()};
        matrix.add_row({id, core::Date{r}}, row);
        targets.push_back(constant_target ? 0.5 : (x0 > 0.5 ? 0.8 : 0.2));
      }
    }
  }
};

}  // namespace

TEST_CASE("cross_validate learns a step function across stations") {
  CvFixture fx(6, 30);
  const auto plan = eval::make_group_folds(
      {"ST1000", "ST1001", "ST1002", "ST1003", "ST1004", "ST1005"}, 3, 5);
  forest::ForestParams params;
  params.n_trees = 30;
  params.seed = 11;
  const auto result = eval::cross_validate(fx.matrix, fx.targets, plan, params);
  CHECK(result.r2 > 0.9);
  CHECK(result.n_samples == fx.matrix.rows());
  CHECK(result.per_fold.size() == 3);
  std::size_t fold_total = 0;
  for (const auto& fm : result.per_fold) fold_total += fm.n_samples;
  CHECK(fold_total == fx.matrix.rows());  // every row predicted exactly once
}

TEST_CASE("constant targets hit the undefined-r2 error path") {
  CvFixture fx(4, 10, true);
  const auto plan =
      eval::make_group_folds({"ST1000", "ST1001", "ST1002", "ST1003"}, 2, 5);
  forest::ForestParams params;
  params.n_trees = 5;
  CHECK_THROWS_WITH_AS(eval::cross_validate(fx.matrix, fx.targets, plan, params),
                       doctest::Contains("undefined"), core::ValidationError);
}

TEST_CASE("row order does not change pooled metrics") {
  CvFixture fx(5, 20);
  std::vector<std::string> ids = {"ST1000", "ST1001", "ST1002", "ST1003", "ST1004"};
  const auto plan = eval::make_group_folds(ids, 5, 3);
  forest::ForestParams params;
  params.n_trees = 10;
  params.seed = 21;
  const auto base = eval::cross_validate(fx.matrix, fx.targets, plan, params);

  // Rebuild with shuffled row order.
  std::vector<std::size_t> order(fx.matrix.rows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  core::RngStream rng(17, 0);
  rng.shuffle(order);
  features::FeatureMatrix shuffled(fx.matrix.column_names());
  std::vector<double> shuffled_targets;
  for (const std::size_t i : order) {
    const auto row = fx.matrix.row(i);
    shuffled.add_row(fx.matrix.provenance()[i], row);
    shuffled_targets.push_back(fx.targets[i]);
  }
  const auto redo = eval::cross_validate(shuffled, shuffled_targets, plan, params);
  CHECK(redo.r2 == doctest::Approx(base.r2).epsilon(1e-12));
  CHECK(redo.rmse == doctest::Approx(base.rmse).epsilon(1e-12));
  CHECK(redo.mae == doctest::Approx(base.mae).epsilon(1e-12));
}

TEST_CASE("stations absent from the plan are rejected") {
  CvFixture fx(2, 5);
  eval::FoldPlan plan;
  plan.k = 2;
  plan.assignment["ST1000"] = 0;  // ST1001 missing
  forest::ForestParams params;
  CHECK_THROWS_AS(eval::cross_validate(fx.matrix, fx.targets, plan, params),
                  core::ValidationError);
}

TEST_CASE("folds without test rows are skipped with a count") {
  CvFixture fx(3, 10);
  eval::FoldPlan plan;
  plan.k = 4;
  plan.assignment["ST1000"] = 0;
  plan.assignment["ST1001"] = 1;
  plan.assignment["ST1002"] = 2;  // fold 3 has no stations
  forest::ForestParams params;
  params.n_trees = 5;
  const auto result = eval::cross_validate(fx.matrix, fx.targets, plan, params);
  CHECK(result.skipped_folds == 1);
  CHECK(result.n_samples == fx.matrix.rows());
}

TEST_CASE("imputation medians come from the training fold only") {
  // Feature x0 is informative but missing for every row of station B; if test
  // rows leaked into the median, the imputed value would differ.
  features::FeatureMatrix matrix(std::vector<std::string>{"x0"});
  std::vector<double> targets;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int r = 0; r < 10; ++r) {
    const double row[1] = {static_cast<double>(r)};
    matrix.add_row({"A", core::Date{r}}, row);
    targets.push_back(r < 5 ? 0.2 : 0.8);
  }
  for (int r = 0; r < 4; ++r) {
    const double row[1] = {nan};
    matrix.add_row({"B", core::Date{r}}, row);
    targets.push_back(0.5);
  }
  eval::FoldPlan plan;
  plan.k = 2;
  plan.assignment["A"] = 0;
  plan.assignment["B"] = 1;
  forest::ForestParams params;
  params.n_trees = 3;
  params.bootstrap = false;
  // Fold 1 tests B: its x0 imputes to median of A's x0 = 4.5 -> predicts A's
  // upper-branch value, not 0.5. The run must complete without leakage errors.
  const auto result = eval::cross_validate(matrix, targets, plan, params);
  CHECK(result.n_samples == 14);
}
