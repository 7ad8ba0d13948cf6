#include "smest/forest/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <thread>

#include "smest/core/error.hpp"

namespace smest::forest {

using core::IoError;
using core::ValidationError;

const char* to_string(MaxFeaturesRule rule) {
  switch (rule) {
    case MaxFeaturesRule::kThird: return "third";
    case MaxFeaturesRule::kSqrt: return "sqrt";
    case MaxFeaturesRule::kAll: return "all";
  }
  return "?";
}

std::optional<MaxFeaturesRule> max_features_from_string(const std::string& text) {
  if (text == "third") return MaxFeaturesRule::kThird;
  if (text == "sqrt") return MaxFeaturesRule::kSqrt;
  if (text == "all") return MaxFeaturesRule::kAll;
  return std::nullopt;
}

int max_features_count(MaxFeaturesRule rule, int n_features) {
  int m = n_features;
  switch (rule) {
    case MaxFeaturesRule::kThird: m = (n_features + 2) / 3; break;
    case MaxFeaturesRule::kSqrt:
      m = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_features))));
      break;
    case MaxFeaturesRule::kAll: m = n_features; break;
  }
  return std::max(1, std::min(m, n_features));
}

double Tree::predict_row(std::span<const double> row) const {
  std::size_t node = 0;
  while (!nodes[node].is_leaf()) {
    const TreeNode& nd = nodes[node];
    node = static_cast<std::size_t>(row[static_cast<std::size_t>(nd.feature)] <= nd.threshold
                                        ? nd.left
                                        : nd.right);
  }
  return nodes[node].prediction;
}

namespace {

/// Column-major copy for cache-friendly per-feature scans.
struct ColMatrix {
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<double> data;

  static ColMatrix from_row_major(std::span<const double> x, std::size_t n, std::size_t p) {
    ColMatrix m;
    m.n = n;
    m.p = p;
    m.data.resize(n * p);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < p; ++j) m.data[j * n + i] = x[i * p + j];
    }
    return m;
  }

  [[nodiscard]] const double* col(std::size_t j) const { return data.data() + j * n; }
};

struct SplitWorkspace {
  std::vector<std::pair<double, double>> pairs;  // (x, y) for the node's rows
  std::vector<int> scratch;
};

// Reduction identity used throughout: with S = sum(y), the variance reduction
// of a split equals S_L^2/n_L + S_R^2/n_R - S^2/n (the sum-of-squares terms
// cancel), so only target sums are scanned.
std::optional<SplitCandidate> best_split_node(const ColMatrix& xm, std::span<const double> y,
                                              std::span<const int> rows,
                                              std::span<const int> features, int min_samples_leaf,
                                              SplitWorkspace& ws) {
  const std::size_t n = rows.size();
  if (n < 2) return std::nullopt;

  double total = 0.0;
  double y_min = y[static_cast<std::size_t>(rows[0])];
  double y_max = y_min;
  for (const int r : rows) {
    const double v = y[static_cast<std::size_t>(r)];
    total += v;
    y_min = std::min(y_min, v);
    y_max = std::max(y_max, v);
  }
  if (y_min == y_max) return std::nullopt;  // pure node, zero reduction everywhere

  const double base = total * total / static_cast<double>(n);
  bool found = false;
  double best_score = 0.0;
  SplitCandidate best;

  ws.pairs.resize(n);
  for (const int feature : features) {
    const double* col = xm.col(static_cast<std::size_t>(feature));
    for (std::size_t i = 0; i < n; ++i) {
      const int r = rows[i];
      ws.pairs[i] = {col[r], y[static_cast<std::size_t>(r)]};
    }
    // Sorting by (x, y) makes prefix sums independent of row order.
    std::sort(ws.pairs.begin(), ws.pairs.end());
    if (ws.pairs.front().first == ws.pairs.back().first) continue;  // constant feature

    double left_sum = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left_sum += ws.pairs[i].second;
      if (ws.pairs[i].first == ws.pairs[i + 1].first) continue;
      const std::size_t n_left = i + 1;
      const std::size_t n_right = n - n_left;
      if (n_left < static_cast<std::size_t>(min_samples_leaf) ||
          n_right < static_cast<std::size_t>(min_samples_leaf)) {
        continue;
      }
      const double right_sum = total - left_sum;
      const double score = left_sum * left_sum / static_cast<double>(n_left) +
                           right_sum * right_sum / static_cast<double>(n_right);
      if (!found || score > best_score) {
        found = true;
        best_score = score;
        best.feature = feature;
        best.threshold = (ws.pairs[i].first + ws.pairs[i + 1].first) / 2.0;
      }
    }
  }
  if (!found) return std::nullopt;
  best.reduction = best_score - base;
  if (!(best.reduction > 0.0)) return std::nullopt;
  return best;
}

struct NodeTask {
  std::size_t node_index;
  std::size_t begin;
  std::size_t end;
  int depth;
};

Tree fit_tree_impl(const ColMatrix& xm, std::span<const double> y, std::vector<int> rows,
                   const ForestParams& params, core::RngStream& rng) {
  Tree tree;
  SplitWorkspace ws;
  std::vector<int> partition_scratch;
  const int m = max_features_count(params.max_features, static_cast<int>(xm.p));

  std::vector<NodeTask> stack;
  tree.nodes.emplace_back();
  stack.push_back({0, 0, rows.size(), 0});

  while (!stack.empty()) {
    const NodeTask task = stack.back();
    stack.pop_back();
    const std::span<int> node_rows(rows.data() + task.begin, task.end - task.begin);
    const std::size_t count = node_rows.size();

    double sum = 0.0;
    for (const int r : node_rows) sum += y[static_cast<std::size_t>(r)];
    TreeNode& node = tree.nodes[task.node_index];
    node.prediction = sum / static_cast<double>(count);
    node.n = static_cast<std::int32_t>(count);

    if (count < static_cast<std::size_t>(params.min_samples_split)) continue;
    if (params.max_depth > 0 && task.depth >= params.max_depth) continue;

    bool pure = true;
    for (const int r : node_rows) {
      if (y[static_cast<std::size_t>(r)] != y[static_cast<std::size_t>(node_rows[0])]) {
        pure = false;
        break;
      }
    }
    if (pure) continue;

    std::vector<int> subset = rng.sample_without_replacement(static_cast<int>(xm.p), m);
    std::sort(subset.begin(), subset.end());
    const auto split =
        best_split_node(xm, y, node_rows, subset, params.min_samples_leaf, ws);
    if (!split) continue;

    // Stable partition: left block keeps relative order, then right block.
    partition_scratch.clear();
    const double* col = xm.col(static_cast<std::size_t>(split->feature));
    std::size_t n_left = 0;
    for (const int r : node_rows) {
      if (col[r] <= split->threshold) {
        node_rows[n_left++] = r;
      } else {
        partition_scratch.push_back(r);
      }
    }
    std::copy(partition_scratch.begin(), partition_scratch.end(), node_rows.begin() + n_left);

    const std::size_t left_index = tree.nodes.size();
    tree.nodes.emplace_back();
    const std::size_t right_index = tree.nodes.size();
    tree.nodes.emplace_back();
    TreeNode& parent = tree.nodes[task.node_index];
    parent.feature = split->feature;
    parent.threshold = split->threshold;
    parent.left = static_cast<std::int32_t>(left_index);
    parent.right = static_cast<std::int32_t>(right_index);

    // Left is pushed last so it is processed first (preorder, matching the
    // per-node RNG draw sequence regardless of data).
    stack.push_back({right_index, task.begin + n_left, task.end, task.depth + 1});
    stack.push_back({left_index, task.begin, task.begin + n_left, task.depth + 1});
  }
  return tree;
}

}  // namespace

std::optional<SplitCandidate> best_split(std::span<const double> x, std::size_t n, std::size_t p,
                                         std::span<const double> y,
                                         std::span<const int> feature_subset,
                                         int min_samples_leaf) {
  const ColMatrix xm = ColMatrix::from_row_major(x, n, p);
  std::vector<int> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<int>(i);
  std::vector<int> features(feature_subset.begin(), feature_subset.end());
  std::sort(features.begin(), features.end());
  SplitWorkspace ws;
  return best_split_node(xm, y, rows, features, min_samples_leaf, ws);
}

Tree fit_tree(std::span<const double> x, std::size_t n, std::size_t p, std::span<const double> y,
              const ForestParams& params, core::RngStream rng) {
  if (n == 0) throw ValidationError("fit_tree requires at least one sample");
  const ColMatrix xm = ColMatrix::from_row_major(x, n, p);
  std::vector<int> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<int>(i);
  return fit_tree_impl(xm, y, std::move(rows), params, rng);
}

std::vector<double> Forest::predict_rows(std::span<const double> x, std::size_t n) const {
  const std::size_t p = column_schema_.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::span<const double> row = x.subspan(i * p, p);
    double sum = 0.0;
    for (const Tree& tree : trees_) sum += tree.predict_row(row);
    out[i] = sum / static_cast<double>(trees_.size());
  }
  return out;
}

std::vector<double> Forest::predict_matrix(const features::FeatureMatrix& matrix) const {
  if (matrix.column_names() != column_schema_) {
    std::string msg = "prediction matrix does not match the training schema;";
    for (const auto& name : column_schema_) {
      if (std::find(matrix.column_names().begin(), matrix.column_names().end(), name) ==
          matrix.column_names().end()) {
        msg += " missing: " + name + ";";
      }
    }
    for (const auto& name : matrix.column_names()) {
      if (std::find(column_schema_.begin(), column_schema_.end(), name) ==
          column_schema_.end()) {
        msg += " extra: " + name + ";";
      }
    }
    throw ValidationError(msg);
  }
  std::vector<std::size_t> all(matrix.rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const std::vector<double> x = features::impute_rows(matrix, all, imputation_medians_);
  return predict_rows(x, matrix.rows());
}

Forest fit_forest(std::span<const double> x, std::size_t n, std::size_t p,
                  std::span<const double> y, const ForestParams& params,
                  std::vector<std::string> column_schema, std::vector<double> imputation_medians) {
  if (n < 2) throw ValidationError("fit_forest requires at least 2 samples");
  if (p < 1) throw ValidationError("fit_forest requires at least 1 feature");
  if (column_schema.size() != p) {
    throw ValidationError("column schema size " + std::to_string(column_schema.size()) +
                          " does not match feature count " + std::to_string(p));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      if (!std::isfinite(x[i * p + j])) {
        throw ValidationError("fit_forest: non-finite value in column '" + column_schema[j] +
                              "' (row " + std::to_string(i) + ")");
      }
    }
  }

  const ColMatrix xm = ColMatrix::from_row_major(x, n, p);
  std::vector<Tree> trees(static_cast<std::size_t>(params.n_trees));

  const auto fit_one = [&](int t) {
    core::RngStream rng(params.seed, static_cast<std::uint64_t>(t));
    std::vector<int> rows(n);
    if (params.bootstrap) {
      for (std::size_t i = 0; i < n; ++i) {
        rows[i] = static_cast<int>(rng.uniform(static_cast<std::uint64_t>(n)));
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<int>(i);
    }
    trees[static_cast<std::size_t>(t)] = fit_tree_impl(xm, y, std::move(rows), params, rng);
  };

  int n_threads = params.n_threads > 0 ? params.n_threads
                                       : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min(n_threads, params.n_trees));
  if (n_threads == 1) {
    for (int t = 0; t < params.n_trees; ++t) fit_one(t);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(n_threads));
    for (int w = 0; w < n_threads; ++w) {
      workers.emplace_back([&] {
        for (int t = next.fetch_add(1); t < params.n_trees; t = next.fetch_add(1)) fit_one(t);
      });
    }
    for (auto& worker : workers) worker.join();
  }

  return Forest(params, std::move(column_schema), std::move(imputation_medians),
                std::move(trees));
}

Forest fit_forest(const features::FeatureMatrix& matrix, std::span<const double> y,
                  const ForestParams& params) {
  std::vector<std::size_t> all(matrix.rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  std::vector<double> medians = features::column_medians(matrix, all);
  const std::vector<double> x = features::impute_rows(matrix, all, medians);
  return fit_forest(x, matrix.rows(), matrix.cols(), y, params, matrix.column_names(),
                    std::move(medians));
}

namespace {

constexpr char kForestMagic[4] = {'S', 'M', 'R', 'F'};
constexpr std::uint16_t kForestVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

void write_string(std::ofstream& out, const std::string& s) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::ifstream& in) {
  const auto len = read_pod<std::uint32_t>(in);
  std::string s(len, '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  return s;
}

}  // namespace

void save_forest(const Forest& forest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model file '" + path.string() + "'");
  out.write(kForestMagic, 4);
  write_pod<std::uint16_t>(out, kForestVersion);
  const ForestParams& prm = forest.params();
  write_pod<std::int32_t>(out, prm.n_trees);
  write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(prm.max_features));
  write_pod<std::int32_t>(out, prm.min_samples_split);
  write_pod<std::int32_t>(out, prm.min_samples_leaf);
  write_pod<std::int32_t>(out, prm.max_depth);
  write_pod<std::uint8_t>(out, prm.bootstrap ? 1 : 0);
  write_pod<std::uint64_t>(out, prm.seed);

  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(forest.column_schema().size()));
  for (const auto& name : forest.column_schema()) write_string(out, name);
  for (const double m : forest.imputation_medians()) write_pod<double>(out, m);

  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(forest.meta.size()));
  for (const auto& [key, value] : forest.meta) {
    write_string(out, key);
    write_string(out, value);
  }

  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(forest.trees().size()));
  for (const Tree& tree : forest.trees()) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(tree.nodes.size()));
    for (const TreeNode& node : tree.nodes) {
      write_pod<std::int32_t>(out, node.feature);
      write_pod<double>(out, node.threshold);
      write_pod<std::int32_t>(out, node.left);
      write_pod<std::int32_t>(out, node.right);
      write_pod<double>(out, node.prediction);
      write_pod<std::int32_t>(out, node.n);
    }
  }
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

Forest load_forest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file '" + path.string() + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kForestMagic, 4) != 0) {
    throw ValidationError("'" + path.string() + "' is not a forest model file");
  }
  const auto version = read_pod<std::uint16_t>(in);
  if (version != kForestVersion) {
    throw ValidationError("unsupported model version " + std::to_string(version));
  }
  ForestParams prm;
  prm.n_trees = read_pod<std::int32_t>(in);
  prm.max_features = static_cast<MaxFeaturesRule>(read_pod<std::uint8_t>(in));
  prm.min_samples_split = read_pod<std::int32_t>(in);
  prm.min_samples_leaf = read_pod<std::int32_t>(in);
  prm.max_depth = read_pod<std::int32_t>(in);
  prm.bootstrap = read_pod<std::uint8_t>(in) != 0;
  prm.seed = read_pod<std::uint64_t>(in);

  const auto n_cols = read_pod<std::uint32_t>(in);
  std::vector<std::string> schema;
  schema.reserve(n_cols);
  for (std::uint32_t i = 0; i < n_cols; ++i) schema.push_back(read_string(in));
  std::vector<double> medians(n_cols);
  for (auto& m : medians) m = read_pod<double>(in);

  const auto n_meta = read_pod<std::uint32_t>(in);
  std::map<std::string, std::string> meta;
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string key = read_string(in);
    meta[std::move(key)] = read_string(in);
  }

  const auto n_trees = read_pod<std::uint32_t>(in);
  std::vector<Tree> trees(n_trees);
  for (auto& tree : trees) {
    const auto n_nodes = read_pod<std::uint32_t>(in);
    tree.nodes.resize(n_nodes);
    for (auto& node : tree.nodes) {
      node.feature = read_pod<std::int32_t>(in);
      node.threshold = read_pod<double>(in);
      node.left = read_pod<std::int32_t>(in);
      node.right = read_pod<std::int32_t>(in);
      node.prediction = read_pod<double>(in);
      node.n = read_pod<std::int32_t>(in);
    }
  }
  if (!in) throw ValidationError("'" + path.string() + "' is truncated");

  Forest forest(prm, std::move(schema), std::move(medians), std::move(trees));
  forest.meta = std::move(meta);
  return forest;
}

}  // namespace smest::forest
