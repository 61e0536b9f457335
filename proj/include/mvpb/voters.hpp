// Copyright 2026 The mvpb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Per-view voter sets (CART random forests) and the prediction cache every
// downstream statistic is reduced from.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "mvpb/common.hpp"
#include "mvpb/data.hpp"

namespace mvpb {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int label = 0;
};

/// Binary decision tree; samples with x[feature] <= threshold go left.
struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::size_t num_features = 0;

  int predict(std::span<const double> x) const {
    int k = 0;
    while (nodes[static_cast<std::size_t>(k)].feature >= 0) {
      const TreeNode& n = nodes[static_cast<std::size_t>(k)];
      k = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(k)].label;
  }

  int depth() const { return depth_from(0); }

  static DecisionTree constant(int label, std::size_t num_features) {
    DecisionTree t;
    t.num_features = num_features;
    t.nodes.push_back(TreeNode{-1, 0.0, -1, -1, label});
    return t;
  }

 private:
  int depth_from(int k) const {
    const TreeNode& n = nodes[static_cast<std::size_t>(k)];
    if (n.feature < 0) return 0;
    return 1 + std::max(depth_from(n.left), depth_from(n.right));
  }
};

struct ViewEnsemble {
  std::vector<DecisionTree> trees;
  std::size_t view = 0;
};

enum class DepthPreset { stump, weak, strong, strong20 };

inline int depth_of(DepthPreset p) {
  switch (p) {
    case DepthPreset::stump: return 1;
    case DepthPreset::weak: return 3;
    case DepthPreset::strong: return 6;
    case DepthPreset::strong20: return 20;
  }
  return 1;
}

struct ForestConfig {
  int n_trees = 100;
  int max_depth = 1;
  std::uint64_t seed = 0;
  bool bootstrap = true;
};

namespace detail {

inline int majority_label(std::span<const int> counts) {
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

inline double gini(std::span<const int> counts, int total) {
  if (total == 0) return 0.0;
  double s = 0.0;
  for (int c : counts) {
    const double p = static_cast<double>(c) / total;
    s += p * p;
  }
  return 1.0 - s;
}

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;  // weighted child impurity; lower is better
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& X, const Labels& y, int num_classes, int max_depth, std::mt19937_64& rng)
      : X_(X), y_(y), C_(num_classes), max_depth_(max_depth), rng_(rng) {
    n_candidates_ = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(X.cols))));
  }

  DecisionTree build(std::vector<std::size_t> samples) {
    tree_.num_features = X_.cols;
    grow(samples, 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<std::size_t>& samples, int depth) {
    std::vector<int> counts(static_cast<std::size_t>(C_), 0);
    for (std::size_t i : samples) ++counts[static_cast<std::size_t>(y_[i])];
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(TreeNode{-1, 0.0, -1, -1, majority_label(counts)});

    const bool pure = std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; }) <= 1;
    if (depth >= max_depth_ || pure || samples.size() < 2) return id;

    const SplitChoice best = find_split(samples);
    if (best.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (std::size_t i : samples)
      (X_(i, static_cast<std::size_t>(best.feature)) <= best.threshold ? left : right).push_back(i);
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    TreeNode& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  SplitChoice find_split(const std::vector<std::size_t>& samples) {
    std::vector<std::size_t> features(X_.cols);
    std::iota(features.begin(), features.end(), std::size_t{0});
    const std::size_t k = std::min(n_candidates_, features.size());
    // partial Fisher-Yates: first k entries are a uniform draw without replacement
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, features.size() - 1);
      std::swap(features[i], features[pick(rng_)]);
    }

    SplitChoice best;
    best.score = std::numeric_limits<double>::infinity();
    const int n = static_cast<int>(samples.size());
    std::vector<std::pair<double, int>> column(samples.size());
    std::vector<int> left_counts(static_cast<std::size_t>(C_)), right_counts(static_cast<std::size_t>(C_));
    for (std::size_t f = 0; f < k; ++f) {
      const std::size_t feat = features[f];
      for (std::size_t s = 0; s < samples.size(); ++s) column[s] = {X_(samples[s], feat), y_[samples[s]]};
      std::sort(column.begin(), column.end());
      std::fill(left_counts.begin(), left_counts.end(), 0);
      std::fill(right_counts.begin(), right_counts.end(), 0);
      for (const auto& [x, y] : column) ++right_counts[static_cast<std::size_t>(y)];
      for (int s = 0; s + 1 < n; ++s) {
        const int y = column[static_cast<std::size_t>(s)].second;
        ++left_counts[static_cast<std::size_t>(y)];
        --right_counts[static_cast<std::size_t>(y)];
        const double a = column[static_cast<std::size_t>(s)].first;
        const double b = column[static_cast<std::size_t>(s) + 1].first;
        if (!(a < b)) continue;
        const int nl = s + 1;
        const int nr = n - nl;
        const double score = (nl * gini(left_counts, nl) + nr * gini(right_counts, nr)) / n;
        if (score < best.score) {
          best.score = score;
          best.feature = static_cast<int>(feat);
          best.threshold = 0.5 * (a + b);
          if (!(best.threshold < b)) best.threshold = a;  // midpoint rounded onto b
        }
      }
    }
    return best;
  }

  const Matrix& X_;
  const Labels& y_;
  int C_;
  int max_depth_;
  std::mt19937_64& rng_;
  std::size_t n_candidates_;
  DecisionTree tree_;
};

}  // namespace detail

/// Per-tree RNG seed; identical for serial and parallel training.
inline std::uint64_t tree_seed(std::uint64_t seed, std::size_t view, std::size_t tree) {
  return seed ^ static_cast<std::uint64_t>(view * 10007 + tree);
}

/// Random forest on one view: bootstrap resamples, ceil(sqrt(d)) candidate
/// features per split, Gini impurity, majority leaves (ties to the lowest id).
inline ViewEnsemble train_forest(const Matrix& X, const Labels& y, int num_classes, const ForestConfig& cfg,
                                 std::size_t view = 0) {
  require(X.rows >= 1 && X.rows == y.size(), "train_forest: need >= 1 sample with one label each");
  require(cfg.n_trees >= 1 && cfg.max_depth >= 0, "train_forest: bad config");
  std::vector<bool> present(static_cast<std::size_t>(num_classes), false);
  for (int c : y) {
    require(c >= 0 && c < num_classes, "train_forest: label out of range");
    present[static_cast<std::size_t>(c)] = true;
  }
  require(std::count(present.begin(), present.end(), true) >= 2, "train_forest: single-class input");

  ViewEnsemble ens;
  ens.view = view;
  for (int t = 0; t < cfg.n_trees; ++t) {
    std::mt19937_64 rng(tree_seed(cfg.seed, view, static_cast<std::size_t>(t)));
    std::vector<std::size_t> samples(X.rows);
    if (cfg.bootstrap) {
      std::uniform_int_distribution<std::size_t> draw(0, X.rows - 1);
      for (auto& s : samples) s = draw(rng);
    } else {
      std::iota(samples.begin(), samples.end(), std::size_t{0});
    }
    detail::TreeBuilder builder(X, y, num_classes, cfg.max_depth, rng);
    ens.trees.push_back(builder.build(std::move(samples)));
  }
  return ens;
}

// ---------------------------------------------------------------------------
// Prediction cache

/// Row-major (voters x samples) matrix of predicted class ids.
struct PredictionMatrix {
  std::size_t voters = 0;
  std::size_t samples = 0;
  std::vector<std::int32_t> data;

  std::int32_t operator()(std::size_t h, std::size_t j) const { return data[h * samples + j]; }
  std::int32_t& operator()(std::size_t h, std::size_t j) { return data[h * samples + j]; }
  bool operator==(const PredictionMatrix&) const = default;
};

/// Sample-column range [begin, end).
struct Block {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool operator==(const Block&) const = default;
};

/// Predictions of every voter of every view on the labeled-train,
/// unlabeled-train and test columns, in that order.
struct PredictionCache {
  std::vector<PredictionMatrix> pred;  // one per view
  int num_classes = 0;
  Block labeled;
  Block unlabeled;
  Block test;

  std::size_t num_views() const { return pred.size(); }
  std::size_t num_samples() const { return test.end; }
  std::vector<std::size_t> voters_per_view() const {
    std::vector<std::size_t> n;
    for (const auto& p : pred) n.push_back(p.voters);
    return n;
  }
  bool operator==(const PredictionCache&) const = default;
};

inline void validate(const PredictionCache& c) {
  require(!c.pred.empty(), "prediction cache has no views");
  require(c.labeled.begin == 0 && c.labeled.end == c.unlabeled.begin && c.unlabeled.end == c.test.begin &&
              c.labeled.begin <= c.labeled.end && c.unlabeled.begin <= c.unlabeled.end && c.test.begin <= c.test.end,
          "prediction cache: block offsets must partition the column range");
  for (const auto& p : c.pred) {
    require(p.samples == c.num_samples(), "prediction cache: column count mismatch");
    require(p.voters >= 1, "prediction cache: view without voters");
    for (auto y : p.data) require(y >= 0 && y < c.num_classes, "prediction cache: class id out of range");
  }
}

/// Feature blocks of one view, concatenated in cache column order.
inline PredictionCache predict_cache(const std::vector<ViewEnsemble>& ensembles, int num_classes,
                                     const std::vector<Matrix>& labeled, const std::vector<Matrix>& unlabeled,
                                     const std::vector<Matrix>& test) {
  const std::size_t V = labeled.size();
  require(ensembles.size() == V, "predict_cache: ensembles must cover every view");
  require(unlabeled.empty() || unlabeled.size() == V, "predict_cache: unlabeled block must cover every view");
  require(test.empty() || test.size() == V, "predict_cache: test block must cover every view");

  PredictionCache cache;
  cache.num_classes = num_classes;
  const std::size_t nl = labeled.front().rows;
  const std::size_t nu = unlabeled.empty() ? 0 : unlabeled.front().rows;
  const std::size_t nt = test.empty() ? 0 : test.front().rows;
  cache.labeled = {0, nl};
  cache.unlabeled = {nl, nl + nu};
  cache.test = {nl + nu, nl + nu + nt};

  for (std::size_t v = 0; v < V; ++v) {
    const auto& ens = ensembles[v];
    PredictionMatrix P;
    P.voters = ens.trees.size();
    P.samples = nl + nu + nt;
    P.data.resize(P.voters * P.samples);
    auto fill = [&](const Matrix& X, std::size_t offset) {
      for (std::size_t h = 0; h < P.voters; ++h) {
        require(ens.trees[h].num_features == X.cols,
                "predict_cache: feature count mismatch in view " + std::to_string(v + 1));
        for (std::size_t i = 0; i < X.rows; ++i) P(h, offset + i) = ens.trees[h].predict(X.row(i));
      }
    };
    fill(labeled[v], 0);
    if (!unlabeled.empty()) fill(unlabeled[v], nl);
    if (!test.empty()) fill(test[v], nl + nu);
    cache.pred.push_back(std::move(P));
  }
  return cache;
}

/// Loads `predictions_1.csv .. predictions_V.csv` (rows = voters, columns = samples).
inline PredictionCache load_prediction_cache(const std::filesystem::path& dir, std::size_t V, int num_classes,
                                             std::size_t n_labeled, std::size_t n_unlabeled) {
  PredictionCache cache;
  cache.num_classes = num_classes;
  for (std::size_t v = 1; v <= V; ++v) {
    const auto file = dir / ("predictions_" + std::to_string(v) + ".csv");
    const auto rows = detail::read_csv_reals(file);
    require(!rows.empty(), file.string() + ": no voters");
    PredictionMatrix P;
    P.voters = rows.size();
    P.samples = rows.front().size();
    for (const auto& r : rows)
      for (double x : r) {
        require(x == std::floor(x), file.string() + ": non-integer class id");
        P.data.push_back(static_cast<std::int32_t>(x));
      }
    cache.pred.push_back(std::move(P));
  }
  const std::size_t total = cache.pred.front().samples;
  require(n_labeled + n_unlabeled <= total, "load_prediction_cache: block sizes exceed column count");
  cache.labeled = {0, n_labeled};
  cache.unlabeled = {n_labeled, n_labeled + n_unlabeled};
  cache.test = {n_labeled + n_unlabeled, total};
  validate(cache);
  return cache;
}

// ---------------------------------------------------------------------------
// Vote mass

/// Row-major (samples x classes) label-mass matrix.
struct MassMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
  double operator()(std::size_t i, std::size_t y) const { return data[i * cols + y]; }
  double& operator()(std::size_t i, std::size_t y) { return data[i * cols + y]; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
};

inline void require_simplices(const PredictionCache& cache, std::span<const double> rho, const std::vector<Vector>& Q) {
  require(rho.size() == cache.num_views(), "rho must have one entry per view");
  require(is_simplex(rho), "rho is not on the probability simplex");
  require(Q.size() == cache.num_views(), "need one posterior per view");
  for (std::size_t v = 0; v < Q.size(); ++v) {
    require(Q[v].size() == cache.pred[v].voters, "posterior size does not match voter count in view " + std::to_string(v + 1));
    require(is_simplex(Q[v]), "posterior of view " + std::to_string(v + 1) + " is not on the probability simplex");
  }
}

/// Per-view label masses M_v[i][y] = sum_h Q_v(h) [pred_v[h][i] == y] over a block.
inline std::vector<MassMatrix> view_masses(const PredictionCache& cache, const std::vector<Vector>& Q, Block block) {
  const auto C = static_cast<std::size_t>(cache.num_classes);
  std::vector<MassMatrix> out;
  for (std::size_t v = 0; v < cache.num_views(); ++v) {
    const auto& P = cache.pred[v];
    MassMatrix M{block.size(), C, std::vector<double>(block.size() * C, 0.0)};
    for (std::size_t h = 0; h < P.voters; ++h) {
      const double w = Q[v][h];
      const std::int32_t* row = P.data.data() + h * P.samples + block.begin;
      for (std::size_t i = 0; i < block.size(); ++i) M.data[i * C + static_cast<std::size_t>(row[i])] += w;
    }
    out.push_back(std::move(M));
  }
  return out;
}

/// q[i][y] = sum_v rho_v sum_h Q_v(h) [pred_v[h][i] == y].
inline MassMatrix vote_mass(const PredictionCache& cache, std::span<const double> rho, const std::vector<Vector>& Q,
                            Block block) {
  require_simplices(cache, rho, Q);
  require(block.end <= cache.num_samples() && block.begin <= block.end, "vote_mass: block out of range");
  const auto per_view = view_masses(cache, Q, block);
  MassMatrix q{block.size(), static_cast<std::size_t>(cache.num_classes),
               std::vector<double>(block.size() * static_cast<std::size_t>(cache.num_classes), 0.0)};
  for (std::size_t v = 0; v < per_view.size(); ++v)
    for (std::size_t k = 0; k < q.data.size(); ++k) q.data[k] += rho[v] * per_view[v].data[k];
  return q;
}

}  // namespace mvpb
