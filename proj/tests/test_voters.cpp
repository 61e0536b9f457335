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

#include <catch_amalgamated.hpp>

#include <random>

#include "mvpb/data.hpp"
#include "mvpb/voters.hpp"
#include "random_instances.hpp"

using namespace mvpb;

namespace {

// Exhaustive midpoint search for the best single split on one feature.
double best_midpoint(const std::vector<double>& x, const Labels& y) {
  double best_thr = 0, best = 1e9;
  std::vector<double> xs = x;
  std::sort(xs.begin(), xs.end());
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    if (xs[k] == xs[k + 1]) continue;
    const double thr = 0.5 * (xs[k] + xs[k + 1]);
    int l[2] = {0, 0}, r[2] = {0, 0};
    for (std::size_t i = 0; i < x.size(); ++i) (x[i] <= thr ? l : r)[y[i]]++;
    auto g = [](int* c) {
      const double n = c[0] + c[1];
      return n == 0 ? 0.0 : n * (1 - (c[0] * c[0] + c[1] * c[1]) / (n * n));
    };
    const double s = g(l) + g(r);
    if (s < best) best = s, best_thr = thr;
  }
  return best_thr;
}

}  // namespace

TEST_CASE("one-dimensional stump") {
  Matrix X(4, 1);
  for (int i = 0; i < 4; ++i) X(i, 0) = i;
  const Labels y{0, 0, 1, 1};
  const auto ens = train_forest(X, y, 2, ForestConfig{1, 1, 0, false});
  const auto& t = ens.trees.front();
  REQUIRE(t.nodes.front().feature == 0);
  CHECK(t.nodes.front().threshold == best_midpoint({0, 1, 2, 3}, y));
  CHECK(t.nodes.front().threshold == 1.5);
  for (int i = 0; i < 4; ++i) CHECK(t.predict(X.row(i)) == y[i]);
  CHECK(t.depth() == 1);
}

TEST_CASE("bootstrapped stumps split at a training midpoint") {
  Matrix X(4, 1);
  for (int i = 0; i < 4; ++i) X(i, 0) = i;
  const Labels y{0, 0, 1, 1};
  const auto ens = train_forest(X, y, 2, ForestConfig{50, 1, 3, true});
  for (const auto& t : ens.trees) {
    if (t.nodes.front().feature < 0) continue;  // single-class bootstrap
    // a bootstrap may miss points, so only the split geometry is checked
    const double thr = t.nodes.front().threshold;
    const bool midpoint = thr == 0.5 || thr == 1.0 || thr == 1.5 || thr == 2.0 || thr == 2.5;
    CHECK(midpoint);
    CHECK(t.predict(X.row(0)) == 0);
    CHECK(t.predict(X.row(3)) == 1);
  }
}

TEST_CASE("pure node is a leaf") {
  // both children are pure, so growth stops at depth 1 despite max_depth 5
  Matrix Y(2, 1);
  Y(0, 0) = 0.0;
  Y(1, 0) = 1.0;
  const auto e2 = train_forest(Y, {0, 1}, 2, ForestConfig{1, 5, 0, false});
  CHECK(e2.trees[0].depth() == 1);
  for (const auto& n : e2.trees[0].nodes)
    if (n.feature < 0) CHECK(n.left == -1);
  CHECK(DecisionTree::constant(1, 2).depth() == 0);
}

TEST_CASE("forests are deterministic and respect depth") {
  const auto ds = synth_dataset(2, 60, 3, 4, {1.0, 1.0}, 2);
  for (int depth : {depth_of(DepthPreset::stump), depth_of(DepthPreset::weak), depth_of(DepthPreset::strong)}) {
    const auto a = train_forest(ds.views[0], ds.labels, 3, ForestConfig{8, depth, 42, true});
    const auto b = train_forest(ds.views[0], ds.labels, 3, ForestConfig{8, depth, 42, true});
    for (std::size_t t = 0; t < a.trees.size(); ++t) {
      CHECK(a.trees[t].depth() <= depth);
      REQUIRE(a.trees[t].nodes.size() == b.trees[t].nodes.size());
      for (std::size_t k = 0; k < a.trees[t].nodes.size(); ++k) {
        CHECK(a.trees[t].nodes[k].feature == b.trees[t].nodes[k].feature);
        CHECK(a.trees[t].nodes[k].threshold == b.trees[t].nodes[k].threshold);
      }
    }
  }
  CHECK(depth_of(DepthPreset::strong20) == 20);
  CHECK_THROWS_AS(train_forest(ds.views[0], Labels(ds.size(), 1), 3, ForestConfig{}), Error);
}

TEST_CASE("constant voter fills its row") {
  Matrix X(5, 2, 0.5);
  ViewEnsemble e;
  e.trees.push_back(DecisionTree::constant(1, 2));
  const auto c = predict_cache({e, e}, 2, {X, X}, {}, {});
  for (std::size_t j = 0; j < 5; ++j) CHECK(c.pred[0](0, j) == 1);
  CHECK(predict_cache({e, e}, 2, {X, X}, {}, {}) == c);
}

TEST_CASE("hand-built stump on three points") {
  DecisionTree t;
  t.num_features = 2;
  t.nodes = {TreeNode{1, 0.0, 1, 2, 0}, TreeNode{-1, 0, -1, -1, 2}, TreeNode{-1, 0, -1, -1, 1}};
  Matrix X(3, 2);
  X(0, 1) = -1.0;  // left
  X(1, 1) = 0.0;   // left (<=)
  X(2, 1) = 0.5;   // right
  ViewEnsemble e;
  e.trees = {t};
  Matrix T(1, 2);
  T(0, 1) = 3.0;
  const auto c = predict_cache({e}, 3, {X}, {}, {T});
  CHECK(c.pred[0].data == std::vector<std::int32_t>{2, 2, 1, 1});
  CHECK(c.test.begin == 3);
  CHECK(c.test.end == 4);
}

TEST_CASE("vote mass examples") {
  PredictionCache c;
  c.num_classes = 3;
  c.labeled = {0, 1};
  c.unlabeled = {1, 1};
  c.test = {1, 1};
  c.pred = {PredictionMatrix{2, 1, {0, 0}}, PredictionMatrix{1, 1, {0}}};
  auto q = vote_mass(c, Vector{0.3, 0.7}, {Vector{0.4, 0.6}, Vector{1.0}}, c.labeled);
  CHECK(q(0, 0) == Catch::Approx(1.0));
  CHECK(q(0, 1) == 0.0);

  c.num_classes = 2;
  c.pred = {PredictionMatrix{1, 1, {0}}, PredictionMatrix{1, 1, {1}}};
  q = vote_mass(c, Vector{0.5, 0.5}, {Vector{1.0}, Vector{1.0}}, c.labeled);
  CHECK(q(0, 0) == 0.5);
  CHECK(q(0, 1) == 0.5);
  CHECK_THROWS_AS(vote_mass(c, Vector{0.6, 0.6}, {Vector{1.0}, Vector{1.0}}, c.labeled), Error);
}

TEST_CASE("vote mass equals the nested double sum") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 50; ++k) {
    const auto x = testing::random_instance(rng, 2, 3, 6, 3);
    const auto q = vote_mass(x.cache, x.rho, x.Q, x.cache.labeled);
    for (std::size_t i = 0; i < x.labels.size(); ++i)
      for (int y = 0; y < 3; ++y) {
        double s = 0;
        for (std::size_t v = 0; v < x.cache.num_views(); ++v)
          for (std::size_t h = 0; h < x.cache.pred[v].voters; ++h)
            if (x.cache.pred[v](h, i) == y) s += x.rho[v] * x.Q[v][h];
        CHECK(q(i, y) == Catch::Approx(s).margin(1e-14));
      }
  }
}
