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

#include "mvpb/oracle.hpp"
#include "random_instances.hpp"

using namespace mvpb;
using Catch::Approx;

TEST_CASE("oracle refuses oversized inputs") {
  std::mt19937_64 rng(1);
  auto c = testing::random_cache(rng, 1, 1, 300, 0, 2);
  Labels y(300, 0);
  CHECK_THROWS_AS(oracle::brute_stats(c, Vector{1.0}, {Vector{1.0}}, y), Error);
  c = testing::random_cache(rng, 1, 1, 10, 0, 2);
  c.pred[0] = PredictionMatrix{65, 10, std::vector<std::int32_t>(650, 0)};
  CHECK_THROWS_AS(oracle::brute_stats(c, Vector{1.0}, {uniform(65)}, Labels(10, 0)), Error);
}

TEST_CASE("single view single voter") {
  PredictionCache c;
  c.num_classes = 2;
  c.labeled = {0, 4};
  c.unlabeled = c.test = {4, 4};
  c.pred = {PredictionMatrix{1, 4, {1, 1, 0, 0}}};
  const auto s = oracle::brute_stats(c, Vector{1.0}, {Vector{1.0}}, Labels{1, 0, 0, 0});
  CHECK(s.gibbs == 0.25);
  CHECK(s.joint == 0.25);
  CHECK(s.disagreement == 0.0);
  CHECK(s.mv_risk == 0.25);
}

TEST_CASE("oracle inequalities on random instances") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 300; ++k) {
    const auto x = testing::random_instance(rng, 3, 4, 20, 2 + k % 3);
    const auto r = oracle::oracle_inequalities(x.cache, x.rho, x.Q, x.labels);
    CHECK(r.all_hold());
    CHECK(r.checks[0].slack() >= 0.0);
  }
}

TEST_CASE("evenly split votes sit on the first-order bound") {
  PredictionCache c;
  c.num_classes = 2;
  c.labeled = {0, 3};
  c.unlabeled = c.test = {3, 3};
  c.pred = {PredictionMatrix{2, 3, {0, 0, 0, 1, 1, 1}}};
  const auto r = oracle::oracle_inequalities(c, Vector{1.0}, {Vector{0.5, 0.5}}, Labels{1, 1, 1});
  CHECK(r.stats.mv_risk == 1.0);  // ties resolve to class 0
  CHECK(r.checks[0].rhs == 1.0);
  CHECK(r.checks[0].slack() == 0.0);
  CHECK(r.all_hold());
}

TEST_CASE("C-bound oracle on a constructed instance") {
  std::mt19937_64 rng(5);
  std::bernoulli_distribution coin(0.5);
  bool found = false;
  for (int attempt = 0; attempt < 200000 && !found; ++attempt) {
    PredictionCache c;
    c.num_classes = 2;
    c.labeled = {0, 10};
    c.unlabeled = c.test = {10, 10};
    PredictionMatrix P{4, 10, {}};
    for (int k = 0; k < 40; ++k) P.data.push_back(coin(rng));
    c.pred = {P};
    const Labels y(10, 0);
    const auto r = oracle::oracle_inequalities(c, Vector{1.0}, {uniform(4)}, y);
    if (std::abs(r.stats.gibbs - 0.25) > 0.01 || std::abs(r.stats.disagreement - 0.3) > 0.01) continue;
    found = true;
    const auto& cb = r.checks[2];
    CHECK(cb.checked);
    CHECK(cb.rhs == Approx(1 - std::pow(1 - 2 * r.stats.gibbs, 2) / (1 - 2 * r.stats.disagreement)));
    CHECK(cb.rhs == Approx(0.375).margin(0.05));
    CHECK(cb.holds);
  }
  CHECK(found);
}
