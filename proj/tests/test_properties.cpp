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

// Property tests over hand-rolled random generators.

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mvpb/oracle.hpp"
#include "mvpb/optimize.hpp"
#include "random_instances.hpp"

using namespace mvpb;
using Catch::Approx;

TEST_CASE("vote mass rows are stochastic") {
  std::mt19937_64 rng(101);
  for (int k = 0; k < 200; ++k) {
    const auto x = testing::random_instance(rng, 3, 5, 15, 2 + k % 4);
    const auto q = vote_mass(x.cache, x.rho, x.Q, x.cache.labeled);
    for (std::size_t i = 0; i < q.rows; ++i) {
      double s = 0;
      for (double t : q.row(i)) {
        CHECK(t >= 0.0);
        CHECK(t <= 1.0 + 1e-12);
        s += t;
      }
      CHECK(s == Approx(1.0).margin(1e-9));
    }
  }
}

TEST_CASE("permuting voters with their weights leaves vote mass unchanged") {
  std::mt19937_64 rng(102);
  for (int k = 0; k < 100; ++k) {
    auto x = testing::random_instance(rng, 3, 5, 10, 3);
    const auto before = vote_mass(x.cache, x.rho, x.Q, x.cache.labeled);
    for (std::size_t v = 0; v < x.cache.num_views(); ++v) {
      auto& P = x.cache.pred[v];
      std::vector<std::size_t> perm(P.voters);
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      std::shuffle(perm.begin(), perm.end(), rng);
      PredictionMatrix R{P.voters, P.samples, std::vector<std::int32_t>(P.data.size())};
      Vector q(P.voters);
      for (std::size_t h = 0; h < P.voters; ++h) {
        q[h] = x.Q[v][perm[h]];
        for (std::size_t j = 0; j < P.samples; ++j) R(h, j) = P(perm[h], j);
      }
      P = R;
      x.Q[v] = q;
    }
    const auto after = vote_mass(x.cache, x.rho, x.Q, x.cache.labeled);
    for (std::size_t i = 0; i < before.data.size(); ++i) CHECK(after.data[i] == Approx(before.data[i]).margin(1e-12));
  }
}

TEST_CASE("statistics stay in range and order") {
  std::mt19937_64 rng(103);
  for (int k = 0; k < 300; ++k) {
    const int C = 2 + k % 4;
    const auto x = testing::random_instance(rng, 3, 4, 20, C, 10);
    const auto s = empirical_stats(x.cache, x.rho, x.Q, x.labels);
    CHECK(s.joint <= s.gibbs + 1e-15);
    CHECK(s.gibbs * s.gibbs <= s.joint + 1e-12);  // Jensen
    CHECK(s.disagreement <= 1.0 - 1.0 / C + 1e-12);
    for (double t : {s.gibbs, s.joint, s.disagreement, s.mv_risk}) {
      CHECK(t >= 0.0);
      CHECK(t <= 1.0);
    }
  }
}

TEST_CASE("binary decomposition on the labeled block") {
  std::mt19937_64 rng(104);
  for (int k = 0; k < 200; ++k) {
    const auto x = testing::random_instance(rng, 3, 4, 20, 2);
    const auto s = empirical_stats(x.cache, x.rho, x.Q, x.labels, false);
    CHECK(s.gibbs == Approx(s.disagreement / 2 + s.joint).margin(1e-12));
  }
}

TEST_CASE("Pinsker lower bound on binary KL") {
  for (int i = 0; i <= 50; ++i)
    for (int j = 1; j < 50; ++j) {
      const double q = i / 50.0, p = j / 50.0;
      CHECK(kl_binary(q, p) >= 2 * (q - p) * (q - p) - 1e-15);
    }
}

TEST_CASE("renyi order properties and product identity") {
  std::mt19937_64 rng(105);
  for (int k = 0; k < 100; ++k) {
    const auto Q = testing::random_simplex(rng, 4), P = testing::random_simplex(rng, 4);
    const double kl = kl_categorical(Q, P);
    double prev = kl;
    for (double a : {1.01, 1.2, 1.7, 2.5, 4.0}) {
      const double d = renyi_div(Q, P, a);
      CHECK(d >= prev - 1e-12);
      prev = d;
    }
    Vector QQ, PP;
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) QQ.push_back(Q[i] * Q[j]), PP.push_back(P[i] * P[j]);
    for (double a : {1.1, 2.0, 3.0}) CHECK(renyi_div(QQ, PP, a) == Approx(2 * renyi_div(Q, P, a)).margin(1e-10));
  }
}

TEST_CASE("inversion residual and round trip") {
  std::mt19937_64 rng(106);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    const double q = u(rng), psi = 0.5 * u(rng);
    const double hi = kl_inv_upper(q, psi), lo = kl_inv_lower(q, psi);
    CHECK(hi >= q);
    CHECK(lo <= q);
    if (hi < 1.0 - 1e-8) CHECK(std::abs(kl_binary(q, hi) - psi) <= 1e-6);
    if (lo > 1e-8) CHECK(std::abs(kl_binary(q, lo) - psi) <= 1e-6);
  }
  for (int i = 1; i < 20; ++i)
    for (int j = i + 1; j < 20; ++j) {
      const double q = i / 20.0, p = j / 20.0;
      CHECK(kl_inv_upper(q, kl_binary(q, p)) == Approx(p).margin(1e-8));
      CHECK(kl_inv_lower(p, kl_binary(p, q)) == Approx(q).margin(1e-8));
    }
}

TEST_CASE("inversions grow with the budget") {
  for (double q : {0.0, 0.1, 0.5, 0.9}) {
    double up = q, down = q;
    for (double psi = 0.01; psi < 1.0; psi += 0.05) {
      const double a = kl_inv_upper(q, psi), b = kl_inv_lower(q, psi);
      CHECK(a >= up);
      CHECK(b <= down);
      up = a;
      down = b;
    }
  }
}

TEST_CASE("psi monotonicity") {
  for (std::size_t m = 10; m < 2000; m *= 2) {
    const auto a = psi_from_divergence(0.3, m, m, 0.05), b = psi_from_divergence(0.3, 2 * m, 2 * m, 0.05);
    CHECK(b.psi_r < a.psi_r);
    CHECK(b.psi_e < a.psi_e);
    const auto c = psi_from_divergence(0.4, m, m, 0.05);
    CHECK(c.psi_r > a.psi_r);
    CHECK(c.psi_d > a.psi_d);
    CHECK(a.psi_r >= std::log(2.0) / static_cast<double>(m));
  }
}

TEST_CASE("K is monotone in its inputs and matches the zero-risk closed form") {
  PosteriorParams p;
  const BoundSettings s;
  EmpiricalStats st;
  st.m = st.n = 100;
  double prev_g = -1;
  for (double g = 0.0; g < 0.5; g += 0.02) {
    st.gibbs = g;
    double prev_psi = -1;
    for (double psi = 0.0; psi < 0.3; psi += 0.01) {
      PsiTerms t;
      t.psi_r = psi;
      t.m = t.n = 100;
      const double k = eval_bound(BoundKind::K, st, t, p, 2, s).raw;
      CHECK(k >= prev_psi);
      prev_psi = k;
    }
    PsiTerms t;
    t.psi_r = 0.05;
    const double k = eval_bound(BoundKind::K, st, t, p, 2, s).raw;
    CHECK(k >= prev_g);
    prev_g = k;
  }
  st.gibbs = 0.0;
  const auto t = psi_from_divergence(0.0, 100, 100, 1.0);
  CHECK(eval_bound(BoundKind::K, st, t, p, 2).raw ==
        Approx(2 * (1 - std::exp(-std::log(2 * std::sqrt(100.0)) / 100))).epsilon(1e-8));
}

TEST_CASE("inverted-KL forms are tighter than their lambda relaxations") {
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const BoundSettings s;
  for (int k = 0; k < 500; ++k) {
    BoundInputs<double> x{0.5 * u(rng), 0.25 * u(rng), 0.5 * u(rng), 0.3 * u(rng), 0.3 * u(rng), 0.3 * u(rng),
                          1e-4 + (2 - 2e-4) * u(rng), 1.0, 1.0, 1.0};
    CHECK(bound_expression(BoundKind::K, x, s, false) <= bound_expression(BoundKind::R, x, s, false) + 1e-9);
    CHECK(bound_expression(BoundKind::K2, x, s, false) <= bound_expression(BoundKind::E2, x, s, false) + 1e-9);
  }
}

TEST_CASE("training keeps parameters in their domains") {
  std::mt19937_64 rng(108);
  for (auto kind : {BoundKind::R, BoundKind::E, BoundKind::R2}) {
    const auto x = testing::accurate_instance(rng, 2, 4, 100, 50, 2, 0.6, 0.8);
    TrainingProblem pb;
    pb.cache = &x.cache;
    pb.labels = x.labels;
    pb.priors = Priors::uniform(x.cache.voters_per_view());
    OptimConfig cfg;
    cfg.max_iters = 150;
    const auto r = minimize(kind, pb, DivergenceSpec::parse("learnable"), cfg);
    CHECK(is_simplex(r.params.rho(), 1e-12));
    for (const auto& q : r.params.Q()) CHECK(is_simplex(q, 1e-12));
    for (double l : {r.params.lambda, r.params.lambda1, r.params.lambda2}) {
      CHECK(l > 0.0);
      CHECK(l < 2.0);
    }
    CHECK(r.params.gamma > 0.0);
    CHECK(r.params.alpha_value() > 1.0);
    // certified value recomputed from scratch
    const auto st = empirical_stats(x.cache, r.params.rho(), r.params.Q(), x.labels);
    const auto psi = psi_terms(r.params, pb.priors, st.m, st.n, pb.delta);
    CHECK(eval_bound(kind, st, psi, r.params, 2).certified == Approx(r.report.certified_value).margin(1e-12));
  }
}
