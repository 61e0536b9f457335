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

// Hand-rolled generators for property tests: random prediction caches,
// simplex points and posterior parameters.

#include <random>
#include <vector>

#include "mvpb/bounds.hpp"
#include "mvpb/optimize.hpp"
#include "mvpb/voters.hpp"

namespace mvpb::testing {

struct Instance {
  PredictionCache cache;
  Labels labels;
  Vector rho;
  std::vector<Vector> Q;
};

inline Vector random_simplex(std::mt19937_64& rng, std::size_t n, bool allow_zeros = false) {
  std::exponential_distribution<double> e(1.0);
  std::bernoulli_distribution zero(0.2);
  Vector p(n);
  double s = 0.0;
  for (auto& x : p) s += (x = (allow_zeros && n > 1 && zero(rng)) ? 0.0 : e(rng) + 1e-3);
  if (s == 0.0) {
    p[0] = 1.0;
    return p;
  }
  for (auto& x : p) x /= s;
  return p;
}

/// Random cache with V views of up to `max_voters` voters each, `m` labeled
/// and `u` unlabeled columns.
inline PredictionCache random_cache(std::mt19937_64& rng, std::size_t V, std::size_t max_voters, std::size_t m,
                                    std::size_t u, int C) {
  std::uniform_int_distribution<std::size_t> nv(1, max_voters);
  std::uniform_int_distribution<int> cls(0, C - 1);
  PredictionCache c;
  c.num_classes = C;
  c.labeled = {0, m};
  c.unlabeled = {m, m + u};
  c.test = {m + u, m + u};
  for (std::size_t v = 0; v < V; ++v) {
    PredictionMatrix P;
    P.voters = nv(rng);
    P.samples = m + u;
    for (std::size_t k = 0; k < P.voters * P.samples; ++k) P.data.push_back(cls(rng));
    c.pred.push_back(std::move(P));
  }
  return c;
}

inline Instance random_instance(std::mt19937_64& rng, std::size_t max_views, std::size_t max_voters,
                                std::size_t max_samples, int C, std::size_t max_unlabeled = 0) {
  std::uniform_int_distribution<std::size_t> views(1, max_views), samples(1, max_samples),
      unl(0, max_unlabeled);
  std::uniform_int_distribution<int> cls(0, C - 1);
  Instance x;
  const std::size_t m = samples(rng);
  x.cache = random_cache(rng, views(rng), max_voters, m, unl(rng), C);
  for (std::size_t i = 0; i < m; ++i) x.labels.push_back(cls(rng));
  x.rho = random_simplex(rng, x.cache.num_views(), true);
  for (const auto& P : x.cache.pred) x.Q.push_back(random_simplex(rng, P.voters, true));
  return x;
}

/// Parameters at a random interior point; lambda-type coordinates drawn
/// inside their clamp ranges.
inline PosteriorParams random_params(std::mt19937_64& rng, const Priors& priors, DivergenceSpec div) {
  PosteriorParams p = PosteriorParams::init(priors, div);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> lam(0.2, 1.8), gam(0.2, 3.0), al(1.05, 2.5);
  for (auto& x : p.rho_logits) x = z(rng);
  for (auto& v : p.q_logits)
    for (auto& x : v) x = z(rng);
  p.lambda = lam(rng);
  p.lambda1 = lam(rng);
  p.lambda2 = lam(rng);
  p.gamma = gam(rng);
  if (div.mode == DivergenceMode::learnable) {
    p.alpha = AlphaParam::from_alpha(al(rng));
    for (auto& a : p.view_alpha) a = AlphaParam::from_alpha(al(rng));
  }
  p.project();
  return p;
}

/// Labeled/unlabeled cache whose voters are right with probability in
/// [acc_lo, acc_hi] (drawn per voter); wrong votes pick a random other class.
inline Instance accurate_instance(std::mt19937_64& rng, std::size_t V, std::size_t voters, std::size_t m,
                                  std::size_t u, int C, double acc_lo, double acc_hi) {
  std::uniform_int_distribution<int> cls(0, C - 1), other(1, C - 1);
  std::uniform_real_distribution<double> acc(acc_lo, acc_hi), unit(0.0, 1.0);
  Instance x;
  x.cache.num_classes = C;
  x.cache.labeled = {0, m};
  x.cache.unlabeled = {m, m + u};
  x.cache.test = {m + u, m + u};
  Labels truth;
  for (std::size_t i = 0; i < m + u; ++i) truth.push_back(cls(rng));
  x.labels.assign(truth.begin(), truth.begin() + static_cast<std::ptrdiff_t>(m));
  for (std::size_t v = 0; v < V; ++v) {
    PredictionMatrix P{voters, m + u, {}};
    for (std::size_t h = 0; h < voters; ++h) {
      const double a = acc(rng);
      for (std::size_t i = 0; i < m + u; ++i)
        P.data.push_back(unit(rng) < a ? truth[i] : (truth[i] + other(rng)) % C);
    }
    x.cache.pred.push_back(std::move(P));
  }
  x.rho = uniform(V);
  x.Q.assign(V, uniform(voters));
  return x;
}

/// A strictly feasible training point: every barrier argument at most -1e-3,
/// and for C-Bound a disagreement lower bound clear of zero.
struct FeasiblePoint {
  Instance inst;
  Priors priors;
  PosteriorParams params;
  double delta = 0.05;

  TrainingProblem problem() const {
    TrainingProblem pb;
    pb.cache = &inst.cache;
    pb.labels = inst.labels;
    pb.priors = priors;
    pb.delta = delta;
    return pb;
  }
};

inline bool strictly_feasible(BoundKind kind, const FeasiblePoint& f, const BoundSettings& s = {}) {
  const auto st = empirical_stats(f.inst.cache, f.params.rho(), f.params.Q(), f.inst.labels);
  const auto psi = psi_terms(f.params, f.priors, st.m, st.n, f.delta);
  for (double a : constraint_arguments(kind, st, psi, f.params, s.bisection))
    if (!(a <= -1e-3)) return false;
  if (kind == BoundKind::CBound && kl_inv_lower(st.disagreement, psi.psi_d) < 1e-3) return false;
  if (kind == BoundKind::CTandem) {
    const auto inv = inverted_values(st, psi);
    if (inv.joint_upper - inv.gibbs_upper + 0.25 < 1e-3) return false;
  }
  return true;
}

inline FeasiblePoint feasible_point(std::mt19937_64& rng, BoundKind kind, DivergenceSpec div) {
  std::uniform_int_distribution<std::size_t> views(2, 3), voters(3, 6), m(150, 400), u(0, 400);
  std::uniform_real_distribution<double> lo(0.65, 0.8);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    FeasiblePoint f;
    const int C = is_binary_only(kind) ? 2 : 2 + static_cast<int>(rng() % 2);
    const double a = lo(rng);
    f.inst = accurate_instance(rng, views(rng), voters(rng), m(rng), u(rng), C, a, a + 0.15);
    f.priors = Priors::uniform(f.inst.cache.voters_per_view());
    f.params = random_params(rng, f.priors, div);
    if (strictly_feasible(kind, f)) return f;
  }
  throw Error("feasible_point: no feasible point found");
}

}  // namespace mvpb::testing
