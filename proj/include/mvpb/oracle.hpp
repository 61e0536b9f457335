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

// Brute-force reference statistics: explicit sums over voters and voter
// pairs, with no per-sample mass shortcut. Used to audit the fast path.

#include <string>
#include <vector>

#include "mvpb/common.hpp"
#include "mvpb/risks.hpp"
#include "mvpb/voters.hpp"

namespace mvpb::oracle {

inline constexpr std::size_t kMaxVoters = 64;
inline constexpr std::size_t kMaxSamples = 256;

inline void guard(const PredictionCache& cache, std::size_t samples) {
  std::size_t voters = 0;
  for (const auto& p : cache.pred) voters += p.voters;
  require(voters <= kMaxVoters, "oracle: more than 64 voters in total");
  require(samples <= kMaxSamples, "oracle: more than 256 samples");
}

/// Gibbs risk as E_rho E_Q [h wrong]; joint error and disagreement as
/// quadruple sums over independent draws (v,h), (v',h').
inline EmpiricalStats brute_stats(const PredictionCache& cache, const Vector& rho, const std::vector<Vector>& Q,
                                  const Labels& labels, bool use_unlabeled = true) {
  require_simplices(cache, rho, Q);
  require(labels.size() == cache.labeled.size(), "brute_stats: block/label size mismatch");
  require(!labels.empty(), "brute_stats: labeled block is empty");
  const std::size_t m = labels.size();
  const std::size_t n = use_unlabeled ? cache.unlabeled.end : cache.labeled.end;
  guard(cache, n);
  const std::size_t V = cache.num_views();

  CompensatedSum gibbs, joint, dis;
  std::size_t mv_wrong = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool labeled = i < m;
    for (std::size_t v = 0; v < V; ++v)
      for (std::size_t h = 0; h < cache.pred[v].voters; ++h) {
        const double w = rho[v] * Q[v][h];
        const int a = cache.pred[v](h, i);
        if (labeled && a != labels[i]) gibbs.add(w);
        for (std::size_t v2 = 0; v2 < V; ++v2)
          for (std::size_t h2 = 0; h2 < cache.pred[v2].voters; ++h2) {
            const double w2 = w * rho[v2] * Q[v2][h2];
            const int b = cache.pred[v2](h2, i);
            if (a != b) dis.add(w2);
            if (labeled && a != labels[i] && b != labels[i]) joint.add(w2);
          }
      }
    if (labeled) {
      // explicit tally of votes per label
      std::vector<double> tally(static_cast<std::size_t>(cache.num_classes), 0.0);
      for (std::size_t v = 0; v < V; ++v)
        for (std::size_t h = 0; h < cache.pred[v].voters; ++h)
          tally[static_cast<std::size_t>(cache.pred[v](h, i))] += rho[v] * Q[v][h];
      int best = 0;
      for (int y = 1; y < cache.num_classes; ++y)
        if (tally[static_cast<std::size_t>(y)] > tally[static_cast<std::size_t>(best)]) best = y;
      if (best != labels[i]) ++mv_wrong;
    }
  }
  EmpiricalStats s;
  s.m = m;
  s.n = n;
  s.gibbs = gibbs.value() / static_cast<double>(m);
  s.joint = joint.value() / static_cast<double>(m);
  s.disagreement = dis.value() / static_cast<double>(n);
  s.mv_risk = static_cast<double>(mv_wrong) / static_cast<double>(m);
  return s;
}

struct InequalityCheck {
  std::string name;
  bool checked = false;
  bool holds = true;
  double lhs = 0.0;  // majority-vote risk
  double rhs = 0.0;  // oracle bound
  double slack() const { return rhs - lhs; }
};

struct InequalityReport {
  EmpiricalStats stats;
  std::vector<InequalityCheck> checks;
  bool all_hold() const {
    for (const auto& c : checks)
      if (c.checked && !c.holds) return false;
    return true;
  }
};

/// Oracle inequalities on the empirical distribution (the labeled sample
/// treated as the population): R <= 2 gibbs, R <= 4 joint and, for binary
/// tasks with gibbs < 1/2, the C-bound 1 - (1 - 2 gibbs)^2 / (1 - 2 d).
inline InequalityReport oracle_inequalities(const PredictionCache& cache, const Vector& rho,
                                            const std::vector<Vector>& Q, const Labels& labels) {
  InequalityReport r;
  r.stats = brute_stats(cache, rho, Q, labels, false);
  const auto& s = r.stats;
  r.checks.push_back({"first_order", true, s.mv_risk <= 2.0 * s.gibbs, s.mv_risk, 2.0 * s.gibbs});
  r.checks.push_back({"second_order", true, s.mv_risk <= 4.0 * s.joint, s.mv_risk, 4.0 * s.joint});
  InequalityCheck cb{"c_bound", false, true, s.mv_risk, 1.0};
  if (cache.num_classes == 2 && s.gibbs < 0.5 && s.disagreement < 0.5) {
    cb.checked = true;
    const double a = 1.0 - 2.0 * s.gibbs;
    cb.rhs = 1.0 - a * a / (1.0 - 2.0 * s.disagreement);
    cb.holds = s.mv_risk <= cb.rhs + 1e-12;
  }
  r.checks.push_back(cb);
  return r;
}

}  // namespace mvpb::oracle
