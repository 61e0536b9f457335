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

// Empirical Gibbs risk, tandem (joint) error, disagreement and majority-vote
// risk of a (rho, {Q_v}) pair, all reduced from per-sample vote masses.
//
// With c_i = q_i[y_i] the mass on the true label:
//   gibbs        = mean_i (1 - c_i)                   over labeled rows
//   joint        = mean_i (1 - c_i)^2                 over labeled rows
//   disagreement = mean_i (1 - sum_y q_i[y]^2)        over labeled + unlabeled rows

#include <vector>

#include "mvpb/common.hpp"
#include "mvpb/voters.hpp"

namespace mvpb {

struct EmpiricalStats {
  double gibbs = 0.0;
  double joint = 0.0;
  double disagreement = 0.0;
  double mv_risk = 0.0;
  std::size_t m = 0;  // labeled samples
  std::size_t n = 0;  // samples behind the disagreement (labeled + unlabeled)
};

/// Gradient of one statistic w.r.t. the probabilities rho_v and Q_v(h).
struct SimplexGrad {
  Vector rho;
  std::vector<Vector> q;

  static SimplexGrad zeros_like(std::size_t V, const std::vector<std::size_t>& voters) {
    SimplexGrad g;
    g.rho.assign(V, 0.0);
    for (auto n : voters) g.q.emplace_back(n, 0.0);
    return g;
  }
};

struct StatsWithGrad {
  EmpiricalStats stats;
  SimplexGrad gibbs;
  SimplexGrad joint;
  SimplexGrad disagreement;
};

/// Per-row argmax with ties broken to the lowest class id.
inline std::vector<int> majority_vote_predict(const MassMatrix& mass) {
  std::vector<int> out(mass.rows);
  for (std::size_t i = 0; i < mass.rows; ++i) {
    std::size_t best = 0;
    for (std::size_t y = 1; y < mass.cols; ++y)
      if (mass(i, y) > mass(i, best)) best = y;
    out[i] = static_cast<int>(best);
  }
  return out;
}

inline double majority_vote_risk(const MassMatrix& mass, std::span<const int> labels) {
  require(mass.rows == labels.size(), "majority_vote_risk: block/label size mismatch");
  if (labels.empty()) return 0.0;
  const auto pred = majority_vote_predict(mass);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) wrong += pred[i] != labels[i];
  return static_cast<double>(wrong) / static_cast<double>(labels.size());
}

namespace detail {

inline StatsWithGrad compute_stats(const PredictionCache& cache, std::span<const double> rho,
                                   const std::vector<Vector>& Q, std::span<const int> labels,
                                   bool use_unlabeled, bool with_grad) {
  require_simplices(cache, rho, Q);
  require(labels.size() == cache.labeled.size(), "empirical_stats: block/label size mismatch");
  require(!labels.empty(), "empirical_stats: labeled block is empty");
  const std::size_t V = cache.num_views();
  const auto C = static_cast<std::size_t>(cache.num_classes);
  const Block all{cache.labeled.begin, use_unlabeled ? cache.unlabeled.end : cache.labeled.end};
  const std::size_t m = labels.size();
  const std::size_t n = all.size();

  const auto per_view = view_masses(cache, Q, all);
  MassMatrix q{n, C, std::vector<double>(n * C, 0.0)};
  for (std::size_t v = 0; v < V; ++v)
    for (std::size_t k = 0; k < q.data.size(); ++k) q.data[k] += rho[v] * per_view[v].data[k];

  StatsWithGrad out;
  out.stats.m = m;
  out.stats.n = n;
  CompensatedSum g_sum, j_sum, d_sum;
  // dL/dq_i[y] for each statistic; gibbs and joint only touch y_i.
  Vector a_gibbs(m), a_joint(m), a_dis(n * C);
  for (std::size_t i = 0; i < n; ++i) {
    CompensatedSum sq;
    for (std::size_t y = 0; y < C; ++y) sq.add(q(i, y) * q(i, y));
    d_sum.add(1.0 - sq.value());
    for (std::size_t y = 0; y < C; ++y) a_dis[i * C + y] = -2.0 * q(i, y) / static_cast<double>(n);
    if (i < m) {
      const double loss = 1.0 - q(i, static_cast<std::size_t>(labels[i]));
      g_sum.add(loss);
      j_sum.add(loss * loss);
      a_gibbs[i] = -1.0 / static_cast<double>(m);
      a_joint[i] = -2.0 * loss / static_cast<double>(m);
    }
  }
  out.stats.gibbs = std::clamp(g_sum.value() / static_cast<double>(m), 0.0, 1.0);
  out.stats.joint = std::clamp(j_sum.value() / static_cast<double>(m), 0.0, 1.0);
  out.stats.disagreement = std::clamp(d_sum.value() / static_cast<double>(n), 0.0, 1.0);

  MassMatrix q_lab{m, C, std::vector<double>(q.data.begin(), q.data.begin() + static_cast<std::ptrdiff_t>(m * C))};
  out.stats.mv_risk = majority_vote_risk(q_lab, labels);

  if (!with_grad) return out;
  const auto voters = cache.voters_per_view();
  out.gibbs = SimplexGrad::zeros_like(V, voters);
  out.joint = SimplexGrad::zeros_like(V, voters);
  out.disagreement = SimplexGrad::zeros_like(V, voters);
  for (std::size_t v = 0; v < V; ++v) {
    const auto& Mv = per_view[v];
    CompensatedSum gr, jr, dr;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t y = 0; y < C; ++y) dr.add(a_dis[i * C + y] * Mv(i, y));
      if (i < m) {
        const double c = Mv(i, static_cast<std::size_t>(labels[i]));
        gr.add(a_gibbs[i] * c);
        jr.add(a_joint[i] * c);
      }
    }
    out.gibbs.rho[v] = gr.value();
    out.joint.rho[v] = jr.value();
    out.disagreement.rho[v] = dr.value();

    const auto& P = cache.pred[v];
    for (std::size_t h = 0; h < P.voters; ++h) {
      const std::int32_t* row = P.data.data() + h * P.samples + all.begin;
      CompensatedSum gq, jq, dq;
      for (std::size_t i = 0; i < n; ++i) {
        const auto y = static_cast<std::size_t>(row[i]);
        dq.add(a_dis[i * C + y]);
        if (i < m && row[i] == labels[i]) {
          gq.add(a_gibbs[i]);
          jq.add(a_joint[i]);
        }
      }
      out.gibbs.q[v][h] = rho[v] * gq.value();
      out.joint.q[v][h] = rho[v] * jq.value();
      out.disagreement.q[v][h] = rho[v] * dq.value();
    }
  }
  return out;
}

}  // namespace detail

/// Statistics of (rho, Q) on the cache's labeled block (labels given) and,
/// for the disagreement, the unlabeled block as well.
inline EmpiricalStats empirical_stats(const PredictionCache& cache, std::span<const double> rho,
                                      const std::vector<Vector>& Q, std::span<const int> labels,
                                      bool use_unlabeled = true) {
  return detail::compute_stats(cache, rho, Q, labels, use_unlabeled, false).stats;
}

/// Same statistics plus their gradients w.r.t. the probabilities rho and Q_v.
inline StatsWithGrad empirical_stats_with_grad(const PredictionCache& cache, std::span<const double> rho,
                                               const std::vector<Vector>& Q, std::span<const int> labels,
                                               bool use_unlabeled = true) {
  return detail::compute_stats(cache, rho, Q, labels, use_unlabeled, true);
}

/// Pulls a probability-space gradient back onto the (rho, Q_v) logits.
inline SimplexGrad to_logit_grad(const SimplexGrad& g, std::span<const double> rho, const std::vector<Vector>& Q) {
  SimplexGrad out;
  out.rho = softmax_backward(rho, g.rho);
  for (std::size_t v = 0; v < Q.size(); ++v) out.q.push_back(softmax_backward(Q[v], g.q[v]));
  return out;
}

}  // namespace mvpb
