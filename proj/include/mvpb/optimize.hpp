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

// Self-bounding minimisation: full-batch gradient descent on a
// barrier-penalised bound over (Q_v, rho, lambda, gamma, alpha), followed by
// certification of the bound at the returned parameters.

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "mvpb/bounds.hpp"
#include "mvpb/risks.hpp"
#include "mvpb/voters.hpp"

namespace mvpb {

enum class OptimizerKind { automatic, adaptive_moment, coin_betting };

struct OptimConfig {
  int max_iters = 1000;
  double tolerance = 1e-9;
  double learning_rate = 0.1;
  double weight_decay = 0.05;
  OptimizerKind optimizer = OptimizerKind::automatic;  // coin betting for CTandem, AdamW otherwise
  std::uint64_t seed = 0;
  BoundSettings bound{};
};

/// AdamW: bias-corrected moments, decoupled weight decay on logits only.
class AdaptiveMoment {
 public:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  void step(std::span<double> x, std::span<const double> grad, std::span<const Coord> roles, double lr,
            double weight_decay) {
    if (m_.empty()) {
      m_.assign(x.size(), 0.0);
      v_.assign(x.size(), 0.0);
    }
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, t_);
    const double c2 = 1.0 - std::pow(kBeta2, t_);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (roles[i] == Coord::logit) x[i] -= lr * weight_decay * x[i];
      m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * grad[i];
      v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * grad[i] * grad[i];
      const double mhat = m_[i] / c1;
      const double vhat = v_[i] / c2;
      x[i] -= lr * mhat / (std::sqrt(vhat) + kEps);
    }
  }

 private:
  Vector m_, v_;
  int t_ = 0;
};

/// COCOB-Backprop: per-coordinate coin betting, no learning rate.
class CoinBetting {
 public:
  explicit CoinBetting(double scale = 100.0) : scale_(scale) {}

  void step(std::span<double> x, std::span<const double> grad) {
    if (L_.empty()) {
      L_.assign(x.size(), 1e-8);
      G_.assign(x.size(), 0.0);
      reward_.assign(x.size(), 0.0);
      theta_.assign(x.size(), 0.0);
      offset_.assign(x.size(), 0.0);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double g = grad[i];
      L_[i] = std::max(L_[i], std::abs(g));
      G_[i] += std::abs(g);
      reward_[i] = std::max(reward_[i] - g * offset_[i], 0.0);
      theta_[i] += g;
      const double bet = -theta_[i] / (L_[i] * std::max(G_[i] + L_[i], scale_ * L_[i])) * (reward_[i] + L_[i]);
      x[i] += bet - offset_[i];
      offset_[i] = bet;
    }
  }

 private:
  double scale_;
  Vector L_, G_, reward_, theta_, offset_;
};

/// A fixed prediction cache with labels: everything an objective reads.
struct TrainingProblem {
  const PredictionCache* cache = nullptr;
  Labels labels;       // labeled block
  Labels test_labels;  // test block (may be empty)
  Priors priors;
  double delta = 0.05;
};

struct Evaluation {
  StatsWithGrad stats;
  ObjectiveValue objective;
};

inline Evaluation evaluate(BoundKind kind, const TrainingProblem& pb, const PosteriorParams& params,
                           const BoundSettings& s) {
  Evaluation e;
  e.stats = empirical_stats_with_grad(*pb.cache, params.rho(), params.Q(), pb.labels);
  e.objective = objective(kind, e.stats, params, pb.priors, pb.delta, pb.cache->num_classes, s);
  return e;
}

/// Objective value only, for finite differences.
inline double objective_value(BoundKind kind, const TrainingProblem& pb, const PosteriorParams& params,
                              const BoundSettings& s) {
  const auto st = empirical_stats(*pb.cache, params.rho(), params.Q(), pb.labels);
  const auto psi = psi_terms(params, pb.priors, st.m, st.n, pb.delta);
  return bound_expression(kind, make_inputs(st, psi, params), s, true);
}

struct BoundReport {
  BoundKind kind = BoundKind::K;
  double certified_value = 0.0;
  double raw_value = 0.0;
  EmpiricalStats stats;
  PsiTerms psi;
  InvertedValues inverted;
  double lambda = 0.0, lambda1 = 0.0, lambda2 = 0.0, gamma = 0.0;
  DivergenceSpec divergence;
  double alpha = 0.0;  // order of D(rho||pi); 0 in KL mode
  Vector view_alpha;   // orders of D(Q_v||P_v)
  Vector rho;
  double mv_train_risk = 0.0;
  double mv_test_risk = std::numeric_limits<double>::quiet_NaN();
  Vector trace;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> notes;
};

/// Certifies `kind` at fixed parameters.
inline BoundReport certify(BoundKind kind, const TrainingProblem& pb, const PosteriorParams& params,
                           const BoundSettings& s = {}) {
  BoundReport r;
  r.kind = kind;
  const Vector rho = params.rho();
  const auto Q = params.Q();
  r.stats = empirical_stats(*pb.cache, rho, Q, pb.labels);
  r.psi = psi_terms(params, pb.priors, r.stats.m, r.stats.n, pb.delta);
  const BoundValue b = eval_bound(kind, r.stats, r.psi, params, pb.cache->num_classes, s);
  r.certified_value = b.certified;
  r.raw_value = b.raw;
  r.inverted = inverted_values(r.stats, r.psi, s.bisection);
  r.lambda = params.lambda;
  r.lambda1 = params.lambda1;
  r.lambda2 = params.lambda2;
  r.gamma = params.gamma;
  r.divergence = params.divergence;
  if (params.divergence.mode == DivergenceMode::learnable) {
    r.alpha = params.alpha_value();
    for (std::size_t v = 0; v < params.view_alpha.size(); ++v) r.view_alpha.push_back(params.view_alpha_value(v));
  } else if (params.divergence.mode == DivergenceMode::fixed) {
    r.alpha = params.divergence.alpha;
    r.view_alpha.assign(params.num_views(), params.divergence.alpha);
  }
  r.rho = rho;
  r.mv_train_risk = r.stats.mv_risk;
  if (!pb.test_labels.empty()) {
    require(pb.test_labels.size() == pb.cache->test.size(), "test labels do not match the test block");
    r.mv_test_risk = majority_vote_risk(vote_mass(*pb.cache, rho, Q, pb.cache->test), pb.test_labels);
  }
  if (kind == BoundKind::CBound || kind == BoundKind::Ku2 || kind == BoundKind::Ku || kind == BoundKind::CTandem)
    r.notes.push_back("psi_r, psi_e and psi_d each use the full confidence delta; no union split across inversions");
  return r;
}

struct MinimizeResult {
  PosteriorParams params;
  BoundReport report;
};

/// Minimises the barrier-penalised objective of `kind` starting from the priors.
/// Stops when consecutive objective values differ by at most `tolerance`.
inline MinimizeResult minimize(BoundKind kind, const TrainingProblem& pb, DivergenceSpec divergence,
                               const OptimConfig& cfg) {
  require(pb.cache != nullptr, "minimize: no prediction cache");
  require(cfg.max_iters >= 1 && cfg.tolerance > 0.0 && cfg.learning_rate > 0.0 && cfg.bound.barrier.t > 0.0,
          "minimize: bad optimiser configuration");
  require(is_trainable(kind), "minimize: bound " + std::string(to_string(kind)) + " is evaluation-only");
  require_kind_valid(kind, pb.cache->num_classes);

  PosteriorParams params = PosteriorParams::init(pb.priors, divergence);
  const auto roles = coord_roles(params);
  const bool use_coin = cfg.optimizer == OptimizerKind::coin_betting ||
                        (cfg.optimizer == OptimizerKind::automatic && kind == BoundKind::CTandem);
  AdaptiveMoment adam;
  CoinBetting coin;

  Vector trace;
  bool converged = false;
  int k = 0;
  for (; k < cfg.max_iters; ++k) {
    const Evaluation ev = evaluate(kind, pb, params, cfg.bound);
    const double f = ev.objective.value;
    if (!std::isfinite(f)) {
      std::ostringstream os;
      os << "non-finite objective at iteration " << k << " (kind " << to_string(kind) << "); rho =";
      for (double r : params.rho()) os << ' ' << r;
      os << "; lambda = " << params.lambda << "; gamma = " << params.gamma;
      throw Error(os.str());
    }
    trace.push_back(f);
    if (trace.size() >= 2 && std::abs(trace.back() - trace[trace.size() - 2]) <= cfg.tolerance) {
      converged = true;
      break;
    }
    Vector x = flatten(params);
    Vector g = flatten(ev.objective.grad, params);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!is_free(kind, roles[i])) g[i] = 0.0;
    if (use_coin)
      coin.step(x, g);
    else
      adam.step(x, g, roles, cfg.learning_rate, cfg.weight_decay);
    unflatten(x, params);
    params.project();
  }

  MinimizeResult out{params, certify(kind, pb, params, cfg.bound)};
  out.report.trace = std::move(trace);
  out.report.initial_objective = out.report.trace.front();
  out.report.final_objective = converged ? out.report.trace.back() : objective_value(kind, pb, params, cfg.bound);
  out.report.iterations = static_cast<int>(out.report.trace.size());
  out.report.converged = converged;
  return out;
}

/// Worst coordinate-wise relative error between the analytic gradient and
/// central finite differences, over the coordinates `kind` trains.
/// Inversions are re-solved to 1e-14 so bisection noise stays far below the step.
inline double grad_check(BoundKind kind, const TrainingProblem& pb, const PosteriorParams& params,
                         BoundSettings s, double step = 1e-6) {
  s.bisection.eps = std::min(s.bisection.eps, 1e-14);
  s.bisection.max_iters = std::max(s.bisection.max_iters, 2000);
  const Evaluation ev = evaluate(kind, pb, params, s);
  const Vector analytic = flatten(ev.objective.grad, params);
  const auto roles = coord_roles(params);
  Vector x = flatten(params);
  PosteriorParams probe = params;
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!is_free(kind, roles[i])) continue;
    const double xi = x[i];
    x[i] = xi + step;
    unflatten(x, probe);
    const double fp = objective_value(kind, pb, probe, s);
    x[i] = xi - step;
    unflatten(x, probe);
    const double fm = objective_value(kind, pb, probe, s);
    x[i] = xi;
    const double fd = (fp - fm) / (2.0 * step);
    const double scale = std::max({std::abs(fd), std::abs(analytic[i]), 1e-3});
    worst = std::max(worst, std::abs(fd - analytic[i]) / scale);
  }
  return worst;
}

}  // namespace mvpb
