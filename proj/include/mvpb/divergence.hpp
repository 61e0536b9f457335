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

// Scalar divergence kernel: Bernoulli / categorical KL, Renyi divergence,
// inversion of the Bernoulli KL by bisection with implicit gradients, and the
// log-barrier extension used to soften inequality constraints.

#include <cmath>
#include <span>
#include <utility>

#include "mvpb/common.hpp"
#include "mvpb/dual.hpp"

namespace mvpb {

/// Renyi order stored as an unconstrained real: alpha = 1 + exp(raw).
struct AlphaParam {
  double raw = std::log(0.1);

  static AlphaParam from_alpha(double alpha) {
    require(alpha > 1.0, "alpha must be > 1");
    return AlphaParam{std::log(alpha - 1.0)};
  }
  double alpha() const { return 1.0 + std::exp(raw); }
  /// d alpha / d raw
  double slope() const { return std::exp(raw); }
};

struct BarrierConfig {
  double t = 100.0;
};

struct BisectionConfig {
  double eps = 1e-9;
  int max_iters = 1000;
};

namespace detail {

// 0 ln 0 := 0; returns +inf when q puts mass where p has none.
inline double kl_bernoulli_raw(double q, double p) {
  double r = 0.0;
  if (q > 0.0) r += q * std::log(q / p);
  if (q < 1.0) r += (1.0 - q) * std::log((1.0 - q) / (1.0 - p));
  return r;
}

// Safeguarded Newton steps on KL(q||p) = psi inside the final bracket [lo, hi].
// The bracket width bounds the error in p; polishing bounds the residual too.
inline double polish_root(double q, double psi, double p, double lo, double hi) {
  for (int k = 0; k < 4; ++k) {
    const double f = kl_bernoulli_raw(q, p) - psi;
    const double df = (p - q) / (p * (1.0 - p));
    if (f == 0.0 || df == 0.0 || !std::isfinite(df)) break;
    const double next = p - f / df;
    if (!(next > lo && next < hi) || next <= 0.0 || next >= 1.0) break;
    if (std::abs(kl_bernoulli_raw(q, next) - psi) >= std::abs(f)) break;
    p = next;
  }
  return p;
}

}  // namespace detail

/// KL(Ber(q) || Ber(p)).
inline double kl_binary(double q, double p) {
  require(p > 0.0 && p < 1.0, "kl_binary: p must lie strictly inside (0,1)");
  require(q >= 0.0 && q <= 1.0, "kl_binary: q must lie in [0,1]");
  return std::max(0.0, detail::kl_bernoulli_raw(q, p));
}

/// Categorical KL(Q || P); throws on absolute-continuity violation.
inline double kl_categorical(std::span<const double> Q, std::span<const double> P) {
  require(Q.size() == P.size(), "kl_categorical: size mismatch");
  CompensatedSum acc;
  for (std::size_t h = 0; h < Q.size(); ++h) {
    if (Q[h] == 0.0) continue;
    require(P[h] > 0.0, "kl_categorical: Q not absolutely continuous w.r.t. P");
    acc.add(Q[h] * std::log(Q[h] / P[h]));
  }
  return std::max(0.0, acc.value());
}

/// d KL(Q||P) / d Q_h.
inline Vector kl_categorical_grad(std::span<const double> Q, std::span<const double> P) {
  Vector g(Q.size(), 0.0);
  for (std::size_t h = 0; h < Q.size(); ++h)
    if (Q[h] > 0.0) g[h] = std::log(Q[h] / P[h]) + 1.0;
  return g;
}

struct RenyiValue {
  double value = 0.0;
  Vector grad_q;       // d D / d Q_h
  double grad_alpha = 0.0;
};

/// Renyi divergence D_alpha(Q||P) = 1/(alpha-1) ln sum_h Q_h (Q_h/P_h)^(alpha-1),
/// with gradients w.r.t. Q and alpha.
inline RenyiValue renyi_div_with_grad(std::span<const double> Q, std::span<const double> P,
                                      double alpha) {
  require(alpha > 1.0, "renyi_div: alpha must be > 1");
  require(Q.size() == P.size(), "renyi_div: size mismatch");
  const double am1 = alpha - 1.0;
  // S - 1 via expm1 stays accurate as alpha -> 1.
  CompensatedSum s_minus_one;
  CompensatedSum ds_dalpha;
  Vector w(Q.size(), 0.0);
  for (std::size_t h = 0; h < Q.size(); ++h) {
    if (Q[h] == 0.0) continue;
    require(P[h] > 0.0, "renyi_div: Q not absolutely continuous w.r.t. P");
    const double r = std::log(Q[h] / P[h]);
    const double e = std::expm1(am1 * r);
    w[h] = 1.0 + e;
    s_minus_one.add(Q[h] * e);
    ds_dalpha.add(Q[h] * w[h] * r);
  }
  const double sm1 = s_minus_one.value();
  const double log_s = std::log1p(sm1);
  const double s = 1.0 + sm1;

  RenyiValue out;
  out.value = std::max(0.0, log_s / am1);
  out.grad_q.assign(Q.size(), 0.0);
  for (std::size_t h = 0; h < Q.size(); ++h)
    if (Q[h] > 0.0) out.grad_q[h] = alpha * w[h] / (am1 * s);
  out.grad_alpha = -log_s / (am1 * am1) + ds_dalpha.value() / (am1 * s);
  return out;
}

inline double renyi_div(std::span<const double> Q, std::span<const double> P, double alpha) {
  return renyi_div_with_grad(Q, P, alpha).value;
}

enum class InvMode { upper, lower };

/// Largest p in [q, 1) with KL(q||p) <= psi, by bisection on [q, 1].
/// Saturates at 1 - 10 eps when the budget exceeds what the interval can hold.
inline double kl_inv_upper(double q, double psi, BisectionConfig cfg = {}) {
  require(q >= 0.0 && q <= 1.0, "kl_inv_upper: q must lie in [0,1]");
  require(psi >= 0.0, "kl_inv_upper: psi must be >= 0");
  require(cfg.eps > 0.0 && cfg.max_iters >= 1, "kl_inv_upper: bad bisection config");
  if (q >= 1.0) return 1.0;
  if (psi == 0.0) return q;
  const double cap = 1.0 - 10.0 * cfg.eps;
  if (cap <= q || detail::kl_bernoulli_raw(q, cap) <= psi) return std::max(cap, q);
  double lo = q;
  double hi = 1.0;
  double p = 0.5 * (lo + hi);
  for (int it = 0; it < cfg.max_iters; ++it) {
    p = 0.5 * (lo + hi);
    if (hi - lo < cfg.eps) return detail::polish_root(q, psi, p, lo, hi);
    const double k = detail::kl_bernoulli_raw(q, p);
    if (k == psi) return p;
    if (k > psi)
      hi = p;
    else
      lo = p;
  }
  return detail::polish_root(q, psi, p, lo, hi);
}

/// Smallest p in (0, q] with KL(q||p) <= psi, by bisection on [0, q].
inline double kl_inv_lower(double q, double psi, BisectionConfig cfg = {}) {
  require(q >= 0.0 && q <= 1.0, "kl_inv_lower: q must lie in [0,1]");
  require(psi >= 0.0, "kl_inv_lower: psi must be >= 0");
  require(cfg.eps > 0.0 && cfg.max_iters >= 1, "kl_inv_lower: bad bisection config");
  if (q <= 0.0) return 0.0;
  if (psi == 0.0) return q;
  const double floor = 10.0 * cfg.eps;
  if (floor >= q || detail::kl_bernoulli_raw(q, floor) <= psi) return std::min(floor, q);
  double lo = 0.0;
  double hi = q;
  double p = 0.5 * (lo + hi);
  for (int it = 0; it < cfg.max_iters; ++it) {
    p = 0.5 * (lo + hi);
    if (hi - lo < cfg.eps) return detail::polish_root(q, psi, p, lo, hi);
    const double k = detail::kl_bernoulli_raw(q, p);
    if (k == psi) return p;
    if (k > psi)
      lo = p;
    else
      hi = p;
  }
  return detail::polish_root(q, psi, p, lo, hi);
}

struct InvGrad {
  double dq = 0.0;
  double dpsi = 0.0;
};

/// Implicit-function gradients of the root p of KL(q||p) = psi.
/// At p == q the one-sided limits are dp/dq = 1 and |dp/dpsi| = inf.
inline InvGrad kl_inv_grad(double q, double psi, double p, InvMode mode) {
  (void)psi;
  require(p > 0.0 && p < 1.0, "kl_inv_grad: p on the boundary of (0,1)");
  const double inf = std::numeric_limits<double>::infinity();
  if (p == q) return {1.0, mode == InvMode::upper ? inf : -inf};
  const double dk_dp = (p - q) / (p * (1.0 - p));
  // At q in {0, 1} dp/dq is one-sided infinite. A risk pinned there has a zero
  // gradient upstream, so report 0 rather than let inf * 0 poison the chain.
  if (q <= 0.0 || q >= 1.0) return {0.0, 1.0 / dk_dp};
  const double dk_dq = std::log(q / p) - std::log((1.0 - q) / (1.0 - p));
  return {-dk_dq / dk_dp, 1.0 / dk_dp};
}

namespace detail {

inline bool saturated_upper(double p, BisectionConfig cfg) { return p >= 1.0 - 10.0 * cfg.eps; }
inline bool saturated_lower(double p, BisectionConfig cfg) { return p <= 10.0 * cfg.eps; }

}  // namespace detail

// Dual-number overloads: value by bisection, tangent by implicit differentiation.
// Saturated or degenerate roots carry zero gradient.
inline double kl_upper(double q, double psi, BisectionConfig cfg) { return kl_inv_upper(q, psi, cfg); }
inline double kl_lower(double q, double psi, BisectionConfig cfg) { return kl_inv_lower(q, psi, cfg); }

template <std::size_t N>
Dual<N> kl_inv_dual(const Dual<N>& q, const Dual<N>& psi, BisectionConfig cfg, InvMode mode) {
  const double p = mode == InvMode::upper ? kl_inv_upper(q.v, psi.v, cfg) : kl_inv_lower(q.v, psi.v, cfg);
  Dual<N> r(p);
  const bool sat = mode == InvMode::upper ? detail::saturated_upper(p, cfg) : detail::saturated_lower(p, cfg);
  if (sat || p <= 0.0 || p >= 1.0) return r;
  const InvGrad g = kl_inv_grad(q.v, psi.v, p, mode);
  for (std::size_t i = 0; i < N; ++i) {
    double t = 0.0;
    if (q.d[i] != 0.0) t += g.dq * q.d[i];
    if (psi.d[i] != 0.0) t += g.dpsi * psi.d[i];
    r.d[i] = t;
  }
  return r;
}

template <std::size_t N>
Dual<N> kl_upper(const Dual<N>& q, const Dual<N>& psi, BisectionConfig cfg) {
  return kl_inv_dual(q, psi, cfg, InvMode::upper);
}
template <std::size_t N>
Dual<N> kl_lower(const Dual<N>& q, const Dual<N>& psi, BisectionConfig cfg) {
  return kl_inv_dual(q, psi, cfg, InvMode::lower);
}

struct BarrierValue {
  double value;
  double slope;
};

/// Log-barrier extension: -(1/t) ln(-a) for a <= -1/t^2, linear continuation beyond.
inline BarrierValue log_barrier(double a, BarrierConfig cfg = {}) {
  require(cfg.t > 0.0, "log_barrier: t must be > 0");
  const double t = cfg.t;
  if (a <= -1.0 / (t * t)) return {-std::log(-a) / t, -1.0 / (t * a)};
  return {t * a - std::log(1.0 / (t * t)) / t + 1.0 / t, t};
}

inline double barrier(double a, BarrierConfig cfg) { return log_barrier(a, cfg).value; }

template <std::size_t N>
Dual<N> barrier(const Dual<N>& a, BarrierConfig cfg) {
  const BarrierValue b = log_barrier(a.v, cfg);
  return a.apply(b.value, b.slope);
}

}  // namespace mvpb
