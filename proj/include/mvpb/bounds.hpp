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

// Complexity (psi) terms, certified bound values and the log-barrier
// training objectives built on top of them.
//
// Every bound is written once as a template over the scalar type: with
// `double` it evaluates, with `Dual<kSlots>` it also yields the partials
// w.r.t. the ten scalar inputs (statistics, psi terms, lambdas, gamma).
// Those partials are then chained onto logits and Renyi orders.

#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mvpb/common.hpp"
#include "mvpb/divergence.hpp"
#include "mvpb/dual.hpp"
#include "mvpb/risks.hpp"

namespace mvpb {

enum class BoundKind { R, K, E, Ku, E2, K2, R2, Ku2, CBound, CTandem, McAllester, Catoni };

inline constexpr std::array<BoundKind, 10> kTrainableKinds{BoundKind::R,  BoundKind::K,   BoundKind::E,
                                                            BoundKind::Ku, BoundKind::E2,  BoundKind::K2,
                                                            BoundKind::R2, BoundKind::Ku2, BoundKind::CBound,
                                                            BoundKind::CTandem};

inline std::string_view to_string(BoundKind k) {
  switch (k) {
    case BoundKind::R: return "R";
    case BoundKind::K: return "K";
    case BoundKind::E: return "E";
    case BoundKind::Ku: return "Ku";
    case BoundKind::E2: return "E2";
    case BoundKind::K2: return "K2";
    case BoundKind::R2: return "R2";
    case BoundKind::Ku2: return "Ku2";
    case BoundKind::CBound: return "CBound";
    case BoundKind::CTandem: return "CTandem";
    case BoundKind::McAllester: return "McAllester";
    case BoundKind::Catoni: return "Catoni";
  }
  return "?";
}

inline BoundKind parse_bound_kind(std::string_view s) {
  for (int k = 0; k <= static_cast<int>(BoundKind::Catoni); ++k)
    if (to_string(static_cast<BoundKind>(k)) == s) return static_cast<BoundKind>(k);
  throw Error("unknown bound kind '" + std::string(s) + "'");
}

inline bool is_binary_only(BoundKind k) {
  return k == BoundKind::R2 || k == BoundKind::Ku2 || k == BoundKind::CBound;
}
inline bool is_trainable(BoundKind k) { return k != BoundKind::McAllester && k != BoundKind::Catoni; }

inline void require_kind_valid(BoundKind k, int num_classes) {
  if (is_binary_only(k) && num_classes != 2)
    throw Error("binary-only bound " + std::string(to_string(k)) + " requested on " + std::to_string(num_classes) +
                "-class data");
}

// ---------------------------------------------------------------------------
// Parameters

enum class DivergenceMode { kl, fixed, learnable };

struct DivergenceSpec {
  DivergenceMode mode = DivergenceMode::kl;
  double alpha = 1.1;  // fixed order, or the starting order when learnable

  static DivergenceSpec parse(std::string_view s) {
    if (s == "kl") return {DivergenceMode::kl, 1.1};
    if (s == "learnable") return {DivergenceMode::learnable, 1.1};
    if (s.starts_with("fixed:")) {
      double a = 0.0;
      try {
        a = std::stod(std::string(s.substr(6)));
      } catch (const std::exception&) {
        throw Error("--alpha fixed:X needs a number (got '" + std::string(s) + "')");
      }
      require(a > 1.0, "--alpha fixed:X needs X > 1");
      return {DivergenceMode::fixed, a};
    }
    throw Error("--alpha must be kl, fixed:X or learnable (got '" + std::string(s) + "')");
  }
  std::string str() const {
    switch (mode) {
      case DivergenceMode::kl: return "kl";
      case DivergenceMode::learnable: return "learnable";
      case DivergenceMode::fixed: break;
    }
    std::ostringstream os;
    os << "fixed:" << alpha;
    return os.str();
  }
};

inline constexpr double kLambdaMin = 1e-4;
inline constexpr double kLambdaMax = 2.0 - 1e-4;
inline constexpr double kGammaMin = 1e-4;
// alpha - 1 is kept >= 1e-4 so the order stays representably above 1.
inline constexpr double kAlphaRawMin = -9.210340371976182;  // ln(1e-4)

/// Fixed priors: hyper-prior pi over views and P_v over each view's voters.
struct Priors {
  Vector pi;
  std::vector<Vector> P;

  static Priors uniform(const std::vector<std::size_t>& voters_per_view) {
    Priors p;
    p.pi = mvpb::uniform(voters_per_view.size());
    for (auto n : voters_per_view) p.P.push_back(mvpb::uniform(n));
    return p;
  }
};

/// Everything the optimizer updates. Simplices are stored as logits.
struct PosteriorParams {
  Vector rho_logits;
  std::vector<Vector> q_logits;
  double lambda = 1.0;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double gamma = 1.0;
  DivergenceSpec divergence;
  AlphaParam alpha;                   // order of D(rho || pi)
  std::vector<AlphaParam> view_alpha; // order of D(Q_v || P_v)

  static PosteriorParams init(const Priors& priors, DivergenceSpec div) {
    PosteriorParams p;
    p.rho_logits = logits_of(priors.pi);
    for (const auto& P : priors.P) p.q_logits.push_back(logits_of(P));
    p.divergence = div;
    if (div.mode != DivergenceMode::kl) {
      p.alpha = AlphaParam::from_alpha(div.alpha);
      p.view_alpha.assign(priors.P.size(), p.alpha);
    }
    return p;
  }

  std::size_t num_views() const { return rho_logits.size(); }
  Vector rho() const { return softmax(rho_logits); }
  std::vector<Vector> Q() const {
    std::vector<Vector> out;
    for (const auto& z : q_logits) out.push_back(softmax(z));
    return out;
  }
  double alpha_value() const { return alpha.alpha(); }
  double view_alpha_value(std::size_t v) const { return view_alpha[v].alpha(); }

  /// Projection step: clamps scalars into their domains and recentres logits.
  void project() {
    lambda = std::clamp(lambda, kLambdaMin, kLambdaMax);
    lambda1 = std::clamp(lambda1, kLambdaMin, kLambdaMax);
    lambda2 = std::clamp(lambda2, kLambdaMin, kLambdaMax);
    gamma = std::max(gamma, kGammaMin);
    alpha.raw = std::max(alpha.raw, kAlphaRawMin);
    for (auto& a : view_alpha) a.raw = std::max(a.raw, kAlphaRawMin);
    auto recentre = [](Vector& z) {
      const double lse = log_sum_exp(z);
      for (double& x : z) x -= lse;
    };
    recentre(rho_logits);
    for (auto& z : q_logits) recentre(z);
  }
};

/// Gradient with the same layout as the free parameters.
struct ParamGrad {
  Vector rho_logits;
  std::vector<Vector> q_logits;
  double lambda = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double gamma = 0.0;
  double alpha_raw = 0.0;
  Vector view_alpha_raw;
};

// Flat view used by optimizers and finite differences:
// [rho logits | q logits per view | lambda lambda1 lambda2 gamma | alpha view_alpha...]
inline Vector flatten(const PosteriorParams& p) {
  Vector x(p.rho_logits);
  for (const auto& z : p.q_logits) x.insert(x.end(), z.begin(), z.end());
  x.insert(x.end(), {p.lambda, p.lambda1, p.lambda2, p.gamma});
  if (p.divergence.mode == DivergenceMode::learnable) {
    x.push_back(p.alpha.raw);
    for (const auto& a : p.view_alpha) x.push_back(a.raw);
  }
  return x;
}

inline void unflatten(std::span<const double> x, PosteriorParams& p) {
  std::size_t k = 0;
  for (double& z : p.rho_logits) z = x[k++];
  for (auto& zs : p.q_logits)
    for (double& z : zs) z = x[k++];
  p.lambda = x[k++];
  p.lambda1 = x[k++];
  p.lambda2 = x[k++];
  p.gamma = x[k++];
  if (p.divergence.mode == DivergenceMode::learnable) {
    p.alpha.raw = x[k++];
    for (auto& a : p.view_alpha) a.raw = x[k++];
  }
  require(k == x.size(), "unflatten: size mismatch");
}

inline Vector flatten(const ParamGrad& g, const PosteriorParams& like) {
  Vector x(g.rho_logits);
  for (const auto& z : g.q_logits) x.insert(x.end(), z.begin(), z.end());
  x.insert(x.end(), {g.lambda, g.lambda1, g.lambda2, g.gamma});
  if (like.divergence.mode == DivergenceMode::learnable) {
    x.push_back(g.alpha_raw);
    x.insert(x.end(), g.view_alpha_raw.begin(), g.view_alpha_raw.end());
  }
  return x;
}

/// Role of each flat coordinate.
enum class Coord { logit, lambda, lambda1, lambda2, gamma, alpha };

inline std::vector<Coord> coord_roles(const PosteriorParams& p) {
  std::vector<Coord> roles(p.rho_logits.size(), Coord::logit);
  for (const auto& z : p.q_logits) roles.insert(roles.end(), z.size(), Coord::logit);
  roles.insert(roles.end(), {Coord::lambda, Coord::lambda1, Coord::lambda2, Coord::gamma});
  if (p.divergence.mode == DivergenceMode::learnable) roles.insert(roles.end(), 1 + p.view_alpha.size(), Coord::alpha);
  return roles;
}

/// Whether a coordinate of the given role is trained by `kind`.
inline bool is_free(BoundKind kind, Coord c) {
  switch (c) {
    case Coord::logit:
    case Coord::alpha: return true;
    case Coord::lambda: return kind == BoundKind::R || kind == BoundKind::E2 || kind == BoundKind::R2;
    case Coord::lambda1:
    case Coord::lambda2: return kind == BoundKind::E;
    case Coord::gamma: return kind == BoundKind::R2;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Divergence and psi terms

/// D = E_rho[D_{alpha_v}(Q_v || P_v)] + D_alpha(rho || pi), with gradients.
struct DivergenceTerm {
  double value = 0.0;
  double hyper = 0.0;       // D(rho || pi)
  Vector per_view;          // D(Q_v || P_v)
  SimplexGrad grad;         // w.r.t. probabilities rho, Q_v
  double grad_alpha_raw = 0.0;
  Vector grad_view_alpha_raw;
};

inline DivergenceTerm divergence_term(const PosteriorParams& params, const Priors& priors) {
  const Vector rho = params.rho();
  const auto Q = params.Q();
  const std::size_t V = rho.size();
  require(priors.pi.size() == V && priors.P.size() == V, "priors do not match parameter shapes");
  DivergenceTerm out;
  out.per_view.assign(V, 0.0);
  out.grad.rho.assign(V, 0.0);
  out.grad_view_alpha_raw.assign(V, 0.0);
  const bool kl = params.divergence.mode == DivergenceMode::kl;
  const bool learn = params.divergence.mode == DivergenceMode::learnable;
  auto order = [&](const AlphaParam& a) { return learn ? a.alpha() : params.divergence.alpha; };

  CompensatedSum total;
  for (std::size_t v = 0; v < V; ++v) {
    require(priors.P[v].size() == Q[v].size(), "prior size mismatch in view " + std::to_string(v + 1));
    Vector gq;
    if (kl) {
      out.per_view[v] = kl_categorical(Q[v], priors.P[v]);
      gq = kl_categorical_grad(Q[v], priors.P[v]);
    } else {
      const auto r = renyi_div_with_grad(Q[v], priors.P[v], order(params.view_alpha[v]));
      out.per_view[v] = r.value;
      gq = r.grad_q;
      if (learn) out.grad_view_alpha_raw[v] = rho[v] * r.grad_alpha * params.view_alpha[v].slope();
    }
    for (double& x : gq) x *= rho[v];
    out.grad.q.push_back(std::move(gq));
    out.grad.rho[v] = out.per_view[v];
    total.add(rho[v] * out.per_view[v]);
  }
  if (kl) {
    out.hyper = kl_categorical(rho, priors.pi);
    const auto g = kl_categorical_grad(rho, priors.pi);
    for (std::size_t v = 0; v < V; ++v) out.grad.rho[v] += g[v];
  } else {
    const auto r = renyi_div_with_grad(rho, priors.pi, order(params.alpha));
    out.hyper = r.value;
    for (std::size_t v = 0; v < V; ++v) out.grad.rho[v] += r.grad_q[v];
    if (learn) out.grad_alpha_raw = r.grad_alpha * params.alpha.slope();
  }
  total.add(out.hyper);
  out.value = total.value();
  return out;
}

struct PsiTerms {
  double psi_r = 0.0;
  double psi_e = 0.0;
  double psi_d = 0.0;
  double delta = 0.05;
  std::size_t m = 0;
  std::size_t n = 0;
  double divergence = 0.0;  // D, shared by all three terms
};

/// psi terms for a given total divergence D.
inline PsiTerms psi_from_divergence(double D, std::size_t m, std::size_t n, double delta) {
  require(delta > 0.0 && delta <= 1.0, "psi_terms: delta must lie in (0,1)");
  require(m >= 1 && n >= 1, "psi_terms: m and n must be >= 1");
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  PsiTerms p;
  p.delta = delta;
  p.m = m;
  p.n = n;
  p.divergence = D;
  p.psi_r = (D + std::log(2.0 * std::sqrt(md) / delta)) / md;
  p.psi_e = (2.0 * D + std::log(4.0 * std::sqrt(md) / delta)) / md;
  p.psi_d = (2.0 * D + std::log(4.0 * std::sqrt(nd) / delta)) / nd;
  return p;
}

inline PsiTerms psi_terms(const PosteriorParams& params, const Priors& priors, std::size_t m, std::size_t n,
                          double delta) {
  return psi_from_divergence(divergence_term(params, priors).value, m, n, delta);
}

// ---------------------------------------------------------------------------
// Bound expressions

struct BoundSettings {
  BisectionConfig bisection{};
  BarrierConfig barrier{};
  double catoni_c = 0.6931471805599453;  // ln 2
};

/// The scalar inputs every trainable bound is a function of.
template <typename T>
struct BoundInputs {
  T gibbs, joint, dis;
  T psi_r, psi_e, psi_d;
  T lambda, lambda1, lambda2, gamma;
};

inline constexpr std::size_t kSlots = 10;
using BoundDual = Dual<kSlots>;

template <typename T>
T lambda_form(const T& risk, const T& psi, const T& lam) {
  const T half = 1.0 - lam / 2.0;
  return risk / half + psi / (lam * half);
}

/// Raw bound value (no clamping) and, when `with_barrier`, the log-barrier
/// penalties of the constrained training problem added on top.
template <typename T>
T bound_expression(BoundKind kind, const BoundInputs<T>& x, const BoundSettings& s, bool with_barrier) {
  using std::sqrt;
  const auto& bc = s.bisection;
  const auto B = [&](const T& a) { return barrier(a, s.barrier); };
  T value{};
  T penalty{};
  switch (kind) {
    case BoundKind::R: {
      const T r = lambda_form(x.gibbs, x.psi_r, x.lambda);
      value = 2.0 * r;
      penalty = B(r - 0.5);
      break;
    }
    case BoundKind::E: {
      const T e = lambda_form(x.joint, x.psi_e, x.lambda1);
      const T d = lambda_form(x.dis, x.psi_d, x.lambda2);
      value = 2.0 * e + d;
      penalty = B(e - 0.25) + B(d - 2.0 * (sqrt(e) - e));
      break;
    }
    case BoundKind::K: {
      const T r = kl_upper(x.gibbs, x.psi_r, bc);
      value = 2.0 * r;
      penalty = B(r - 0.5);
      break;
    }
    case BoundKind::Ku: {
      const T e = kl_upper(x.joint, x.psi_e, bc);
      const T d = kl_upper(x.dis, x.psi_d, bc);
      value = 2.0 * e + d;
      penalty = B(e - 0.25) + B(d - 2.0 * (sqrt(e) - e));
      break;
    }
    case BoundKind::E2: {
      const T e = lambda_form(x.joint, x.psi_e, x.lambda);
      value = 4.0 * e;
      penalty = B(e - 0.25);
      break;
    }
    case BoundKind::K2: {
      const T e = kl_upper(x.joint, x.psi_e, bc);
      value = 4.0 * e;
      penalty = B(e - 0.25);
      break;
    }
    case BoundKind::R2: {
      const T r = lambda_form(x.gibbs, x.psi_r, x.lambda);
      const T d = (1.0 - x.gamma / 2.0) * x.dis - x.psi_d / x.gamma;
      value = 4.0 * r - 2.0 * d;
      penalty = B(r - 0.5) + B(d - 0.5);
      break;
    }
    case BoundKind::Ku2: {
      const T r = kl_upper(x.gibbs, x.psi_r, bc);
      const T d = kl_lower(x.dis, x.psi_d, bc);
      value = 4.0 * r - 2.0 * d;
      penalty = B(r - 0.5) + B(d - 0.5);
      break;
    }
    case BoundKind::CBound: {
      const T r = kl_upper(x.gibbs, x.psi_r, bc);
      const T d = kl_lower(x.dis, x.psi_d, bc);
      const T num = 1.0 - 2.0 * min_by_value(T(0.5), r);
      const T den = 1.0 - 2.0 * max_by_value(T(0.0), d);
      if (!(value_of(den) > 0.0)) throw Error("degenerate C-Bound: disagreement lower bound reaches 1/2");
      value = 1.0 - num * num / den;
      penalty = B(r - 0.5);
      break;
    }
    case BoundKind::CTandem: {
      const T e = kl_upper(x.joint, x.psi_e, bc);
      const T r_up = kl_upper(x.gibbs, x.psi_r, bc);
      const T r_low = kl_lower(x.gibbs, x.psi_r, bc);
      const T den = e - r_up + 0.25;
      if (!(value_of(den) > 0.0)) throw Error("degenerate C-Tandem: denominator <= 0");
      value = (e - r_low * r_low) / den;
      penalty = B(r_up - 0.5) + B(e - 0.25);
      break;
    }
    case BoundKind::McAllester:
    case BoundKind::Catoni:
      throw Error("bound " + std::string(to_string(kind)) + " is evaluation-only");
  }
  return with_barrier ? value + penalty : value;
}

inline BoundInputs<double> make_inputs(const EmpiricalStats& st, const PsiTerms& psi, const PosteriorParams& p) {
  return {st.gibbs, st.joint, st.disagreement, psi.psi_r, psi.psi_e, psi.psi_d,
          p.lambda, p.lambda1,  p.lambda2,       p.gamma};
}

struct BoundValue {
  double raw = 0.0;        // formula value
  double certified = 0.0;  // clamped into [0, 4] (only R2 / Ku2 can go negative)
};

/// Certified value of any bound kind at the given statistics and parameters.
inline BoundValue eval_bound(BoundKind kind, const EmpiricalStats& stats, const PsiTerms& psi,
                             const PosteriorParams& params, int num_classes, const BoundSettings& s = {}) {
  require_kind_valid(kind, num_classes);
  BoundValue out;
  if (kind == BoundKind::McAllester) {
    out.raw = stats.gibbs + std::sqrt(psi.psi_r / 2.0);
  } else if (kind == BoundKind::Catoni) {
    const double c = s.catoni_c;
    const double a = c * stats.gibbs + (psi.divergence + std::log(1.0 / psi.delta)) / static_cast<double>(psi.m);
    out.raw = -std::expm1(-a) / -std::expm1(-c);
  } else {
    out.raw = bound_expression(kind, make_inputs(stats, psi, params), s, false);
  }
  out.certified = std::clamp(out.raw, 0.0, 4.0);
  return out;
}

/// Inverted-KL values reported alongside a bound.
struct InvertedValues {
  double gibbs_upper = 0.0;
  double gibbs_lower = 0.0;
  double joint_upper = 0.0;
  double dis_upper = 0.0;
  double dis_lower = 0.0;
};

inline InvertedValues inverted_values(const EmpiricalStats& st, const PsiTerms& psi, BisectionConfig bc = {}) {
  return {kl_inv_upper(st.gibbs, psi.psi_r, bc), kl_inv_lower(st.gibbs, psi.psi_r, bc),
          kl_inv_upper(st.joint, psi.psi_e, bc), kl_inv_upper(st.disagreement, psi.psi_d, bc),
          kl_inv_lower(st.disagreement, psi.psi_d, bc)};
}

// ---------------------------------------------------------------------------
// Objective with full gradient

struct ObjectiveValue {
  double value = 0.0;
  ParamGrad grad;
};

/// Barrier-penalised training objective of `kind` and its gradient w.r.t.
/// every free parameter (logits, lambdas, gamma, learnable Renyi orders).
inline ObjectiveValue objective(BoundKind kind, const StatsWithGrad& sg, const PosteriorParams& params,
                                const Priors& priors, double delta, int num_classes, const BoundSettings& s = {}) {
  require(is_trainable(kind), "objective: bound " + std::string(to_string(kind)) + " is evaluation-only");
  require_kind_valid(kind, num_classes);
  const DivergenceTerm div = divergence_term(params, priors);
  const PsiTerms psi = psi_from_divergence(div.value, sg.stats.m, sg.stats.n, delta);

  const auto x0 = make_inputs(sg.stats, psi, params);
  const BoundInputs<BoundDual> x{BoundDual::variable(x0.gibbs, 0),   BoundDual::variable(x0.joint, 1),
                                 BoundDual::variable(x0.dis, 2),     BoundDual::variable(x0.psi_r, 3),
                                 BoundDual::variable(x0.psi_e, 4),   BoundDual::variable(x0.psi_d, 5),
                                 BoundDual::variable(x0.lambda, 6),  BoundDual::variable(x0.lambda1, 7),
                                 BoundDual::variable(x0.lambda2, 8), BoundDual::variable(x0.gamma, 9)};
  const BoundDual f = bound_expression(kind, x, s, true);
  const auto& d = f.d;

  ObjectiveValue out;
  out.value = f.v;
  const double md = static_cast<double>(psi.m);
  const double nd = static_cast<double>(psi.n);
  const double d_div = d[3] / md + 2.0 * d[4] / md + 2.0 * d[5] / nd;

  const Vector rho = params.rho();
  const auto Q = params.Q();
  SimplexGrad prob;
  prob.rho.assign(rho.size(), 0.0);
  for (std::size_t v = 0; v < rho.size(); ++v)
    prob.rho[v] = d[0] * sg.gibbs.rho[v] + d[1] * sg.joint.rho[v] + d[2] * sg.disagreement.rho[v] +
                  d_div * div.grad.rho[v];
  for (std::size_t v = 0; v < Q.size(); ++v) {
    Vector g(Q[v].size());
    for (std::size_t h = 0; h < g.size(); ++h)
      g[h] = d[0] * sg.gibbs.q[v][h] + d[1] * sg.joint.q[v][h] + d[2] * sg.disagreement.q[v][h] +
             d_div * div.grad.q[v][h];
    prob.q.push_back(std::move(g));
  }
  const SimplexGrad logit = to_logit_grad(prob, rho, Q);
  out.grad.rho_logits = logit.rho;
  out.grad.q_logits = logit.q;
  out.grad.lambda = d[6];
  out.grad.lambda1 = d[7];
  out.grad.lambda2 = d[8];
  out.grad.gamma = d[9];
  out.grad.alpha_raw = d_div * div.grad_alpha_raw;
  out.grad.view_alpha_raw.resize(div.grad_view_alpha_raw.size());
  for (std::size_t v = 0; v < div.grad_view_alpha_raw.size(); ++v)
    out.grad.view_alpha_raw[v] = d_div * div.grad_view_alpha_raw[v];
  return out;
}

/// Arguments handed to B_t by the objective of `kind` (constraint slack a <= 0 when satisfied).
inline std::vector<double> constraint_arguments(BoundKind kind, const EmpiricalStats& st, const PsiTerms& psi,
                                                const PosteriorParams& p, BisectionConfig bc = {}) {
  const auto x = make_inputs(st, psi, p);
  switch (kind) {
    case BoundKind::R: return {lambda_form(x.gibbs, x.psi_r, x.lambda) - 0.5};
    case BoundKind::E: {
      const double e = lambda_form(x.joint, x.psi_e, x.lambda1);
      const double d = lambda_form(x.dis, x.psi_d, x.lambda2);
      return {e - 0.25, d - 2.0 * (std::sqrt(e) - e)};
    }
    case BoundKind::K:
    case BoundKind::CBound: return {kl_inv_upper(x.gibbs, x.psi_r, bc) - 0.5};
    case BoundKind::Ku: {
      const double e = kl_inv_upper(x.joint, x.psi_e, bc);
      const double d = kl_inv_upper(x.dis, x.psi_d, bc);
      return {e - 0.25, d - 2.0 * (std::sqrt(e) - e)};
    }
    case BoundKind::E2: return {lambda_form(x.joint, x.psi_e, x.lambda) - 0.25};
    case BoundKind::K2: return {kl_inv_upper(x.joint, x.psi_e, bc) - 0.25};
    case BoundKind::R2: {
      const double d = (1.0 - x.gamma / 2.0) * x.dis - x.psi_d / x.gamma;
      return {lambda_form(x.gibbs, x.psi_r, x.lambda) - 0.5, d - 0.5};
    }
    case BoundKind::Ku2:
      return {kl_inv_upper(x.gibbs, x.psi_r, bc) - 0.5, kl_inv_lower(x.dis, x.psi_d, bc) - 0.5};
    case BoundKind::CTandem:
      return {kl_inv_upper(x.gibbs, x.psi_r, bc) - 0.5, kl_inv_upper(x.joint, x.psi_e, bc) - 0.25};
    case BoundKind::McAllester:
    case BoundKind::Catoni: return {};
  }
  return {};
}

}  // namespace mvpb
