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

#include <cmath>
#include <random>

#include "mvpb/divergence.hpp"

using namespace mvpb;
using Catch::Approx;

namespace {

// Reference binary KL written out term by term.
double ref_kl(double q, double p) {
  double s = 0.0;
  if (q > 0) s += q * std::log(q / p);
  if (q < 1) s += (1 - q) * std::log((1 - q) / (1 - p));
  return s;
}

double ref_renyi(const Vector& Q, const Vector& P, double a) {
  double s = 0.0;
  for (std::size_t h = 0; h < Q.size(); ++h) s += std::pow(Q[h], a) * std::pow(P[h], 1 - a);
  return std::log(s) / (a - 1);
}

Vector random_simplex(std::mt19937_64& rng, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  Vector p(n);
  double s = 0;
  for (auto& x : p) s += (x = e(rng) + 1e-3);
  for (auto& x : p) x /= s;
  return p;
}

}  // namespace

TEST_CASE("binary kl values") {
  CHECK(kl_binary(0.3, 0.3) == 0.0);
  CHECK(kl_binary(0.0, 0.5) == Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(kl_binary(0.1, 0.2) == Approx(ref_kl(0.1, 0.2)).epsilon(1e-12));
  CHECK(kl_binary(0.1, 0.2) == Approx(0.036690).margin(5e-7));
  CHECK_THROWS_AS(kl_binary(0.1, 0.0), Error);
  CHECK_THROWS_AS(kl_binary(0.1, 1.0), Error);
}

TEST_CASE("categorical kl values") {
  const Vector u{0.5, 0.5};
  CHECK(kl_categorical(u, u) == 0.0);
  CHECK(kl_categorical(Vector{1.0, 0.0}, u) == Approx(std::log(2.0)).epsilon(1e-12));
  const double direct = 0.8 * std::log(0.8 / 0.5) + 0.2 * std::log(0.2 / 0.5);
  CHECK(kl_categorical(Vector{0.8, 0.2}, u) == Approx(direct).epsilon(1e-12));
  CHECK(direct == Approx(0.192745).margin(5e-7));
}

TEST_CASE("renyi values and kl limit") {
  const Vector u{0.5, 0.5}, q{0.8, 0.2};
  for (double a : {1.01, 2.0, 7.0}) CHECK(renyi_div(u, u, a) == Approx(0.0).margin(1e-15));
  CHECK(renyi_div(q, u, 2.0) == Approx(std::log(1.36)).epsilon(1e-12));
  CHECK(std::log(1.36) == Approx(0.307485).margin(5e-7));
  CHECK(std::abs(renyi_div(q, u, 1.0 + 1e-6) - kl_categorical(q, u)) <= 1e-4);
  CHECK_THROWS_AS(renyi_div(q, u, 1.0), Error);
}

TEST_CASE("renyi agrees with the power-sum form") {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 50; ++k) {
    const auto Q = random_simplex(rng, 6), P = random_simplex(rng, 6);
    for (double a : {1.1, 1.5, 3.0}) CHECK(renyi_div(Q, P, a) == Approx(ref_renyi(Q, P, a)).epsilon(1e-10));
  }
}

TEST_CASE("renyi gradients match finite differences") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 20; ++k) {
    const auto Q = random_simplex(rng, 5), P = random_simplex(rng, 5);
    const double a = 1.05 + 2.0 * std::uniform_real_distribution<double>(0, 1)(rng);
    const auto g = renyi_div_with_grad(Q, P, a);
    const double h = 1e-6;
    for (std::size_t i = 0; i < Q.size(); ++i) {
      Vector qp = Q, qm = Q;
      qp[i] += h;
      qm[i] -= h;
      // the unnormalised extension (sum Q != 1) is what the gradient differentiates
      auto f = [&](const Vector& x) {
        double s = 0;
        for (std::size_t j = 0; j < x.size(); ++j) s += x[j] * std::pow(x[j] / P[j], a - 1);
        return std::log(s) / (a - 1);
      };
      CHECK(g.grad_q[i] == Approx((f(qp) - f(qm)) / (2 * h)).epsilon(1e-5).margin(1e-9));
    }
    const double fd = (ref_renyi(Q, P, a + 1e-6) - ref_renyi(Q, P, a - 1e-6)) / 2e-6;
    CHECK(g.grad_alpha == Approx(fd).epsilon(1e-4).margin(1e-8));
  }
}

TEST_CASE("upper inversion") {
  CHECK(kl_inv_upper(0.3, 0.0) == 0.3);
  CHECK(kl_inv_upper(0.0, std::log(2.0)) == Approx(0.5).margin(1e-9));
  const double p = kl_inv_upper(0.1, 0.2);
  CHECK(p == Approx(0.3785).margin(5e-4));
  CHECK(std::abs(ref_kl(0.1, p) - 0.2) <= 1e-6);
  CHECK(p > 0.1);
  CHECK(kl_inv_upper(1.0, 0.5) == 1.0);
}

TEST_CASE("lower inversion") {
  CHECK(kl_inv_lower(0.3, 0.0) == 0.3);
  CHECK(kl_inv_lower(1.0, std::log(2.0)) == Approx(0.5).margin(1e-9));
  const double p = kl_inv_lower(0.5, 0.1);
  CHECK(p < 0.5);
  CHECK(std::abs(ref_kl(0.5, p) - 0.1) <= 1e-6);
  CHECK(kl_inv_lower(0.0, 0.5) == 0.0);
}

TEST_CASE("inversion saturates instead of failing") {
  CHECK(kl_inv_upper(0.4, 50.0) >= 1.0 - 1e-8);
  CHECK(kl_inv_lower(0.4, 50.0) <= 1e-8);
}

TEST_CASE("implicit gradients of the inversion") {
  const double q = 0.1, psi = 0.2;
  const double p = kl_inv_upper(q, psi);
  const auto g = kl_inv_grad(q, psi, p, InvMode::upper);
  CHECK(g.dpsi == Approx(p * (1 - p) / (p - q)).epsilon(1e-12));
  CHECK(g.dpsi == Approx(0.8446).margin(5e-4));
  BisectionConfig tight{1e-15, 2000};
  const double h = 1e-5;
  const double fd = (kl_inv_upper(q, psi + h, tight) - kl_inv_upper(q, psi - h, tight)) / (2 * h);
  CHECK(std::abs(g.dpsi - fd) / std::abs(fd) <= 1e-5);

  // dp/dq near q = 0
  const double q0 = 1e-6, hq = 1e-9;
  const double p0 = kl_inv_upper(q0, psi, tight);
  const auto g0 = kl_inv_grad(q0, psi, p0, InvMode::upper);
  const double fdq = (kl_inv_upper(q0 + hq, psi, tight) - kl_inv_upper(q0 - hq, psi, tight)) / (2 * hq);
  CHECK(std::isfinite(g0.dq));
  CHECK(g0.dq == Approx(fdq).epsilon(1e-4));

  const double pl = kl_inv_lower(0.5, 0.1);
  CHECK(kl_inv_grad(0.5, 0.1, pl, InvMode::lower).dpsi < 0.0);
}

TEST_CASE("log barrier") {
  const BarrierConfig c{100.0};
  CHECK(barrier(-1.0, c) == Approx(0.0).margin(1e-15));
  const double knot = -1.0 / (100.0 * 100.0);
  const double left = -std::log(-knot) / 100.0;
  const double right = 100.0 * knot - std::log(1.0 / 1e4) / 100.0 + 1.0 / 100.0;
  CHECK(left == Approx(2 * std::log(100.0) / 100.0).epsilon(1e-12));
  CHECK(right == Approx(left).epsilon(1e-12));
  CHECK(barrier(knot, c) == Approx(left).epsilon(1e-12));
  CHECK(barrier(0.0, c) == Approx(2 * std::log(100.0) / 100.0 + 0.01).epsilon(1e-12));
  CHECK(barrier(0.0, c) == Approx(0.102103).margin(5e-7));
  CHECK_THROWS_AS(log_barrier(0.0, BarrierConfig{0.0}), Error);
}
