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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvpb {

/// Every recoverable failure in the library is reported through this type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw Error(what);
}

using Vector = std::vector<double>;

/// Neumaier-compensated accumulator; keeps reductions order-insensitive to ~1 ulp.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
  CompensatedSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

inline bool is_simplex(std::span<const double> p, double tol = 1e-9) {
  if (p.empty()) return false;
  for (double x : p)
    if (!(x >= 0.0) || !std::isfinite(x)) return false;
  return std::abs(compensated_sum(p) - 1.0) <= tol;
}

inline double log_sum_exp(std::span<const double> z) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : z) hi = std::max(hi, x);
  if (!std::isfinite(hi)) return hi;
  CompensatedSum acc;
  for (double x : z) acc.add(std::exp(x - hi));
  return hi + std::log(acc.value());
}

/// Exponential normalization of a logit vector.
inline Vector softmax(std::span<const double> z) {
  const double lse = log_sum_exp(z);
  Vector p(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) p[i] = std::exp(z[i] - lse);
  return p;
}

/// Pulls a gradient taken w.r.t. softmax(z) back onto z.
inline Vector softmax_backward(std::span<const double> p, std::span<const double> grad_p) {
  CompensatedSum dot;
  for (std::size_t i = 0; i < p.size(); ++i) dot.add(p[i] * grad_p[i]);
  const double mean = dot.value();
  Vector g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) g[i] = p[i] * (grad_p[i] - mean);
  return g;
}

/// Logits whose softmax is `p` (entries must be positive).
inline Vector logits_of(std::span<const double> p) {
  Vector z(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    require(p[i] > 0.0, "logits_of: probability must be positive");
    z[i] = std::log(p[i]);
  }
  const double lse = log_sum_exp(z);
  for (double& x : z) x -= lse;
  return z;
}

inline Vector uniform(std::size_t n) { return Vector(n, 1.0 / static_cast<double>(n)); }

}  // namespace mvpb
