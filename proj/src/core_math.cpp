// Copyright 2026 The MaxMatch Authors. All Rights Reserved.
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

#include "maxmatch/core_math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace maxmatch {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": length mismatch (" +
                         std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

void require_nonempty(std::size_t n, const char* what) {
  if (n == 0) throw DimensionError(std::string(what) + ": empty input");
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_length(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require_same_length(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double logsumexp(std::span<const double> z) {
  require_nonempty(z.size(), "logsumexp");
  const double m = *std::max_element(z.begin(), z.end());
  if (std::isinf(m)) return m;
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  return m + std::log(s);
}

Vec softmax(std::span<const double> z) {
  require_nonempty(z.size(), "softmax");
  const double m = *std::max_element(z.begin(), z.end());
  Vec out(z.size());
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp(z[i] - m);
    s += out[i];
  }
  for (double& v : out) v /= s;
  return out;
}

Vec log_softmax(std::span<const double> z) {
  const double lse = logsumexp(z);
  Vec out(z.begin(), z.end());
  for (double& v : out) v -= lse;
  return out;
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double softplus(double t) {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

double log_sigmoid(double t) { return -softplus(-t); }

Vec clamp_probs(std::span<const double> p) {
  require_nonempty(p.size(), "clamp_probs");
  Vec out(p.size());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i] = std::max(p[i], kProbFloor);
    s += out[i];
  }
  for (double& v : out) v /= s;
  return out;
}

Vec clamp_probs_backward(std::span<const double> p, std::span<const double> q,
                         std::span<const double> q_grad) {
  require_same_length(p.size(), q.size(), "clamp_probs_backward");
  require_same_length(p.size(), q_grad.size(), "clamp_probs_backward");
  double total = 0.0;
  for (double v : p) total += std::max(v, kProbFloor);
  double inner = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) inner += q_grad[i] * q[i];
  Vec out(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > kProbFloor) out[i] = (q_grad[i] - inner) / total;
  }
  return out;
}

double neg_kl(std::span<const double> p, std::span<const double> q) {
  require_same_length(p.size(), q.size(), "neg_kl");
  const Vec pc = clamp_probs(p);
  const Vec qc = clamp_probs(q);
  double kl = 0.0;
  for (std::size_t i = 0; i < pc.size(); ++i) {
    kl += pc[i] * (std::log(pc[i]) - std::log(qc[i]));
  }
  // Rounding can leave a tiny positive residue when p == q.
  return std::min(-kl, 0.0);
}

void neg_kl_grad(std::span<const double> p, std::span<const double> q,
                 std::span<double> dp, std::span<double> dq) {
  require_same_length(p.size(), q.size(), "neg_kl_grad");
  require_same_length(p.size(), dp.size(), "neg_kl_grad");
  require_same_length(p.size(), dq.size(), "neg_kl_grad");
  for (std::size_t i = 0; i < p.size(); ++i) {
    dp[i] = -(std::log(p[i]) - std::log(q[i]) + 1.0);
    dq[i] = p[i] / q[i];
  }
}

std::size_t argmax(std::span<const double> z) {
  require_nonempty(z.size(), "argmax");
  std::size_t best = 0;
  for (std::size_t i = 1; i < z.size(); ++i) {
    if (z[i] > z[best]) best = i;
  }
  return best;
}

double l2_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

Vec l2_normalized(std::span<const double> x) {
  Vec out(x.begin(), x.end());
  const double n = l2_norm(x);
  if (n > 0.0) {
    for (double& v : out) v /= n;
  }
  return out;
}

}  // namespace maxmatch
