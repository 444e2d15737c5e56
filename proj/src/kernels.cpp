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

#include "maxmatch/kernels.hpp"

#include <algorithm>

#include "maxmatch/random.hpp"

namespace maxmatch {

namespace {

NegativeSet negatives_for(const MatchingEngine& engine, const GroupSample& s,
                          std::uint64_t neg_seed, std::size_t index) {
  return make_negatives(engine.catalog().size(), s.target, engine.config(),
                        derive_seed(neg_seed, index));
}

}  // namespace

double batch_gradient_serial(const MatchingEngine& engine, std::span<const GroupSample> samples,
                             std::span<const std::size_t> order, std::uint64_t neg_seed,
                             GradBuffer& out) {
  double loss = 0.0;
  for (std::size_t idx : order) {
    const GroupSample& s = samples[idx];
    loss += engine.backward(s, negatives_for(engine, s, neg_seed, idx), out);
  }
  return loss;
}

double batch_gradient(const MatchingEngine& engine, std::span<const GroupSample> samples,
                      std::span<const std::size_t> order, std::uint64_t neg_seed,
                      GradBuffer& out) {
  const std::size_t n = order.size();
  const std::size_t chunks = (n + kGradChunk - 1) / kGradChunk;
  const std::size_t cat_len = engine.catalog().size() * engine.params().dim();
  std::vector<GradBuffer> grads(chunks, GradBuffer(engine.params()));
  std::vector<Vec> cat_grads(chunks, Vec(cat_len, 0.0));
  std::vector<double> losses(chunks, 0.0);

#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kGradChunk;
    const std::size_t end = std::min(n, begin + kGradChunk);
    double loss = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t idx = order[i];
      const GroupSample& s = samples[idx];
      loss += engine.backward_deferred(s, negatives_for(engine, s, neg_seed, idx), grads[c],
                                       cat_grads[c]);
    }
    losses[c] = loss;
  }

  double loss = 0.0;
  Vec cat_total(cat_len, 0.0);
  for (std::size_t c = 0; c < chunks; ++c) {
    loss += losses[c];
    out.add(grads[c]);
    axpy(1.0, cat_grads[c], cat_total);
  }
  engine.project_catalog_grad(cat_total, out);
  return loss;
}

double batch_loss(const MatchingEngine& engine, std::span<const GroupSample> samples,
                  std::uint64_t neg_seed) {
  std::vector<double> losses(samples.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(samples.size()); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    losses[idx] = engine.loss(samples[idx], negatives_for(engine, samples[idx], neg_seed, idx));
  }
  double total = 0.0;
  for (double l : losses) total += l;
  return total;
}

Vec score_matrix_serial(const ModelParams& params, std::span<const ObjectRef> queries,
                        const TargetCatalog& catalog) {
  const std::size_t d = params.dim();
  const Vec table = embed_catalog(params, catalog);
  const std::size_t m = catalog.size();
  Vec out(queries.size() * m);
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const Vec fq = forward_f(params, queries[q]);
    for (std::size_t j = 0; j < m; ++j) {
      out[q * m + j] = dot(fq, std::span<const double>(table).subspan(j * d, d));
    }
  }
  return out;
}

Vec score_matrix(const ModelParams& params, std::span<const ObjectRef> queries,
                 const TargetCatalog& catalog) {
  const std::size_t d = params.dim();
  const Vec table = embed_catalog(params, catalog);
  const std::size_t m = catalog.size();
  Vec out(queries.size() * m);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t qi = 0; qi < static_cast<std::ptrdiff_t>(queries.size()); ++qi) {
    const auto q = static_cast<std::size_t>(qi);
    const Vec fq = forward_f(params, queries[q]);
    const double* row = table.data();
    double* dst = out.data() + q * m;
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      const double* gy = row + j * d;
      for (std::size_t t = 0; t < d; ++t) s += fq[t] * gy[t];
      dst[j] = s;
    }
  }
  return out;
}

}  // namespace maxmatch
