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

#include "maxmatch/optim.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "maxmatch/kernels.hpp"
#include "maxmatch/random.hpp"

namespace maxmatch {

namespace {

void adam_update(Vec& theta, const Vec& g, Vec& m, Vec& v, const AdamState& s,
                 double bias1, double bias2) {
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
    const double m_hat = m[i] / bias1;
    const double v_hat = v[i] / bias2;
    theta[i] -= s.lr * m_hat / (std::sqrt(v_hat) + s.eps);
  }
}

bool all_finite(const Vec& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

void adam_step(ModelParams& params, const GradBuffer& grads, AdamState& state) {
  if (!grads.congruent(params) || !state.m.congruent(params) || !state.v.congruent(params)) {
    throw DimensionError("adam_step: gradient or moment shape mismatch");
  }
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bias1 = 1.0 - std::pow(state.beta1, t);
  const double bias2 = 1.0 - std::pow(state.beta2, t);
  adam_update(params.f.values, grads.f, state.m.f, state.v.f, state, bias1, bias2);
  adam_update(params.g.values, grads.g, state.m.g, state.v.g, state, bias1, bias2);
}

TrainResult train(std::span<const GroupSample> samples, const TargetCatalog& catalog,
                  const TrainConfig& cfg, ModelParams params, const EpochMetric& metric) {
  if (samples.empty()) throw std::invalid_argument("train: empty dataset");
  if (cfg.epochs == 0 || cfg.batch_size == 0) {
    throw std::invalid_argument("train: epochs and batch_size must be positive");
  }
  Rng shuffle_rng(derive_seed(cfg.seed, "shuffle"));
  const std::uint64_t neg_stream = derive_seed(cfg.seed, "negatives");
  AdamState state(params, cfg.lr);
  GradBuffer grads(params);

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  std::uint64_t batch_counter = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle(order, shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      std::span<const std::size_t> batch(order.data() + begin, end - begin);
      grads.zero();
      const MatchingEngine engine(params, catalog, cfg.loss);
      const double batch_loss =
          batch_gradient(engine, samples, batch, derive_seed(neg_stream, batch_counter++), grads);
      if (!std::isfinite(batch_loss) || !all_finite(grads.f) || !all_finite(grads.g)) {
        throw NumericalError("non-finite loss or gradient in epoch " + std::to_string(epoch));
      }
      epoch_loss += batch_loss;
      const double scale = 1.0 / static_cast<double>(batch.size());
      for (double& v : grads.f) v *= scale;
      for (double& v : grads.g) v *= scale;
      adam_step(params, grads, state);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = epoch_loss / static_cast<double>(samples.size());
    rec.metric = metric ? metric(params) : std::numeric_limits<double>::quiet_NaN();
    result.history.push_back(rec);
  }
  result.params = std::move(params);
  return result;
}

}  // namespace maxmatch
