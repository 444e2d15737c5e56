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

#ifndef MAXMATCH_OPTIM_HPP_
#define MAXMATCH_OPTIM_HPP_

#include <cstdint>
#include <functional>
#include <vector>

#include "maxmatch/matching_loss.hpp"

namespace maxmatch {

struct AdamState {
  GradBuffer m;
  GradBuffer v;
  std::size_t step_count = 0;
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  AdamState(const ModelParams& params, double learning_rate)
      : m(params), v(params), lr(learning_rate) {}
};

// One bias-corrected Adam update of every parameter.
void adam_step(ModelParams& params, const GradBuffer& grads, AdamState& state);

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 64;
  double lr = 1e-2;
  LossConfig loss;
  std::uint64_t seed = 1;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;    // mean per-sample loss over the epoch
  double metric = 0.0;  // validation metric, NaN when none was supplied
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochRecord> history;
};

// Thrown when a batch produces a non-finite loss or gradient.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using EpochMetric = std::function<double(const ModelParams&)>;

// Mini-batch Adam over `samples`, reshuffled each epoch from cfg.seed. The
// batch gradient is the mean over the batch. Deterministic given the inputs.
TrainResult train(std::span<const GroupSample> samples, const TargetCatalog& catalog,
                  const TrainConfig& cfg, ModelParams params,
                  const EpochMetric& metric = {});

}  // namespace maxmatch

#endif  // MAXMATCH_OPTIM_HPP_
