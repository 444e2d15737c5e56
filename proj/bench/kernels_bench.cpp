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

// Serial reference vs OpenMP kernels.

#include <benchmark/benchmark.h>

#include <numeric>

#include "maxmatch/kernels.hpp"
#include "maxmatch/synth.hpp"
#include "maxmatch/tasks.hpp"

using namespace maxmatch;

namespace {

struct Fixture {
  TaskSpec spec;
  ModelParams params;
  TargetCatalog catalog;
  std::vector<GroupSample> samples;
  std::vector<std::size_t> order;

  Fixture() {
    SynthConfig cfg;
    cfg.n_items = 1000;
    cfg.n_clusters = 50;
    cfg.n_users = 200;
    cfg.noise_rate = 0.3;
    const RsData data = gen_rs(cfg);
    spec = TaskSpec::rs(cfg.n_items, 32);
    params = init_params(spec.f, spec.g, 1);
    catalog = TargetCatalog::ids(cfg.n_items);
    samples = rs_to_groups(data.sequences);
    order.resize(256);
    std::iota(order.begin(), order.end(), 0);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

template <auto Kernel>
void BM_BatchGradient(benchmark::State& state) {
  const Fixture& f = fixture();
  MatchingEngine engine(f.params, f.catalog, f.spec.loss_config(LossVariant::max_matching));
  GradBuffer g(f.params);
  for (auto _ : state) {
    g.zero();
    benchmark::DoNotOptimize(Kernel(engine, f.samples, f.order, 7, g));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.order.size()));
}

template <auto Kernel>
void BM_ScoreMatrix(benchmark::State& state) {
  const Fixture& f = fixture();
  std::vector<ObjectRef> queries;
  for (std::size_t i = 0; i < 200; ++i) queries.push_back(ObjectRef::id(i * 5));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(f.params, queries, f.catalog));
}

}  // namespace

BENCHMARK(BM_BatchGradient<batch_gradient_serial>)->Name("batch_gradient/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchGradient<batch_gradient>)->Name("batch_gradient/openmp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScoreMatrix<score_matrix_serial>)->Name("score_matrix/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScoreMatrix<score_matrix>)->Name("score_matrix/openmp")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
