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

#ifndef MAXMATCH_EXPERIMENT_HPP_
#define MAXMATCH_EXPERIMENT_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "maxmatch/optim.hpp"
#include "maxmatch/synth.hpp"

namespace maxmatch {

using Dataset = std::variant<MilData, PllData, RsData>;

TaskKind dataset_kind(const Dataset& data);

// Learning rates tried by `--lr grid`.
inline const std::vector<double> kLearningRateGrid = {1e-1, 1e-2, 1e-3, 1e-4};

struct ExperimentConfig {
  TaskKind task = TaskKind::mil;
  SynthConfig synth;
  TrainConfig train;
  // Embedding dimension for PLL and RS; MIL embeds into the feature space.
  std::size_t dim = 16;
  bool lr_grid = false;
  std::size_t eval_k = 10;
  // RS: hold out two random windows per user instead of the last two.
  bool rs_random_holdout = false;
};

enum class Split { train, validation, test };
enum class RsMode { mm, mm_plus };

std::string to_string(RsMode mode);
RsMode parse_rs_mode(const std::string& name);

// Training samples plus everything needed to score held-out data.
struct PreparedTask {
  TaskSpec spec;
  TargetCatalog catalog;
  std::vector<GroupSample> train;
  // MIL bags or PLL records per split.
  std::vector<std::size_t> train_idx, val_idx, test_idx;
  // RS windows per split; train windows are already in `train`.
  std::vector<std::vector<std::size_t>> val_windows, test_windows;
};

Dataset generate(const ExperimentConfig& cfg);

// Deterministic 8:1:1 split for MIL/PLL; last-two-windows hold-out for RS.
PreparedTask prepare(const Dataset& data, const ExperimentConfig& cfg, std::uint64_t seed);

// MIL and PLL report "accuracy"; RS reports "hit@k" and "ndcg@k".
std::map<std::string, double> evaluate(const Dataset& data, const PreparedTask& task,
                                       const ModelParams& params, Split split,
                                       RsMode mode = RsMode::mm, std::size_t k = 10);

// Accuracy for MIL/PLL, HIT@k for RS, on the validation split.
double validation_metric(const Dataset& data, const PreparedTask& task, const ModelParams& params,
                         std::size_t k = 10);

struct FitResult {
  TrainResult result;
  double lr = 0.0;
  // (lr, final validation metric) for every grid point tried.
  std::vector<std::pair<double, double>> grid;
};

// Trains from init_params(seed). With lr_grid, trains once per grid entry and
// keeps the best final validation metric (first entry wins ties).
FitResult fit(const Dataset& data, const PreparedTask& task, const ExperimentConfig& cfg,
              bool track_validation = false);

// synth -> prepare -> fit -> test metrics, all seeded by `seed`.
std::map<std::string, double> run_trial(ExperimentConfig cfg, std::uint64_t seed,
                                        RsMode mode = RsMode::mm);

// MIL bag instance labels for held-out scoring; foreign classes in the
// adjacent-pair construction carry this marker and are skipped.
inline constexpr std::size_t kUnlabeled = static_cast<std::size_t>(-1);

// Binary datasets over consecutive class pairs (c, c + 1), labels remapped
// to {0, 1}.
std::vector<MilData> adjacent_class_tasks(const MilData& data);

// Breakdown of training group `index` under the max-matching objective.
MatchBreakdown inspect_group(const PreparedTask& task, const ModelParams& params,
                             std::size_t index, double lambda = 1.0);

}  // namespace maxmatch

#endif  // MAXMATCH_EXPERIMENT_HPP_
