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

#ifndef MAXMATCH_SYNTH_HPP_
#define MAXMATCH_SYNTH_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "maxmatch/tasks.hpp"

namespace maxmatch {

// Where the mismatched instances of a MIL bag come from.
//   uniform:  each noise instance from an independently drawn other class.
//   adjacent: all noise instances from class (label + 1) mod n_classes.
enum class MilNoise { uniform, adjacent };

std::string to_string(MilNoise n);
MilNoise parse_mil_noise(const std::string& name);

struct SynthConfig {
  std::size_t n_classes = 5;
  std::size_t feature_dim = 10;
  // Per-coordinate standard deviation of the Gaussian jitter around a
  // unit-norm class prototype.
  double cluster_spread = 0.35;
  std::size_t n_groups = 500;
  std::size_t group_size = 5;
  // Fraction of each group mismatched to the target; must be < 1.
  double noise_rate = 0.0;
  MilNoise mil_noise = MilNoise::uniform;
  // PLL: fraction of partially labeled records and the largest candidate set.
  double epsilon = 0.0;
  std::size_t tau = 2;
  // RS
  std::size_t n_items = 200;
  std::size_t n_clusters = 20;
  std::size_t n_users = 200;
  std::size_t sequence_length = 30;
  // Dirichlet concentration of each item's within-cluster transition row.
  double transition_concentration = 0.5;
  std::uint64_t seed = 1;

  void validate() const;
};

struct MilData {
  std::vector<MilBag> bags;
  MilTruth truth;
  std::size_t n_classes = 0;
  std::size_t feature_dim = 0;
};

struct PllData {
  std::vector<PllRecord> records;
  std::vector<std::size_t> true_labels;  // hidden
  std::size_t n_labels = 0;
  std::size_t feature_dim = 0;
};

struct RsData {
  std::vector<ClickSequence> sequences;
  std::vector<std::size_t> item_cluster;  // hidden
  std::size_t n_items = 0;
};

MilData gen_mil(const SynthConfig& cfg);
PllData gen_pll(const SynthConfig& cfg);
RsData gen_rs(const SynthConfig& cfg);

// ceil(rate * K) capped at K - 1.
std::size_t noise_count(double rate, std::size_t group_size);

}  // namespace maxmatch

#endif  // MAXMATCH_SYNTH_HPP_
