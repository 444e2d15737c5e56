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

#ifndef MAXMATCH_TASKS_HPP_
#define MAXMATCH_TASKS_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "maxmatch/matching_loss.hpp"

namespace maxmatch {

enum class TaskKind { mil, pll, rs, custom };

std::string to_string(TaskKind kind);
TaskKind parse_task_kind(const std::string& name);

// Mapping and weighting choices for one learning setting.
//   MIL: f = identity on instance features, g = label embedding,
//        h = pair-matching distribution, S = neg-KL.
//   PLL: f = label embedding, g = linear on instance features, h = f, S = dot.
//   RS:  f = g = item embedding (separate tables), h = f, S = dot.
struct TaskSpec {
  TaskKind kind = TaskKind::custom;
  MappingSpec f;
  MappingSpec g;
  Similarity similarity = Similarity::dot;
  WeightFeatures features = WeightFeatures::embed_features;

  static TaskSpec mil(std::size_t feature_dim, std::size_t n_classes);
  static TaskSpec pll(std::size_t n_labels, std::size_t feature_dim, std::size_t dim);
  static TaskSpec rs(std::size_t n_items, std::size_t dim);

  // Rejects anything other than the three settings above unless kind is custom.
  void validate() const;
  LossConfig loss_config(LossVariant variant, double lambda = 1.0) const;
};

struct MilBag {
  std::vector<Vec> instances;
  std::size_t label = 0;
};

// Hidden per-instance labels, kept apart from MilBag so training code never
// receives them.
struct MilTruth {
  std::vector<std::vector<std::size_t>> instance_labels;
};

struct PllRecord {
  Vec features;
  std::vector<std::size_t> candidates;
};

struct ClickSequence {
  std::size_t user = 0;
  std::vector<std::size_t> items;
};

// Longest window, group plus target.
inline constexpr std::size_t kRsWindow = 6;

// Bag -> group of L2-normalized instances with the bag label as target.
std::vector<GroupSample> mil_to_groups(const std::vector<MilBag>& bags);

struct PllGroups {
  // Normalized instance features; the i-th record's target is entry i.
  TargetCatalog catalog;
  std::vector<GroupSample> samples;
};

// Record -> group of candidate label ids (ascending) with the instance as target.
PllGroups pll_to_groups(const std::vector<PllRecord>& records);

// Consecutive windows of at most kRsWindow items; a trailing window of one
// item is dropped.
std::vector<std::vector<std::size_t>> segment_sequence(const std::vector<std::size_t>& items);

// Window -> group of all but the last item with the last item as target.
GroupSample window_to_group(const std::vector<std::size_t>& window);

std::vector<GroupSample> rs_to_groups(const std::vector<ClickSequence>& sequences);

// Class of one instance: argmax over labels of f(x)^T g(y).
std::size_t predict_mil(const ModelParams& params, const Vec& instance);

// Label of one instance, over the full vocabulary or restricted to `candidates`.
std::size_t predict_pll(const ModelParams& params, const Vec& features,
                        const std::vector<std::size_t>* candidates = nullptr);

// Top-k items by f(query)^T g(y), query excluded; ties by ascending id.
std::vector<std::size_t> predict_rs(const ModelParams& params, std::size_t query, std::size_t k);

// Top-k items by max over group items x of P(y | x), group items excluded.
std::vector<std::size_t> predict_rs_plus(const ModelParams& params,
                                         const std::vector<std::size_t>& group, std::size_t k);

// Top-k indices of `scores` skipping `excluded`, descending, ties by index.
std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k,
                               const std::vector<std::size_t>& excluded = {});

}  // namespace maxmatch

#endif  // MAXMATCH_TASKS_HPP_
