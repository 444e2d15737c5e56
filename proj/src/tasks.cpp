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

#include "maxmatch/tasks.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace maxmatch {

std::string to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::mil: return "mil";
    case TaskKind::pll: return "pll";
    case TaskKind::rs: return "rs";
    case TaskKind::custom: return "custom";
  }
  return "unknown";
}

TaskKind parse_task_kind(const std::string& name) {
  if (name == "mil" || name == "MIL") return TaskKind::mil;
  if (name == "pll" || name == "PLL") return TaskKind::pll;
  if (name == "rs" || name == "RS") return TaskKind::rs;
  if (name == "custom") return TaskKind::custom;
  throw std::invalid_argument("unknown task kind: " + name);
}

TaskSpec TaskSpec::mil(std::size_t feature_dim, std::size_t n_classes) {
  return {TaskKind::mil,
          {MappingKind::identity, feature_dim, feature_dim},
          {MappingKind::embedding, n_classes, feature_dim},
          Similarity::neg_kl,
          WeightFeatures::prob_features};
}

TaskSpec TaskSpec::pll(std::size_t n_labels, std::size_t feature_dim, std::size_t dim) {
  return {TaskKind::pll,
          {MappingKind::embedding, n_labels, dim},
          {MappingKind::linear, feature_dim, dim},
          Similarity::dot,
          WeightFeatures::embed_features};
}

TaskSpec TaskSpec::rs(std::size_t n_items, std::size_t dim) {
  return {TaskKind::rs,
          {MappingKind::embedding, n_items, dim},
          {MappingKind::embedding, n_items, dim},
          Similarity::dot,
          WeightFeatures::embed_features};
}

void TaskSpec::validate() const {
  f.validate();
  g.validate();
  if (f.out_dim != g.out_dim) throw DimensionError("f and g must share the embedding dimension");
  auto require = [&](bool ok) {
    if (!ok) {
      throw std::invalid_argument("task spec does not match the " + to_string(kind) +
                                  " instantiation");
    }
  };
  switch (kind) {
    case TaskKind::mil:
      require(f.kind == MappingKind::identity && g.kind == MappingKind::embedding &&
              similarity == Similarity::neg_kl && features == WeightFeatures::prob_features);
      break;
    case TaskKind::pll:
      require(f.kind == MappingKind::embedding && g.kind == MappingKind::linear &&
              similarity == Similarity::dot && features == WeightFeatures::embed_features);
      break;
    case TaskKind::rs:
      require(f.kind == MappingKind::embedding && g.kind == MappingKind::embedding &&
              similarity == Similarity::dot && features == WeightFeatures::embed_features);
      break;
    case TaskKind::custom:
      break;
  }
}

LossConfig TaskSpec::loss_config(LossVariant variant, double lambda) const {
  LossConfig cfg;
  cfg.variant = variant;
  cfg.similarity = similarity;
  cfg.features = features;
  cfg.lambda = lambda;
  return cfg;
}

std::vector<GroupSample> mil_to_groups(const std::vector<MilBag>& bags) {
  if (bags.empty()) throw std::invalid_argument("mil_to_groups: no bags");
  std::vector<GroupSample> out;
  out.reserve(bags.size());
  for (const MilBag& bag : bags) {
    if (bag.instances.empty()) throw std::invalid_argument("mil_to_groups: empty bag");
    GroupSample s;
    s.target = bag.label;
    for (const Vec& x : bag.instances) s.group.push_back(ObjectRef::features(l2_normalized(x)));
    out.push_back(std::move(s));
  }
  return out;
}

PllGroups pll_to_groups(const std::vector<PllRecord>& records) {
  if (records.empty()) throw std::invalid_argument("pll_to_groups: no records");
  std::vector<Vec> pool;
  pool.reserve(records.size());
  PllGroups out;
  out.samples.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const PllRecord& r = records[i];
    if (r.candidates.empty()) throw std::invalid_argument("pll_to_groups: empty candidate set");
    std::vector<std::size_t> labels = r.candidates;
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    GroupSample s;
    s.target = i;
    for (std::size_t y : labels) s.group.push_back(ObjectRef::id(y));
    out.samples.push_back(std::move(s));
    pool.push_back(l2_normalized(r.features));
  }
  out.catalog = TargetCatalog::features(std::move(pool));
  return out;
}

std::vector<std::vector<std::size_t>> segment_sequence(const std::vector<std::size_t>& items) {
  if (items.size() < 2) throw std::invalid_argument("click sequence shorter than 2");
  std::vector<std::vector<std::size_t>> windows;
  for (std::size_t begin = 0; begin < items.size(); begin += kRsWindow) {
    const std::size_t end = std::min(items.size(), begin + kRsWindow);
    if (end - begin < 2) break;
    windows.emplace_back(items.begin() + static_cast<std::ptrdiff_t>(begin),
                         items.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return windows;
}

GroupSample window_to_group(const std::vector<std::size_t>& window) {
  if (window.size() < 2) throw std::invalid_argument("window shorter than 2");
  GroupSample s;
  s.target = window.back();
  for (std::size_t i = 0; i + 1 < window.size(); ++i) s.group.push_back(ObjectRef::id(window[i]));
  return s;
}

std::vector<GroupSample> rs_to_groups(const std::vector<ClickSequence>& sequences) {
  std::vector<GroupSample> out;
  for (const ClickSequence& seq : sequences) {
    for (const auto& w : segment_sequence(seq.items)) out.push_back(window_to_group(w));
  }
  return out;
}

std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k,
                               const std::vector<std::size_t>& excluded) {
  std::vector<std::size_t> idx;
  idx.reserve(scores.size());
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (std::find(excluded.begin(), excluded.end(), j) == excluded.end()) idx.push_back(j);
  }
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  const std::size_t kk = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(kk), idx.end(), better);
  idx.resize(kk);
  return idx;
}

namespace {

Vec scores_against_g(const ModelParams& params, const Vec& fx) {
  const std::size_t n = params.g.rows();
  Vec s(n);
  for (std::size_t j = 0; j < n; ++j) s[j] = dot(fx, params.g.row(j));
  return s;
}

}  // namespace

std::size_t predict_mil(const ModelParams& params, const Vec& instance) {
  if (params.g.spec.kind != MappingKind::embedding) {
    throw ContractError("predict_mil expects a label embedding for g");
  }
  const Vec fx = forward_f(params, ObjectRef::features(l2_normalized(instance)));
  return argmax(scores_against_g(params, fx));
}

std::size_t predict_pll(const ModelParams& params, const Vec& features,
                        const std::vector<std::size_t>* candidates) {
  const Vec gy = forward_g(params, ObjectRef::features(l2_normalized(features)));
  const std::size_t n = params.f.spec.in_dim;
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t label = 0; label < n; ++label) {
    if (candidates != nullptr &&
        std::find(candidates->begin(), candidates->end(), label) == candidates->end()) {
      continue;
    }
    const double s = dot(params.f.row(label), gy);
    if (s > best_score) {
      best_score = s;
      best = label;
    }
  }
  return best;
}

std::vector<std::size_t> predict_rs(const ModelParams& params, std::size_t query, std::size_t k) {
  if (query >= params.f.spec.in_dim) throw LookupError("unknown query item");
  const Vec fx = forward_f(params, ObjectRef::id(query));
  return top_k(scores_against_g(params, fx), k, {query});
}

std::vector<std::size_t> predict_rs_plus(const ModelParams& params,
                                         const std::vector<std::size_t>& group, std::size_t k) {
  if (group.empty()) throw std::invalid_argument("predict_rs_plus: empty group");
  const std::size_t n = params.g.rows();
  Vec best(n, -std::numeric_limits<double>::infinity());
  for (std::size_t x : group) {
    if (x >= params.f.spec.in_dim) throw LookupError("unknown group item");
    const Vec lp = log_softmax(scores_against_g(params, forward_f(params, ObjectRef::id(x))));
    for (std::size_t j = 0; j < n; ++j) best[j] = std::max(best[j], lp[j]);
  }
  return top_k(best, k, group);
}

}  // namespace maxmatch
