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

#include "maxmatch/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "maxmatch/eval.hpp"
#include "maxmatch/kernels.hpp"
#include "maxmatch/random.hpp"

namespace maxmatch {

TaskKind dataset_kind(const Dataset& data) {
  switch (data.index()) {
    case 0: return TaskKind::mil;
    case 1: return TaskKind::pll;
    default: return TaskKind::rs;
  }
}

std::string to_string(RsMode mode) { return mode == RsMode::mm ? "mm" : "mm+"; }

RsMode parse_rs_mode(const std::string& name) {
  if (name == "mm") return RsMode::mm;
  if (name == "mm+" || name == "mm_plus") return RsMode::mm_plus;
  throw std::invalid_argument("unknown RS mode: " + name);
}

Dataset generate(const ExperimentConfig& cfg) {
  switch (cfg.task) {
    case TaskKind::mil: return gen_mil(cfg.synth);
    case TaskKind::pll: return gen_pll(cfg.synth);
    case TaskKind::rs: return gen_rs(cfg.synth);
    case TaskKind::custom: break;
  }
  throw std::invalid_argument("custom tasks have no synthetic generator");
}

namespace {

void split_811(std::size_t n, std::uint64_t seed, PreparedTask& out) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, "split"));
  shuffle(order, rng);
  const std::size_t n_train = n * 8 / 10;
  const std::size_t n_val = n / 10;
  out.train_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.val_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                     order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  out.test_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  if (out.train_idx.empty()) throw std::invalid_argument("dataset too small to split");
}

PreparedTask prepare_mil(const MilData& data, std::uint64_t seed) {
  PreparedTask t;
  t.spec = TaskSpec::mil(data.feature_dim, data.n_classes);
  t.catalog = TargetCatalog::ids(data.n_classes);
  split_811(data.bags.size(), seed, t);
  std::vector<MilBag> bags;
  for (std::size_t i : t.train_idx) bags.push_back(data.bags[i]);
  t.train = mil_to_groups(bags);
  return t;
}

PreparedTask prepare_pll(const PllData& data, std::size_t dim, std::uint64_t seed) {
  PreparedTask t;
  t.spec = TaskSpec::pll(data.n_labels, data.feature_dim, dim);
  split_811(data.records.size(), seed, t);
  std::vector<PllRecord> records;
  for (std::size_t i : t.train_idx) records.push_back(data.records[i]);
  PllGroups groups = pll_to_groups(records);
  t.catalog = std::move(groups.catalog);
  t.train = std::move(groups.samples);
  return t;
}

PreparedTask prepare_rs(const RsData& data, std::size_t dim, bool random_holdout,
                        std::uint64_t seed) {
  PreparedTask t;
  t.spec = TaskSpec::rs(data.n_items, dim);
  t.catalog = TargetCatalog::ids(data.n_items);
  Rng rng(derive_seed(seed, "split"));
  for (const ClickSequence& seq : data.sequences) {
    auto windows = segment_sequence(seq.items);
    std::size_t val = windows.size(), test = windows.size();
    if (windows.size() >= 3) {
      if (random_holdout) {
        test = uniform_index(rng, windows.size());
        val = uniform_index(rng, windows.size() - 1);
        if (val >= test) ++val;
      } else {
        val = windows.size() - 2;
        test = windows.size() - 1;
      }
    }
    for (std::size_t w = 0; w < windows.size(); ++w) {
      if (w == val) {
        t.val_windows.push_back(windows[w]);
      } else if (w == test) {
        t.test_windows.push_back(windows[w]);
      } else {
        t.train.push_back(window_to_group(windows[w]));
      }
    }
  }
  if (t.train.empty()) throw std::invalid_argument("no RS training windows");
  return t;
}

double mil_accuracy(const MilData& data, const ModelParams& params,
                    const std::vector<std::size_t>& bag_idx) {
  std::vector<ObjectRef> queries;
  std::vector<std::size_t> truth;
  for (std::size_t b : bag_idx) {
    const MilBag& bag = data.bags[b];
    for (std::size_t i = 0; i < bag.instances.size(); ++i) {
      const std::size_t y = data.truth.instance_labels[b][i];
      if (y == kUnlabeled) continue;
      queries.push_back(ObjectRef::features(l2_normalized(bag.instances[i])));
      truth.push_back(y);
    }
  }
  if (queries.empty()) throw std::invalid_argument("no labeled instances to score");
  const TargetCatalog labels = TargetCatalog::ids(data.n_classes);
  const Vec scores = score_matrix(params, queries, labels);
  std::vector<std::size_t> preds(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    preds[q] = argmax(std::span<const double>(scores).subspan(q * data.n_classes, data.n_classes));
  }
  return accuracy(preds, truth);
}

double pll_accuracy(const PllData& data, const ModelParams& params,
                    const std::vector<std::size_t>& idx) {
  std::vector<std::size_t> preds, truth;
  for (std::size_t i : idx) {
    preds.push_back(predict_pll(params, data.records[i].features));
    truth.push_back(data.true_labels[i]);
  }
  return accuracy(preds, truth);
}

std::map<std::string, double> rs_metrics(const ModelParams& params,
                                         const std::vector<std::vector<std::size_t>>& windows,
                                         RsMode mode, std::size_t k) {
  if (windows.empty()) throw std::invalid_argument("no held-out RS windows");
  const std::size_t n_items = params.g.rows();
  std::vector<double> hit(windows.size()), ndcg(windows.size());
  std::vector<ObjectRef> queries;
  if (mode == RsMode::mm) {
    for (const auto& w : windows) queries.push_back(ObjectRef::id(w[w.size() - 2]));
  }
  const Vec scores = mode == RsMode::mm ? score_matrix(params, queries, TargetCatalog::ids(n_items))
                                        : Vec{};
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows[i];
    std::vector<std::size_t> ranked;
    if (mode == RsMode::mm) {
      ranked = top_k(std::span<const double>(scores).subspan(i * n_items, n_items), k,
                     {w[w.size() - 2]});
    } else {
      ranked = predict_rs_plus(params, std::vector<std::size_t>(w.begin(), w.end() - 1), k);
    }
    hit[i] = hit_at_k(ranked, w.back(), k);
    ndcg[i] = ndcg_at_k(ranked, w.back(), k);
  }
  const double n = static_cast<double>(windows.size());
  const std::string suffix = "@" + std::to_string(k);
  return {{"hit" + suffix, std::accumulate(hit.begin(), hit.end(), 0.0) / n},
          {"ndcg" + suffix, std::accumulate(ndcg.begin(), ndcg.end(), 0.0) / n}};
}

}  // namespace

PreparedTask prepare(const Dataset& data, const ExperimentConfig& cfg, std::uint64_t seed) {
  PreparedTask t;
  if (const auto* mil = std::get_if<MilData>(&data)) {
    t = prepare_mil(*mil, seed);
  } else if (const auto* pll = std::get_if<PllData>(&data)) {
    t = prepare_pll(*pll, cfg.dim, seed);
  } else {
    t = prepare_rs(std::get<RsData>(data), cfg.dim, cfg.rs_random_holdout, seed);
  }
  t.spec.validate();
  return t;
}

std::map<std::string, double> evaluate(const Dataset& data, const PreparedTask& task,
                                       const ModelParams& params, Split split, RsMode mode,
                                       std::size_t k) {
  const auto& idx = split == Split::train ? task.train_idx
                    : split == Split::validation ? task.val_idx
                                                 : task.test_idx;
  if (const auto* mil = std::get_if<MilData>(&data)) {
    return {{"accuracy", mil_accuracy(*mil, params, idx)}};
  }
  if (const auto* pll = std::get_if<PllData>(&data)) {
    return {{"accuracy", pll_accuracy(*pll, params, idx)}};
  }
  if (split == Split::train) throw std::invalid_argument("RS metrics are defined on held-out windows");
  return rs_metrics(params, split == Split::validation ? task.val_windows : task.test_windows, mode,
                    k);
}

double validation_metric(const Dataset& data, const PreparedTask& task, const ModelParams& params,
                         std::size_t k) {
  const auto m = evaluate(data, task, params, Split::validation, RsMode::mm, k);
  if (dataset_kind(data) == TaskKind::rs) return m.at("hit@" + std::to_string(k));
  return m.at("accuracy");
}

FitResult fit(const Dataset& data, const PreparedTask& task, const ExperimentConfig& cfg,
              bool track_validation) {
  TrainConfig tc = cfg.train;
  const double lambda = tc.loss.lambda;
  const std::size_t limit = tc.loss.full_softmax_limit;
  const std::size_t negs = tc.loss.sampled_negatives;
  tc.loss = task.spec.loss_config(cfg.train.loss.variant, lambda);
  tc.loss.full_softmax_limit = limit;
  tc.loss.sampled_negatives = negs;
  const ModelParams init = init_params(task.spec.f, task.spec.g, tc.seed);
  EpochMetric metric;
  if (track_validation) {
    metric = [&](const ModelParams& p) { return validation_metric(data, task, p, cfg.eval_k); };
  }
  const std::vector<double> rates = cfg.lr_grid ? kLearningRateGrid : std::vector<double>{tc.lr};
  FitResult best;
  double best_score = -1.0;
  for (double lr : rates) {
    tc.lr = lr;
    TrainResult r = train(task.train, task.catalog, tc, init, metric);
    const double score = cfg.lr_grid ? validation_metric(data, task, r.params, cfg.eval_k) : 0.0;
    best.grid.emplace_back(lr, score);
    if (best.grid.size() == 1 || score > best_score) {
      best_score = score;
      best.result = std::move(r);
      best.lr = lr;
    }
  }
  return best;
}

std::map<std::string, double> run_trial(ExperimentConfig cfg, std::uint64_t seed, RsMode mode) {
  cfg.synth.seed = seed;
  cfg.train.seed = seed;
  const Dataset data = generate(cfg);
  const PreparedTask task = prepare(data, cfg, seed);
  const FitResult fitted = fit(data, task, cfg);
  return evaluate(data, task, fitted.result.params, Split::test, mode, cfg.eval_k);
}

std::vector<MilData> adjacent_class_tasks(const MilData& data) {
  std::vector<MilData> out;
  for (std::size_t c = 0; c + 1 < data.n_classes; ++c) {
    MilData task;
    task.n_classes = 2;
    task.feature_dim = data.feature_dim;
    for (std::size_t b = 0; b < data.bags.size(); ++b) {
      const MilBag& bag = data.bags[b];
      if (bag.label != c && bag.label != c + 1) continue;
      MilBag nb = bag;
      nb.label = bag.label - c;
      std::vector<std::size_t> labels;
      for (std::size_t y : data.truth.instance_labels[b]) {
        labels.push_back(y == c || y == c + 1 ? y - c : kUnlabeled);
      }
      task.bags.push_back(std::move(nb));
      task.truth.instance_labels.push_back(std::move(labels));
    }
    out.push_back(std::move(task));
  }
  return out;
}

MatchBreakdown inspect_group(const PreparedTask& task, const ModelParams& params,
                             std::size_t index, double lambda) {
  if (index >= task.train.size()) throw std::out_of_range("group index out of range");
  const GroupSample& s = task.train[index];
  const LossConfig cfg = task.spec.loss_config(LossVariant::max_matching, lambda);
  const NegativeSet negs = make_negatives(task.catalog.size(), s.target, cfg, derive_seed(0, index));
  return max_matching_loss(params, task.catalog, s, cfg, negs).breakdown;
}

}  // namespace maxmatch
