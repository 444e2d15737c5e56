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

#include "maxmatch/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "maxmatch/random.hpp"

namespace maxmatch {

std::string to_string(MilNoise n) { return n == MilNoise::uniform ? "uniform" : "adjacent"; }

MilNoise parse_mil_noise(const std::string& name) {
  if (name == "uniform") return MilNoise::uniform;
  if (name == "adjacent") return MilNoise::adjacent;
  throw std::invalid_argument("unknown MIL noise structure: " + name);
}

void SynthConfig::validate() const {
  if (n_classes < 2) throw std::invalid_argument("n_classes must be at least 2");
  if (feature_dim == 0) throw std::invalid_argument("feature_dim must be positive");
  if (group_size == 0) throw std::invalid_argument("group_size must be positive");
  if (!(noise_rate >= 0.0 && noise_rate < 1.0)) {
    throw std::invalid_argument("noise_rate must lie in [0, 1)");
  }
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
  if (tau < 1 || tau > n_classes) throw std::invalid_argument("tau must lie in [1, n_classes]");
  if (epsilon > 0.0 && tau < 2) throw std::invalid_argument("partial labels need tau >= 2");
  if (cluster_spread < 0.0) throw std::invalid_argument("cluster_spread must be non-negative");
  if (n_clusters == 0 || n_items < 2 * n_clusters) {
    throw std::invalid_argument("each item cluster needs at least two items");
  }
  if (sequence_length < 2) throw std::invalid_argument("sequence_length must be at least 2");
  if (transition_concentration <= 0.0) {
    throw std::invalid_argument("transition_concentration must be positive");
  }
}

std::size_t noise_count(double rate, std::size_t group_size) {
  if (group_size == 0) return 0;
  const auto n = static_cast<std::size_t>(std::ceil(rate * static_cast<double>(group_size) - 1e-12));
  return std::min(n, group_size - 1);
}

namespace {

std::vector<Vec> class_prototypes(std::size_t n, std::size_t dim, Rng& rng) {
  std::vector<Vec> protos(n, Vec(dim));
  for (Vec& p : protos) {
    for (double& v : p) v = standard_normal(rng);
    p = l2_normalized(p);
  }
  return protos;
}

Vec jittered(const Vec& proto, double spread, Rng& rng) {
  Vec x = proto;
  for (double& v : x) v += spread * standard_normal(rng);
  return x;
}

std::size_t other_class(std::size_t label, std::size_t n, Rng& rng) {
  const std::size_t r = uniform_index(rng, n - 1);
  return r >= label ? r + 1 : r;
}

}  // namespace

MilData gen_mil(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, "synth.mil"));
  const std::vector<Vec> protos = class_prototypes(cfg.n_classes, cfg.feature_dim, rng);
  const std::size_t K = cfg.group_size;
  const std::size_t n_noise = noise_count(cfg.noise_rate, K);

  MilData data;
  data.n_classes = cfg.n_classes;
  data.feature_dim = cfg.feature_dim;
  for (std::size_t b = 0; b < cfg.n_groups; ++b) {
    const std::size_t label = uniform_index(rng, cfg.n_classes);
    const std::size_t confuser = (label + 1) % cfg.n_classes;
    std::vector<std::size_t> labels(K, label);
    for (std::size_t i = 0; i < n_noise; ++i) {
      labels[i] = cfg.mil_noise == MilNoise::adjacent ? confuser
                                                       : other_class(label, cfg.n_classes, rng);
    }
    shuffle(labels, rng);
    MilBag bag;
    bag.label = label;
    for (std::size_t y : labels) bag.instances.push_back(jittered(protos[y], cfg.cluster_spread, rng));
    data.bags.push_back(std::move(bag));
    data.truth.instance_labels.push_back(std::move(labels));
  }
  return data;
}

PllData gen_pll(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, "synth.pll"));
  const std::vector<Vec> protos = class_prototypes(cfg.n_classes, cfg.feature_dim, rng);
  const std::size_t n = cfg.n_groups;
  const auto n_partial = static_cast<std::size_t>(std::llround(cfg.epsilon * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order, rng);
  std::vector<bool> partial(n, false);
  for (std::size_t i = 0; i < n_partial; ++i) partial[order[i]] = true;

  PllData data;
  data.n_labels = cfg.n_classes;
  data.feature_dim = cfg.feature_dim;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = uniform_index(rng, cfg.n_classes);
    PllRecord r;
    r.features = jittered(protos[label], cfg.cluster_spread, rng);
    r.candidates.push_back(label);
    if (partial[i]) {
      const std::size_t size = 2 + uniform_index(rng, cfg.tau - 1);
      std::vector<std::size_t> others;
      for (std::size_t y = 0; y < cfg.n_classes; ++y) {
        if (y != label) others.push_back(y);
      }
      shuffle(others, rng);
      r.candidates.insert(r.candidates.end(), others.begin(),
                          others.begin() + static_cast<std::ptrdiff_t>(size - 1));
      std::sort(r.candidates.begin(), r.candidates.end());
    }
    data.records.push_back(std::move(r));
    data.true_labels.push_back(label);
  }
  return data;
}

RsData gen_rs(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, "synth.rs"));
  RsData data;
  data.n_items = cfg.n_items;
  data.item_cluster.resize(cfg.n_items);
  std::vector<std::vector<std::size_t>> members(cfg.n_clusters);
  for (std::size_t i = 0; i < cfg.n_items; ++i) {
    const std::size_t c = i * cfg.n_clusters / cfg.n_items;
    data.item_cluster[i] = c;
    members[c].push_back(i);
  }
  // Within-cluster transition rows over the other members, Dirichlet drawn.
  std::vector<std::vector<std::size_t>> next_items(cfg.n_items);
  std::vector<Vec> next_probs(cfg.n_items);
  for (std::size_t i = 0; i < cfg.n_items; ++i) {
    for (std::size_t j : members[data.item_cluster[i]]) {
      if (j != i) next_items[i].push_back(j);
    }
    Vec w(next_items[i].size());
    double total = 0.0;
    for (double& v : w) {
      v = gamma_sample(rng, cfg.transition_concentration);
      total += v;
    }
    for (double& v : w) v /= total;
    next_probs[i] = std::move(w);
  }
  auto draw_in_cluster = [&](std::size_t c) { return members[c][uniform_index(rng, members[c].size())]; };

  for (std::size_t u = 0; u < cfg.n_users; ++u) {
    ClickSequence seq;
    seq.user = u;
    std::size_t cur = draw_in_cluster(uniform_index(rng, cfg.n_clusters));
    seq.items.push_back(cur);
    while (seq.items.size() < cfg.sequence_length) {
      if (uniform01(rng) < cfg.noise_rate) {
        cur = draw_in_cluster(uniform_index(rng, cfg.n_clusters));
      } else {
        const double r = uniform01(rng);
        double acc = 0.0;
        std::size_t pick = next_items[cur].size() - 1;
        for (std::size_t t = 0; t < next_items[cur].size(); ++t) {
          acc += next_probs[cur][t];
          if (r < acc) {
            pick = t;
            break;
          }
        }
        cur = next_items[cur][pick];
      }
      seq.items.push_back(cur);
    }
    data.sequences.push_back(std::move(seq));
  }
  return data;
}

}  // namespace maxmatch
