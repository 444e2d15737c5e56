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

#include "maxmatch/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "maxmatch/core_math.hpp"

namespace maxmatch {

double accuracy(const std::vector<std::size_t>& preds, const std::vector<std::size_t>& truth) {
  if (preds.size() != truth.size()) throw DimensionError("accuracy: length mismatch");
  if (preds.empty()) throw std::invalid_argument("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

namespace {

// 1-based rank of truth within the top k, or 0 when absent.
std::size_t rank_within(const std::vector<std::size_t>& ranked, std::size_t truth, std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  std::unordered_set<std::size_t> seen;
  for (std::size_t item : ranked) {
    if (!seen.insert(item).second) throw ContractError("ranked list contains duplicates");
  }
  const std::size_t limit = std::min(k, ranked.size());
  for (std::size_t i = 0; i < limit; ++i) {
    if (ranked[i] == truth) return i + 1;
  }
  return 0;
}

}  // namespace

double hit_at_k(const std::vector<std::size_t>& ranked, std::size_t truth, std::size_t k) {
  return rank_within(ranked, truth, k) > 0 ? 1.0 : 0.0;
}

double ndcg_at_k(const std::vector<std::size_t>& ranked, std::size_t truth, std::size_t k) {
  const std::size_t r = rank_within(ranked, truth, k);
  return r == 0 ? 0.0 : 1.0 / std::log2(1.0 + static_cast<double>(r));
}

MetricReport summarize(std::string metric, std::vector<double> values,
                       std::vector<std::uint64_t> seeds) {
  if (values.empty()) throw std::invalid_argument("summarize: no trials");
  MetricReport r;
  r.metric = std::move(metric);
  const double n = static_cast<double>(values.size());
  r.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  // Keep the mean inside [min, max] under rounding.
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  r.mean = std::clamp(r.mean, *lo, *hi);
  double ss = 0.0;
  for (double v : values) ss += (v - r.mean) * (v - r.mean);
  r.std = std::sqrt(ss / n);
  r.values = std::move(values);
  r.seeds = std::move(seeds);
  return r;
}

MetricReport multi_trial(const std::string& metric, const std::function<double(std::uint64_t)>& run,
                         std::size_t n_trials, std::uint64_t base_seed) {
  return multi_trial(std::vector<std::string>{metric},
                     [&](std::uint64_t s) { return std::vector<double>{run(s)}; }, n_trials,
                     base_seed)
      .front();
}

std::vector<MetricReport> multi_trial(
    const std::vector<std::string>& metrics,
    const std::function<std::vector<double>(std::uint64_t)>& run, std::size_t n_trials,
    std::uint64_t base_seed) {
  if (n_trials == 0) throw std::invalid_argument("multi_trial: n_trials must be at least 1");
  std::vector<std::vector<double>> per_trial(n_trials);
  std::vector<std::uint64_t> seeds(n_trials);
  for (std::size_t t = 0; t < n_trials; ++t) {
    seeds[t] = base_seed + t;
    per_trial[t] = run(seeds[t]);
    if (per_trial[t].size() != metrics.size()) {
      throw DimensionError("multi_trial: run returned the wrong number of metrics");
    }
  }
  std::vector<MetricReport> out;
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    std::vector<double> values(n_trials);
    for (std::size_t t = 0; t < n_trials; ++t) values[t] = per_trial[t][m];
    out.push_back(summarize(metrics[m], std::move(values), seeds));
  }
  return out;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DimensionError("spearman: need two equal series");
  const std::vector<double> rx = average_ranks(x), ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace maxmatch
