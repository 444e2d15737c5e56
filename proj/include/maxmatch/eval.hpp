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

#ifndef MAXMATCH_EVAL_HPP_
#define MAXMATCH_EVAL_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace maxmatch {

double accuracy(const std::vector<std::size_t>& preds, const std::vector<std::size_t>& truth);

// 1 if `truth` is among the first k entries of `ranked`, else 0.
double hit_at_k(const std::vector<std::size_t>& ranked, std::size_t truth, std::size_t k);

// Single-relevant-item NDCG: 1 / log2(1 + rank) when rank <= k, else 0.
double ndcg_at_k(const std::vector<std::size_t>& ranked, std::size_t truth, std::size_t k);

// Mean and population standard deviation over repeated trials.
struct MetricReport {
  std::string metric;
  double mean = 0.0;
  double std = 0.0;
  std::vector<double> values;
  std::vector<std::uint64_t> seeds;
};

MetricReport summarize(std::string metric, std::vector<double> values,
                       std::vector<std::uint64_t> seeds);

// Runs `run(seed)` for seeds base_seed .. base_seed + n_trials - 1.
MetricReport multi_trial(const std::string& metric, const std::function<double(std::uint64_t)>& run,
                         std::size_t n_trials = 5, std::uint64_t base_seed = 1);

// Trials of one run share a seed list; each report aggregates one metric.
std::vector<MetricReport> multi_trial(
    const std::vector<std::string>& metrics,
    const std::function<std::vector<double>(std::uint64_t)>& run, std::size_t n_trials,
    std::uint64_t base_seed);

// Rank-order correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace maxmatch

#endif  // MAXMATCH_EVAL_HPP_
