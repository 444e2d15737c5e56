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

#ifndef MAXMATCH_MATCHING_LOSS_HPP_
#define MAXMATCH_MATCHING_LOSS_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "maxmatch/model.hpp"

namespace maxmatch {

enum class Similarity { dot, neg_kl };

enum class LossVariant { max_matching, pairwise, matching, maximizing };

std::string to_string(Similarity s);
Similarity parse_similarity(const std::string& name);
std::string to_string(LossVariant v);
LossVariant parse_loss_variant(const std::string& name);

struct LossConfig {
  LossVariant variant = LossVariant::max_matching;
  Similarity similarity = Similarity::dot;
  WeightFeatures features = WeightFeatures::embed_features;
  // Weight on the group-weighting log term. 1.0 combines the terms equally.
  double lambda = 1.0;
  // Catalogs larger than this use sampled negatives in the softmax.
  std::size_t full_softmax_limit = 10000;
  std::size_t sampled_negatives = 100;
};

// K source objects collectively related to one target. `target` indexes the
// TargetCatalog the model normalizes over.
struct GroupSample {
  std::vector<ObjectRef> group;
  std::size_t target = 0;
};

// Candidate targets in the pair-matching denominator. Contains the true
// target exactly once, at `target_pos`.
struct NegativeSet {
  std::vector<std::size_t> candidates;
  std::size_t target_pos = 0;

  static NegativeSet full(std::size_t catalog_size, std::size_t target);
  // `count` distinct non-target entries drawn uniformly, plus the target.
  static NegativeSet sampled(std::size_t catalog_size, std::size_t target,
                             std::size_t count, std::uint64_t seed);
};

// Full catalog when it fits under cfg.full_softmax_limit, otherwise a
// sample seeded by `seed`.
NegativeSet make_negatives(std::size_t catalog_size, std::size_t target,
                           const LossConfig& cfg, std::uint64_t seed);

// Intermediate values of group weighting for one group of K objects.
struct GroupWeighting {
  std::vector<Vec> similarities;       // K rows of length K-1
  std::vector<Vec> norm_similarities;  // softmax of each row
  std::vector<Vec> context_vectors;    // K vectors in h-space
  Vec context_scores;                  // S(c_k, h_k)
  Vec log_weights;                     // log sigmoid(context_scores)
};

// Group weighting over precomputed h vectors. For K = 1 the single weight
// is exactly 1 (log weight 0).
GroupWeighting compute_group_weighting(const std::vector<Vec>& h, Similarity sim);

// Adjoint of compute_group_weighting: given d(loss)/d(log_weights), returns
// d(loss)/d(h_k) for every k.
std::vector<Vec> group_weighting_backward(const std::vector<Vec>& h,
                                          const GroupWeighting& gw, Similarity sim,
                                          std::span<const double> log_weight_grad);

struct MatchBreakdown {
  Vec pair_log_probs;
  std::vector<Vec> similarities;
  std::vector<Vec> norm_similarities;
  std::vector<Vec> context_vectors;
  Vec group_log_weights;
  // pair_log_probs[k] + lambda * group_log_weights[k]
  Vec scores;
  std::size_t selected = 0;
};

// Per-sample evaluator. Caches g over the catalog, so it must not outlive
// `params` or observe them changing.
class MatchingEngine {
 public:
  MatchingEngine(const ModelParams& params, const TargetCatalog& catalog,
                 const LossConfig& cfg);

  const LossConfig& config() const { return cfg_; }
  const ModelParams& params() const { return params_; }
  const TargetCatalog& catalog() const { return catalog_; }

  // log P(target | x) over the candidates in `negs`.
  double pair_log_prob(const ObjectRef& x, std::size_t target, const NegativeSet& negs) const;

  // Fills every breakdown field and returns the loss of `variant`.
  double evaluate(const GroupSample& sample, const NegativeSet& negs,
                  LossVariant variant, MatchBreakdown* breakdown = nullptr) const;

  double loss(const GroupSample& sample, const NegativeSet& negs) const {
    return evaluate(sample, negs, cfg_.variant);
  }

  // log sum_k exp(score_k).
  double total_probability(const GroupSample& sample, const NegativeSet& negs) const;

  // Accumulates d(loss)/d(params) into `buffer` and returns the loss.
  double backward(const GroupSample& sample, const NegativeSet& negs, GradBuffer& buffer) const;

  // As backward, but adjoints of g over catalog entries go into
  // `catalog_grad` (catalog.size() x d) for a later project_catalog_grad.
  double backward_deferred(const GroupSample& sample, const NegativeSet& negs,
                           GradBuffer& buffer, Vec& catalog_grad) const;

  // Moves accumulated catalog adjoints into the g block of `buffer`.
  void project_catalog_grad(const Vec& catalog_grad, GradBuffer& buffer) const;

 private:
  struct Forward;
  Forward run_forward(const GroupSample& sample, const NegativeSet& negs, bool need_weights) const;
  std::span<const double> target_embedding(std::size_t j) const;

  const ModelParams& params_;
  const TargetCatalog& catalog_;
  LossConfig cfg_;
  Vec catalog_emb_;
};

// Free-function surface over MatchingEngine.
double pair_match_log_prob(const ModelParams& params, const TargetCatalog& catalog,
                           const ObjectRef& x, std::size_t target, const NegativeSet& negs);

GroupWeighting group_weights(const ModelParams& params, const TargetCatalog& catalog,
                             const GroupSample& sample, Similarity sim, WeightFeatures mode);

struct LossResult {
  double loss = 0.0;
  MatchBreakdown breakdown;
};

LossResult max_matching_loss(const ModelParams& params, const TargetCatalog& catalog,
                             const GroupSample& sample, const LossConfig& cfg,
                             const NegativeSet& negs);

double total_probability_objective(const ModelParams& params, const TargetCatalog& catalog,
                                   const GroupSample& sample, const LossConfig& cfg,
                                   const NegativeSet& negs);

double ablation_loss(const ModelParams& params, const TargetCatalog& catalog,
                     const GroupSample& sample, LossVariant variant, const LossConfig& cfg,
                     const NegativeSet& negs);

double loss_backward(const ModelParams& params, const TargetCatalog& catalog,
                     const GroupSample& sample, const LossConfig& cfg,
                     const NegativeSet& negs, GradBuffer& buffer);

}  // namespace maxmatch

#endif  // MAXMATCH_MATCHING_LOSS_HPP_
