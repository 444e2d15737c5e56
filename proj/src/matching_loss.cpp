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

#include "maxmatch/matching_loss.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "maxmatch/random.hpp"

namespace maxmatch {

std::string to_string(Similarity s) { return s == Similarity::dot ? "dot" : "neg_kl"; }

Similarity parse_similarity(const std::string& name) {
  if (name == "dot") return Similarity::dot;
  if (name == "neg_kl" || name == "neg-kl") return Similarity::neg_kl;
  throw std::invalid_argument("unknown similarity: " + name);
}

std::string to_string(LossVariant v) {
  switch (v) {
    case LossVariant::max_matching: return "max-matching";
    case LossVariant::pairwise: return "pairwise";
    case LossVariant::matching: return "matching";
    case LossVariant::maximizing: return "maximizing";
  }
  return "unknown";
}

LossVariant parse_loss_variant(const std::string& name) {
  if (name == "max-matching" || name == "max_matching" || name == "mm") {
    return LossVariant::max_matching;
  }
  if (name == "pairwise") return LossVariant::pairwise;
  if (name == "matching") return LossVariant::matching;
  if (name == "maximizing") return LossVariant::maximizing;
  throw std::invalid_argument("unknown loss variant: " + name);
}

NegativeSet NegativeSet::full(std::size_t catalog_size, std::size_t target) {
  if (target >= catalog_size) throw ContractError("target outside the catalog");
  NegativeSet n;
  n.candidates.resize(catalog_size);
  for (std::size_t j = 0; j < catalog_size; ++j) n.candidates[j] = j;
  n.target_pos = target;
  return n;
}

NegativeSet NegativeSet::sampled(std::size_t catalog_size, std::size_t target,
                                 std::size_t count, std::uint64_t seed) {
  if (target >= catalog_size) throw ContractError("target outside the catalog");
  if (count + 1 >= catalog_size) return full(catalog_size, target);
  Rng rng(seed);
  std::unordered_set<std::size_t> seen{target};
  NegativeSet n;
  n.candidates.reserve(count + 1);
  n.candidates.push_back(target);
  while (n.candidates.size() < count + 1) {
    const std::size_t j = uniform_index(rng, catalog_size);
    if (seen.insert(j).second) n.candidates.push_back(j);
  }
  n.target_pos = 0;
  return n;
}

NegativeSet make_negatives(std::size_t catalog_size, std::size_t target,
                           const LossConfig& cfg, std::uint64_t seed) {
  if (catalog_size <= cfg.full_softmax_limit) return NegativeSet::full(catalog_size, target);
  return NegativeSet::sampled(catalog_size, target, cfg.sampled_negatives, seed);
}

namespace {

double similarity(Similarity sim, std::span<const double> a, std::span<const double> b) {
  return sim == Similarity::dot ? dot(a, b) : neg_kl(a, b);
}

// Adds scale * dS(a, b)/da into da_out and scale * dS(a, b)/db into db_out.
void similarity_backward(Similarity sim, std::span<const double> a, std::span<const double> b,
                         double scale, std::span<double> da_out, std::span<double> db_out) {
  if (sim == Similarity::dot) {
    axpy(scale, b, da_out);
    axpy(scale, a, db_out);
    return;
  }
  Vec da(a.size()), db(b.size());
  neg_kl_grad(a, b, da, db);
  axpy(scale, da, da_out);
  axpy(scale, db, db_out);
}

}  // namespace

GroupWeighting compute_group_weighting(const std::vector<Vec>& h, Similarity sim) {
  const std::size_t K = h.size();
  if (K == 0) throw ContractError("group must contain at least one object");
  GroupWeighting gw;
  gw.similarities.resize(K);
  gw.norm_similarities.resize(K);
  gw.context_vectors.resize(K);
  gw.context_scores.assign(K, 0.0);
  gw.log_weights.assign(K, 0.0);
  if (K == 1) {
    gw.context_vectors[0] = Vec(h[0].size(), 0.0);
    return gw;
  }
  for (std::size_t k = 0; k < K; ++k) {
    if (h[k].size() != h[0].size()) throw DimensionError("group features differ in length");
    Vec& s = gw.similarities[k];
    s.reserve(K - 1);
    for (std::size_t l = 0; l < K; ++l) {
      if (l != k) s.push_back(similarity(sim, h[k], h[l]));
    }
    gw.norm_similarities[k] = softmax(s);
    Vec c(h[k].size(), 0.0);
    std::size_t m = 0;
    for (std::size_t l = 0; l < K; ++l) {
      if (l == k) continue;
      axpy(gw.norm_similarities[k][m++], h[l], c);
    }
    gw.context_scores[k] = similarity(sim, c, h[k]);
    gw.log_weights[k] = log_sigmoid(gw.context_scores[k]);
    gw.context_vectors[k] = std::move(c);
  }
  return gw;
}

std::vector<Vec> group_weighting_backward(const std::vector<Vec>& h,
                                          const GroupWeighting& gw, Similarity sim,
                                          std::span<const double> log_weight_grad) {
  const std::size_t K = h.size();
  std::vector<Vec> h_grad(K, Vec(K ? h[0].size() : 0, 0.0));
  if (K < 2) return h_grad;
  const std::size_t n = h[0].size();
  for (std::size_t k = 0; k < K; ++k) {
    if (log_weight_grad[k] == 0.0) continue;
    // d log sigmoid(t) / dt = sigmoid(-t)
    const double a_grad = log_weight_grad[k] * sigmoid(-gw.context_scores[k]);
    Vec c_grad(n, 0.0);
    similarity_backward(sim, gw.context_vectors[k], h[k], a_grad, c_grad, h_grad[k]);

    const Vec& ns = gw.norm_similarities[k];
    Vec ns_grad(K - 1);
    std::size_t m = 0;
    for (std::size_t l = 0; l < K; ++l) {
      if (l == k) continue;
      axpy(ns[m], c_grad, h_grad[l]);
      ns_grad[m] = dot(c_grad, h[l]);
      ++m;
    }
    const double inner = dot(ns, ns_grad);
    m = 0;
    for (std::size_t l = 0; l < K; ++l) {
      if (l == k) continue;
      const double s_grad = ns[m] * (ns_grad[m] - inner);
      similarity_backward(sim, h[k], h[l], s_grad, h_grad[k], h_grad[l]);
      ++m;
    }
  }
  return h_grad;
}

struct MatchingEngine::Forward {
  std::vector<Vec> fx;
  // softmax over the negative set, one row per group object
  std::vector<Vec> neg_probs;
  Vec pair_log_probs;
  bool has_weights = false;
  // unclamped softmax over the full catalog (probabilistic features only)
  std::vector<Vec> full_probs;
  std::vector<Vec> h;
  GroupWeighting gw;
};

MatchingEngine::MatchingEngine(const ModelParams& params, const TargetCatalog& catalog,
                               const LossConfig& cfg)
    : params_(params), catalog_(catalog), cfg_(cfg) {
  if (params.f.spec.out_dim != params.g.spec.out_dim) {
    throw DimensionError("f and g embedding dimensions differ");
  }
  if (!(params.g.spec.kind == MappingKind::embedding && !catalog.has_features() &&
        catalog.size() <= params.g.spec.in_dim)) {
    catalog_emb_ = embed_catalog(params, catalog);
  }
}

std::span<const double> MatchingEngine::target_embedding(std::size_t j) const {
  if (catalog_emb_.empty()) return params_.g.row(j);
  const std::size_t d = params_.dim();
  return std::span<const double>(catalog_emb_).subspan(j * d, d);
}

MatchingEngine::Forward MatchingEngine::run_forward(const GroupSample& sample,
                                                    const NegativeSet& negs,
                                                    bool need_weights) const {
  const std::size_t K = sample.group.size();
  if (K == 0) throw ContractError("group must contain at least one object");
  if (negs.target_pos >= negs.candidates.size() ||
      negs.candidates[negs.target_pos] != sample.target) {
    throw ContractError("negative set does not contain the sample target");
  }
  const bool full = negs.candidates.size() == catalog_.size();
  Forward fw;
  fw.fx.resize(K);
  fw.neg_probs.resize(K);
  fw.pair_log_probs.resize(K);
  Vec logits(negs.candidates.size());
  for (std::size_t k = 0; k < K; ++k) {
    fw.fx[k] = forward_f(params_, sample.group[k]);
    for (std::size_t j = 0; j < logits.size(); ++j) {
      logits[j] = dot(fw.fx[k], target_embedding(negs.candidates[j]));
    }
    fw.pair_log_probs[k] = logits[negs.target_pos] - logsumexp(logits);
    fw.neg_probs[k] = softmax(logits);
  }
  if (!need_weights) return fw;

  fw.has_weights = true;
  fw.h.resize(K);
  if (cfg_.features == WeightFeatures::embed_features) {
    fw.h = fw.fx;
  } else {
    fw.full_probs.resize(K);
    Vec full_logits(catalog_.size());
    for (std::size_t k = 0; k < K; ++k) {
      if (full) {
        fw.full_probs[k] = fw.neg_probs[k];
      } else {
        for (std::size_t j = 0; j < catalog_.size(); ++j) {
          full_logits[j] = dot(fw.fx[k], target_embedding(j));
        }
        fw.full_probs[k] = softmax(full_logits);
      }
      fw.h[k] = clamp_probs(fw.full_probs[k]);
    }
  }
  fw.gw = compute_group_weighting(fw.h, cfg_.similarity);
  return fw;
}

double MatchingEngine::pair_log_prob(const ObjectRef& x, std::size_t target,
                                     const NegativeSet& negs) const {
  GroupSample s{{x}, target};
  return run_forward(s, negs, false).pair_log_probs[0];
}

namespace {

bool variant_needs_weights(LossVariant v) {
  return v == LossVariant::max_matching || v == LossVariant::matching;
}

Vec combined_scores(const Vec& lp, const Vec& lw, double lambda) {
  Vec s(lp.size());
  for (std::size_t k = 0; k < lp.size(); ++k) s[k] = lp[k] + lambda * lw[k];
  return s;
}

double variant_loss(LossVariant variant, const Vec& lp, const Vec& scores) {
  switch (variant) {
    case LossVariant::max_matching:
      return -scores[argmax(scores)];
    case LossVariant::matching: {
      double total = 0.0;
      for (double s : scores) total += -s;
      return total;
    }
    case LossVariant::pairwise: {
      double total = 0.0;
      for (double v : lp) total += -v;
      return total;
    }
    case LossVariant::maximizing:
      return -lp[argmax(lp)];
  }
  return 0.0;
}

}  // namespace

double MatchingEngine::evaluate(const GroupSample& sample, const NegativeSet& negs,
                                LossVariant variant, MatchBreakdown* breakdown) const {
  const bool weights = breakdown != nullptr || variant_needs_weights(variant);
  Forward fw = run_forward(sample, negs, weights);
  Vec scores = weights ? combined_scores(fw.pair_log_probs, fw.gw.log_weights, cfg_.lambda)
                       : fw.pair_log_probs;
  const double loss = variant_loss(variant, fw.pair_log_probs, scores);
  if (breakdown != nullptr) {
    breakdown->selected = argmax(scores);
    breakdown->scores = std::move(scores);
    breakdown->pair_log_probs = std::move(fw.pair_log_probs);
    breakdown->similarities = std::move(fw.gw.similarities);
    breakdown->norm_similarities = std::move(fw.gw.norm_similarities);
    breakdown->context_vectors = std::move(fw.gw.context_vectors);
    breakdown->group_log_weights = std::move(fw.gw.log_weights);
  }
  return loss;
}

double MatchingEngine::total_probability(const GroupSample& sample,
                                         const NegativeSet& negs) const {
  Forward fw = run_forward(sample, negs, true);
  return logsumexp(combined_scores(fw.pair_log_probs, fw.gw.log_weights, cfg_.lambda));
}

double MatchingEngine::backward(const GroupSample& sample, const NegativeSet& negs,
                                GradBuffer& buffer) const {
  Vec catalog_grad(catalog_.size() * params_.dim(), 0.0);
  const double loss = backward_deferred(sample, negs, buffer, catalog_grad);
  project_catalog_grad(catalog_grad, buffer);
  return loss;
}

double MatchingEngine::backward_deferred(const GroupSample& sample, const NegativeSet& negs,
                                         GradBuffer& buffer, Vec& catalog_grad) const {
  if (!buffer.congruent(params_)) throw DimensionError("gradient buffer shape mismatch");
  const std::size_t d = params_.dim();
  if (catalog_grad.size() != catalog_.size() * d) {
    throw DimensionError("catalog gradient has wrong shape");
  }
  const LossVariant variant = cfg_.variant;
  const bool weights = variant_needs_weights(variant);
  Forward fw = run_forward(sample, negs, weights);
  const std::size_t K = sample.group.size();
  const Vec scores = weights
                         ? combined_scores(fw.pair_log_probs, fw.gw.log_weights, cfg_.lambda)
                         : fw.pair_log_probs;
  const double loss = variant_loss(variant, fw.pair_log_probs, scores);

  Vec lp_grad(K, 0.0), lw_grad(K, 0.0);
  switch (variant) {
    case LossVariant::max_matching: {
      const std::size_t k = argmax(scores);
      lp_grad[k] = -1.0;
      lw_grad[k] = -cfg_.lambda;
      break;
    }
    case LossVariant::matching:
      std::fill(lp_grad.begin(), lp_grad.end(), -1.0);
      std::fill(lw_grad.begin(), lw_grad.end(), -cfg_.lambda);
      break;
    case LossVariant::pairwise:
      std::fill(lp_grad.begin(), lp_grad.end(), -1.0);
      break;
    case LossVariant::maximizing:
      lp_grad[argmax(fw.pair_log_probs)] = -1.0;
      break;
  }

  auto cat_row = [&](std::size_t j) {
    return std::span<double>(catalog_grad).subspan(j * d, d);
  };

  std::vector<Vec> fx_grad(K, Vec(d, 0.0));
  for (std::size_t k = 0; k < K; ++k) {
    if (lp_grad[k] == 0.0) continue;
    const Vec& p = fw.neg_probs[k];
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double z_grad = lp_grad[k] * ((j == negs.target_pos ? 1.0 : 0.0) - p[j]);
      if (z_grad == 0.0) continue;
      const std::size_t c = negs.candidates[j];
      axpy(z_grad, target_embedding(c), fx_grad[k]);
      axpy(z_grad, fw.fx[k], cat_row(c));
    }
  }

  const bool any_weight_grad =
      weights && K > 1 &&
      std::any_of(lw_grad.begin(), lw_grad.end(), [](double v) { return v != 0.0; });
  if (any_weight_grad) {
    std::vector<Vec> h_grad = group_weighting_backward(fw.h, fw.gw, cfg_.similarity, lw_grad);
    for (std::size_t k = 0; k < K; ++k) {
      if (cfg_.features == WeightFeatures::embed_features) {
        axpy(1.0, h_grad[k], fx_grad[k]);
        continue;
      }
      const Vec& p = fw.full_probs[k];
      const Vec p_grad = clamp_probs_backward(p, fw.h[k], h_grad[k]);
      const double inner = dot(p, p_grad);
      for (std::size_t j = 0; j < p.size(); ++j) {
        const double z_grad = p[j] * (p_grad[j] - inner);
        if (z_grad == 0.0) continue;
        axpy(z_grad, target_embedding(j), fx_grad[k]);
        axpy(z_grad, fw.fx[k], cat_row(j));
      }
    }
  }

  for (std::size_t k = 0; k < K; ++k) {
    backward_map(params_.f, Block::f, sample.group[k], fx_grad[k], buffer);
  }
  return loss;
}

void MatchingEngine::project_catalog_grad(const Vec& catalog_grad, GradBuffer& buffer) const {
  const std::size_t d = params_.dim();
  const ParamBlock& g = params_.g;
  if (g.spec.kind == MappingKind::identity) return;
  for (std::size_t j = 0; j < catalog_.size(); ++j) {
    std::span<const double> adj = std::span<const double>(catalog_grad).subspan(j * d, d);
    if (std::all_of(adj.begin(), adj.end(), [](double v) { return v == 0.0; })) continue;
    backward_map(g, Block::g, catalog_.at(j), adj, buffer);
  }
}

double pair_match_log_prob(const ModelParams& params, const TargetCatalog& catalog,
                           const ObjectRef& x, std::size_t target, const NegativeSet& negs) {
  return MatchingEngine(params, catalog, LossConfig{}).pair_log_prob(x, target, negs);
}

GroupWeighting group_weights(const ModelParams& params, const TargetCatalog& catalog,
                             const GroupSample& sample, Similarity sim, WeightFeatures mode) {
  std::vector<Vec> h;
  h.reserve(sample.group.size());
  for (const ObjectRef& x : sample.group) h.push_back(forward_h(params, x, mode, catalog));
  return compute_group_weighting(h, sim);
}

LossResult max_matching_loss(const ModelParams& params, const TargetCatalog& catalog,
                             const GroupSample& sample, const LossConfig& cfg,
                             const NegativeSet& negs) {
  LossResult r;
  r.loss = MatchingEngine(params, catalog, cfg)
               .evaluate(sample, negs, LossVariant::max_matching, &r.breakdown);
  return r;
}

double total_probability_objective(const ModelParams& params, const TargetCatalog& catalog,
                                   const GroupSample& sample, const LossConfig& cfg,
                                   const NegativeSet& negs) {
  return MatchingEngine(params, catalog, cfg).total_probability(sample, negs);
}

double ablation_loss(const ModelParams& params, const TargetCatalog& catalog,
                     const GroupSample& sample, LossVariant variant, const LossConfig& cfg,
                     const NegativeSet& negs) {
  return MatchingEngine(params, catalog, cfg).evaluate(sample, negs, variant);
}

double loss_backward(const ModelParams& params, const TargetCatalog& catalog,
                     const GroupSample& sample, const LossConfig& cfg,
                     const NegativeSet& negs, GradBuffer& buffer) {
  return MatchingEngine(params, catalog, cfg).backward(sample, negs, buffer);
}

}  // namespace maxmatch
