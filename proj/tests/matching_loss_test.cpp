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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "maxmatch/matching_loss.hpp"
#include "maxmatch/random.hpp"
#include "maxmatch/tasks.hpp"

using namespace maxmatch;

namespace {

ModelParams rs_params(std::size_t n, std::size_t d, std::uint64_t seed) {
  const TaskSpec spec = TaskSpec::rs(n, d);
  ModelParams p = init_params(spec.f, spec.g, seed);
  Rng rng(seed);
  for (double& v : p.f.values) v = uniform(rng, -1.5, 1.5);
  for (double& v : p.g.values) v = uniform(rng, -1.5, 1.5);
  return p;
}

GroupSample rs_sample(std::vector<std::size_t> ids, std::size_t target) {
  GroupSample s;
  for (std::size_t id : ids) s.group.push_back(ObjectRef::id(id));
  s.target = target;
  return s;
}

// Brute-force scores for an embedding/embedding/dot setting.
Vec oracle_scores(const ModelParams& p, const GroupSample& s, double lambda) {
  const std::size_t d = p.dim();
  const std::size_t n = p.g.rows();
  auto f = [&](std::size_t i) { return Vec(p.f.values.begin() + i * d, p.f.values.begin() + (i + 1) * d); };
  auto g = [&](std::size_t j) { return Vec(p.g.values.begin() + j * d, p.g.values.begin() + (j + 1) * d); };
  auto ip = [](const Vec& a, const Vec& b) {
    double t = 0;
    for (std::size_t i = 0; i < a.size(); ++i) t += a[i] * b[i];
    return t;
  };
  const std::size_t k_count = s.group.size();
  Vec out;
  for (std::size_t k = 0; k < k_count; ++k) {
    const Vec fk = f(s.group[k].id());
    double denom = 0;
    for (std::size_t j = 0; j < n; ++j) denom += std::exp(ip(fk, g(j)));
    const double lp = ip(fk, g(s.target)) - std::log(denom);
    double lw = 0;
    if (k_count > 1) {
      double z = 0;
      for (std::size_t l = 0; l < k_count; ++l)
        if (l != k) z += std::exp(ip(fk, f(s.group[l].id())));
      Vec c(d, 0.0);
      for (std::size_t l = 0; l < k_count; ++l) {
        if (l == k) continue;
        const double w = std::exp(ip(fk, f(s.group[l].id()))) / z;
        const Vec fl = f(s.group[l].id());
        for (std::size_t i = 0; i < d; ++i) c[i] += w * fl[i];
      }
      lw = -std::log1p(std::exp(-ip(c, fk)));
    }
    out.push_back(lp + lambda * lw);
  }
  return out;
}

}  // namespace

TEST_CASE("pair log prob on a one-dimensional embedding") {
  const TaskSpec spec = TaskSpec::rs(3, 1);
  ModelParams p = init_params(spec.f, spec.g, 1);
  p.f.values = {1, 0, 0};
  p.g.values = {2, 1, 0};
  const TargetCatalog cat = TargetCatalog::ids(3);
  const double lp = pair_match_log_prob(p, cat, ObjectRef::id(0), 0, NegativeSet::full(3, 0));
  CHECK(lp == doctest::Approx(2.0 - std::log(std::exp(2.0) + std::exp(1.0) + 1.0)).epsilon(1e-14));
  CHECK(lp == doctest::Approx(-0.40760596444437).epsilon(1e-12));
}

TEST_CASE("group weights of a three-member group match the direct formula") {
  const ModelParams p = rs_params(6, 2, 11);
  const GroupSample s = rs_sample({0, 3, 5}, 1);
  const GroupWeighting gw =
      group_weights(p, TargetCatalog::ids(6), s, Similarity::dot, WeightFeatures::embed_features);
  const Vec want = oracle_scores(p, s, 1.0);
  Vec lp;
  for (const ObjectRef& x : s.group)
    lp.push_back(pair_match_log_prob(p, TargetCatalog::ids(6), x, 1, NegativeSet::full(6, 1)));
  REQUIRE(gw.log_weights.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(gw.log_weights[k] == doctest::Approx(want[k] - lp[k]).epsilon(1e-10));
    CHECK(gw.log_weights[k] <= 0.0);
    double row = 0;
    for (double v : gw.norm_similarities[k]) row += v;
    CHECK(row == doctest::Approx(1.0));
  }
}

TEST_CASE("max-matching loss equals the brute-force oracle") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const ModelParams p = rs_params(7, 3, seed);
    Rng rng(seed * 7);
    const std::size_t k = 1 + uniform_index(rng, 5);
    std::vector<std::size_t> ids;
    for (std::size_t i = 0; i < k; ++i) ids.push_back(uniform_index(rng, 7));
    const GroupSample s = rs_sample(ids, uniform_index(rng, 7));
    LossConfig cfg = TaskSpec::rs(7, 3).loss_config(LossVariant::max_matching, 0.7);
    const Vec want = oracle_scores(p, s, 0.7);
    const LossResult got = max_matching_loss(p, TargetCatalog::ids(7), s, cfg, NegativeSet::full(7, s.target));
    CHECK(got.loss == doctest::Approx(-*std::max_element(want.begin(), want.end())).epsilon(1e-10));
    CHECK(got.breakdown.selected == argmax(want));
  }
}

TEST_CASE("ablations reduce to their defining sums") {
  const ModelParams p = rs_params(8, 3, 4);
  const GroupSample s = rs_sample({1, 2, 6, 7}, 3);
  const TargetCatalog cat = TargetCatalog::ids(8);
  const LossConfig cfg = TaskSpec::rs(8, 3).loss_config(LossVariant::max_matching);
  const NegativeSet negs = NegativeSet::full(8, 3);
  MatchBreakdown b;
  MatchingEngine engine(p, cat, cfg);
  engine.evaluate(s, negs, LossVariant::max_matching, &b);
  double pairwise = 0, matching = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    pairwise -= b.pair_log_probs[k];
    matching -= b.pair_log_probs[k] + b.group_log_weights[k];
  }
  CHECK(ablation_loss(p, cat, s, LossVariant::pairwise, cfg, negs) == doctest::Approx(pairwise));
  CHECK(ablation_loss(p, cat, s, LossVariant::matching, cfg, negs) == doctest::Approx(matching));
  CHECK(ablation_loss(p, cat, s, LossVariant::maximizing, cfg, negs) ==
        doctest::Approx(-*std::max_element(b.pair_log_probs.begin(), b.pair_log_probs.end())));
}

TEST_CASE("with lambda zero max-matching is maximizing") {
  const ModelParams p = rs_params(8, 3, 9);
  const GroupSample s = rs_sample({0, 4, 5}, 2);
  LossConfig cfg = TaskSpec::rs(8, 3).loss_config(LossVariant::max_matching, 0.0);
  const TargetCatalog cat = TargetCatalog::ids(8);
  const NegativeSet negs = NegativeSet::full(8, 2);
  CHECK(max_matching_loss(p, cat, s, cfg, negs).loss ==
        ablation_loss(p, cat, s, LossVariant::maximizing, cfg, negs));
}

TEST_CASE("single-member groups give the same loss under every variant") {
  const ModelParams p = rs_params(6, 2, 2);
  const GroupSample s = rs_sample({4}, 1);
  const TargetCatalog cat = TargetCatalog::ids(6);
  const LossConfig cfg = TaskSpec::rs(6, 2).loss_config(LossVariant::max_matching);
  const NegativeSet negs = NegativeSet::full(6, 1);
  const double mm = max_matching_loss(p, cat, s, cfg, negs).loss;
  CHECK(mm == -pair_match_log_prob(p, cat, s.group[0], 1, negs));
  for (LossVariant v : {LossVariant::pairwise, LossVariant::matching, LossVariant::maximizing})
    CHECK(ablation_loss(p, cat, s, v, cfg, negs) == mm);
}

TEST_CASE("total probability bounds the best score") {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const ModelParams p = rs_params(9, 3, seed);
    Rng rng(seed);
    std::vector<std::size_t> ids;
    const std::size_t k = 1 + uniform_index(rng, 8);
    for (std::size_t i = 0; i < k; ++i) ids.push_back(uniform_index(rng, 9));
    const GroupSample s = rs_sample(ids, uniform_index(rng, 9));
    const LossConfig cfg = TaskSpec::rs(9, 3).loss_config(LossVariant::max_matching);
    const NegativeSet negs = NegativeSet::full(9, s.target);
    const double total = total_probability_objective(p, TargetCatalog::ids(9), s, cfg, negs);
    const double best = -max_matching_loss(p, TargetCatalog::ids(9), s, cfg, negs).loss;
    CHECK(total >= best);
  }
}

TEST_CASE("permuting the group permutes the scores and keeps the loss") {
  const ModelParams p = rs_params(10, 4, 21);
  const std::vector<std::size_t> ids{2, 5, 7, 9};
  const TargetCatalog cat = TargetCatalog::ids(10);
  const LossConfig cfg = TaskSpec::rs(10, 4).loss_config(LossVariant::max_matching);
  const NegativeSet negs = NegativeSet::full(10, 0);
  const LossResult a = max_matching_loss(p, cat, rs_sample(ids, 0), cfg, negs);
  std::vector<std::size_t> perm{3, 0, 2, 1};
  std::vector<std::size_t> shuffled;
  for (std::size_t i : perm) shuffled.push_back(ids[i]);
  const LossResult b = max_matching_loss(p, cat, rs_sample(shuffled, 0), cfg, negs);
  CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-13));
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(b.breakdown.scores[i] == doctest::Approx(a.breakdown.scores[perm[i]]).epsilon(1e-13));
}

TEST_CASE("ties in the score go to the first member") {
  const ModelParams p = rs_params(5, 2, 3);
  const GroupSample s = rs_sample({1, 1, 1}, 0);
  const LossConfig cfg = TaskSpec::rs(5, 2).loss_config(LossVariant::max_matching);
  const LossResult r = max_matching_loss(p, TargetCatalog::ids(5), s, cfg, NegativeSet::full(5, 0));
  CHECK(r.breakdown.selected == 0);
}

TEST_CASE("neg-KL weighting on probability features") {
  const TaskSpec spec = TaskSpec::mil(3, 4);
  ModelParams p = init_params(spec.f, spec.g, 7);
  GroupSample s;
  s.group = {ObjectRef::features({1, 0, 0}), ObjectRef::features({0, 1, 0}),
             ObjectRef::features({0.6, 0.8, 0})};
  s.target = 2;
  const GroupWeighting gw = group_weights(p, TargetCatalog::ids(4), s, Similarity::neg_kl,
                                          WeightFeatures::prob_features);
  for (const Vec& row : gw.similarities)
    for (double v : row) CHECK(v <= 0.0);
  for (double v : gw.log_weights) CHECK(std::isfinite(v));
}

TEST_CASE("sampled negatives keep the target first and are distinct") {
  const NegativeSet n = NegativeSet::sampled(500, 42, 100, 9);
  REQUIRE(n.candidates.size() == 101);
  CHECK(n.target_pos == 0);
  CHECK(n.candidates[0] == 42);
  std::vector<std::size_t> sorted = n.candidates;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
  CHECK(NegativeSet::sampled(500, 42, 100, 9).candidates == n.candidates);
  CHECK(NegativeSet::sampled(50, 3, 100, 9).candidates.size() == 50);
  LossConfig cfg;
  CHECK(make_negatives(20000, 5, cfg, 1).candidates.size() == 101);
  CHECK(make_negatives(10000, 5, cfg, 1).candidates.size() == 10000);
}

TEST_CASE("empty groups and bad targets are rejected") {
  const ModelParams p = rs_params(5, 2, 3);
  const LossConfig cfg = TaskSpec::rs(5, 2).loss_config(LossVariant::max_matching);
  CHECK_THROWS(max_matching_loss(p, TargetCatalog::ids(5), GroupSample{}, cfg, NegativeSet::full(5, 0)));
  CHECK_THROWS(NegativeSet::full(5, 5));
}

TEST_CASE("backward matches a finite difference on one coordinate") {
  const ModelParams p = rs_params(6, 3, 8);
  const GroupSample s = rs_sample({0, 2, 4}, 5);
  const TargetCatalog cat = TargetCatalog::ids(6);
  for (LossVariant v : {LossVariant::max_matching, LossVariant::pairwise, LossVariant::matching,
                        LossVariant::maximizing}) {
    const LossConfig cfg = TaskSpec::rs(6, 3).loss_config(v);
    const NegativeSet negs = NegativeSet::full(6, 5);
    GradBuffer g(p);
    loss_backward(p, cat, s, cfg, negs, g);
    for (std::size_t i : {0u, 4u, 7u}) {
      ModelParams plus = p, minus = p;
      plus.f.values[i] += 1e-6;
      minus.f.values[i] -= 1e-6;
      MatchingEngine ep(plus, cat, cfg), em(minus, cat, cfg);
      const double num = (ep.loss(s, negs) - em.loss(s, negs)) / 2e-6;
      CHECK(g.f[i] == doctest::Approx(num).epsilon(1e-5));
    }
  }
}
