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

#include "maxmatch/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "maxmatch/random.hpp"

namespace maxmatch {

double gradient_error(const ModelParams& params, const TargetCatalog& catalog,
                      const GroupSample& sample, const LossConfig& cfg, const NegativeSet& negs,
                      const GradientMutation& mutate, double tol,
                      std::vector<std::string>* failures) {
  GradBuffer analytic(params);
  loss_backward(params, catalog, sample, cfg, negs, analytic);
  if (mutate) mutate(analytic);

  ModelParams probe = params;
  double worst = 0.0;
  auto check_block = [&](Vec& values, const Vec& grad, const char* name) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + kGradcheckStep;
      const double up = ablation_loss(probe, catalog, sample, cfg.variant, cfg, negs);
      values[i] = saved - kGradcheckStep;
      const double down = ablation_loss(probe, catalog, sample, cfg.variant, cfg, negs);
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * kGradcheckStep);
      const double err = std::abs(grad[i] - numeric) /
                         std::max({std::abs(grad[i]), std::abs(numeric), kGradcheckFloor});
      worst = std::max(worst, err);
      if (err >= tol && failures != nullptr) {
        std::ostringstream msg;
        msg << name << "[" << i << "] analytic=" << grad[i] << " numeric=" << numeric
            << " rel_err=" << err;
        failures->push_back(msg.str());
      }
    }
  };
  check_block(probe.f.values, analytic.f, "f");
  check_block(probe.g.values, analytic.g, "g");
  return worst;
}

namespace {

struct Problem {
  ModelParams params;
  TargetCatalog catalog;
  GroupSample sample;
  LossConfig cfg;
  NegativeSet negs;
};

Vec random_vec(std::size_t n, Rng& rng, double scale) {
  Vec v(n);
  for (double& x : v) x = scale * standard_normal(rng);
  return v;
}

std::vector<std::size_t> distinct_ids(std::size_t k, std::size_t n, Rng& rng) {
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  shuffle(all, rng);
  all.resize(k);
  return all;
}

Problem make_problem(TaskKind task, LossVariant variant, std::size_t K, bool sampled, Rng& rng) {
  Problem p;
  TaskSpec spec;
  switch (task) {
    case TaskKind::mil: {
      spec = TaskSpec::mil(4, 5);
      p.catalog = TargetCatalog::ids(5);
      for (std::size_t k = 0; k < K; ++k) {
        p.sample.group.push_back(ObjectRef::features(l2_normalized(random_vec(4, rng, 1.0))));
      }
      p.sample.target = uniform_index(rng, 5);
      break;
    }
    case TaskKind::pll: {
      spec = TaskSpec::pll(6, 4, 3);
      std::vector<Vec> pool;
      for (int i = 0; i < 7; ++i) pool.push_back(l2_normalized(random_vec(4, rng, 1.0)));
      p.catalog = TargetCatalog::features(std::move(pool));
      for (std::size_t y : distinct_ids(K, 6, rng)) p.sample.group.push_back(ObjectRef::id(y));
      p.sample.target = uniform_index(rng, 7);
      break;
    }
    default: {
      spec = TaskSpec::rs(10, 3);
      p.catalog = TargetCatalog::ids(10);
      for (std::size_t y : distinct_ids(K, 10, rng)) p.sample.group.push_back(ObjectRef::id(y));
      p.sample.target = uniform_index(rng, 10);
      break;
    }
  }
  p.params = init_params(spec.f, spec.g, rng());
  // Scale past the default init so the logits are not nearly uniform.
  for (double& v : p.params.f.values) v = uniform(rng, -1.5, 1.5);
  for (double& v : p.params.g.values) v = uniform(rng, -1.5, 1.5);
  p.cfg = spec.loss_config(variant, uniform(rng, 0.5, 1.5));
  if (sampled) {
    p.cfg.full_softmax_limit = 2;
    p.cfg.sampled_negatives = 2;
  }
  p.negs = make_negatives(p.catalog.size(), p.sample.target, p.cfg, rng());
  return p;
}

// Gap between the two best entries; infinite for a single entry.
double top_gap(Vec v) {
  if (v.size() < 2) return INFINITY;
  std::sort(v.begin(), v.end(), std::greater<>());
  return v[0] - v[1];
}

// Finite differences straddle the max only when two candidates nearly tie.
bool near_kink(const Problem& p) {
  const LossVariant v = p.cfg.variant;
  if (v != LossVariant::max_matching && v != LossVariant::maximizing) return false;
  MatchingEngine engine(p.params, p.catalog, p.cfg);
  MatchBreakdown b;
  engine.evaluate(p.sample, p.negs, v, &b);
  const Vec& key = v == LossVariant::max_matching ? b.scores : b.pair_log_probs;
  return top_gap(key) < 1e-3;
}

}  // namespace

GradcheckReport run_gradcheck(std::uint64_t seed, std::size_t configs,
                              const GradientMutation& mutate) {
  GradcheckReport report;
  Rng rng(derive_seed(seed, "gradcheck"));
  for (TaskKind task : {TaskKind::mil, TaskKind::pll, TaskKind::rs}) {
    for (LossVariant variant : {LossVariant::max_matching, LossVariant::pairwise,
                                LossVariant::matching, LossVariant::maximizing}) {
      for (std::size_t K : {std::size_t{1}, std::size_t{2}, std::size_t{5}}) {
        GradcheckCase c;
        c.task = task;
        c.variant = variant;
        c.group_size = K;
        for (std::size_t i = 0; i < configs; ++i) {
          Problem p = make_problem(task, variant, K, i % 2 == 1, rng);
          while (near_kink(p)) p = make_problem(task, variant, K, i % 2 == 1, rng);
          std::vector<std::string> failures;
          const double err = gradient_error(p.params, p.catalog, p.sample, p.cfg, p.negs, mutate,
                                            report.tolerance, &failures);
          c.max_rel_error = std::max(c.max_rel_error, err);
          c.coordinates += p.params.size();
          for (auto& f : failures) c.failures.push_back("config " + std::to_string(i) + ": " + f);
          ++c.configs;
        }
        report.max_rel_error = std::max(report.max_rel_error, c.max_rel_error);
        report.cases.push_back(std::move(c));
      }
    }
  }
  return report;
}

std::string format_report(const GradcheckReport& report) {
  std::ostringstream out;
  out << "task,variant,K,configs,coordinates,max_rel_error,status\n";
  for (const GradcheckCase& c : report.cases) {
    out << to_string(c.task) << ',' << to_string(c.variant) << ',' << c.group_size << ','
        << c.configs << ',' << c.coordinates << ',' << c.max_rel_error << ','
        << (c.failures.empty() ? "ok" : "FAIL") << '\n';
  }
  for (LossVariant v : {LossVariant::max_matching, LossVariant::pairwise, LossVariant::matching,
                        LossVariant::maximizing}) {
    double worst = 0.0;
    for (const GradcheckCase& c : report.cases) {
      if (c.variant == v) worst = std::max(worst, c.max_rel_error);
    }
    out << "# " << to_string(v) << " max_rel_error " << worst << '\n';
  }
  for (const GradcheckCase& c : report.cases) {
    for (const std::string& f : c.failures) {
      out << "# FAIL " << to_string(c.task) << ' ' << to_string(c.variant) << " K=" << c.group_size
          << ' ' << f << '\n';
    }
  }
  out << "# overall max_rel_error " << report.max_rel_error << " tolerance " << report.tolerance
      << (report.passed() ? " PASS" : " FAIL") << '\n';
  return out.str();
}

}  // namespace maxmatch
