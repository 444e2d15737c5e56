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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.
//
//   maxmatch_acceptance [--cli PATH] [--only N[,N...]]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "maxmatch/gradcheck.hpp"
#include "maxmatch/io.hpp"
#include "maxmatch/random.hpp"

using namespace maxmatch;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr std::size_t kBoundDraws = 10000;
constexpr double kBoundSeconds = 10.0;
constexpr std::size_t kGradcheckConfigs = 50;
constexpr double kGradcheckSeconds = 60.0;
constexpr double kOracleRelTol = 1e-12;
constexpr double kAblationMargin = 0.02;
constexpr double kAblationSeconds = 300.0;
constexpr std::size_t kTrials = 5;
constexpr double kSweepSeconds = 600.0;
constexpr double kFidelityFloor = 0.80;
constexpr std::size_t kMetricCatalogMax = 8;
constexpr std::size_t kPlusCatalogMax = 10;
constexpr std::size_t kPlusGroupMax = 4;
constexpr double kNdcgTol = 1e-15;
constexpr double kRsMargin = 0.02;

std::string g_cli;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = g_cli + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

// Random problems over the three task settings.
struct Problem {
  TaskSpec spec;
  ModelParams params;
  TargetCatalog catalog;
  GroupSample sample;
  LossConfig cfg;
  NegativeSet negs;
};

Problem random_problem(std::size_t task, std::size_t k, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "acceptance"));
  Problem p;
  auto unit = [&](std::size_t dim) {
    Vec v(dim);
    for (double& x : v) x = standard_normal(rng);
    return l2_normalized(v);
  };
  if (task == 0) {
    p.spec = TaskSpec::mil(4, 5);
    p.catalog = TargetCatalog::ids(5);
    for (std::size_t i = 0; i < k; ++i) p.sample.group.push_back(ObjectRef::features(unit(4)));
    p.sample.target = uniform_index(rng, 5);
  } else if (task == 1) {
    p.spec = TaskSpec::pll(10, 4, 3);
    std::vector<Vec> pool;
    for (int i = 0; i < 7; ++i) pool.push_back(unit(4));
    p.catalog = TargetCatalog::features(pool);
    for (std::size_t i = 0; i < k; ++i) p.sample.group.push_back(ObjectRef::id(uniform_index(rng, 10)));
    p.sample.target = uniform_index(rng, 7);
  } else {
    p.spec = TaskSpec::rs(12, 3);
    p.catalog = TargetCatalog::ids(12);
    for (std::size_t i = 0; i < k; ++i) p.sample.group.push_back(ObjectRef::id(uniform_index(rng, 12)));
    p.sample.target = uniform_index(rng, 12);
  }
  p.params = init_params(p.spec.f, p.spec.g, seed);
  for (double& v : p.params.f.values) v = uniform(rng, -2.0, 2.0);
  for (double& v : p.params.g.values) v = uniform(rng, -2.0, 2.0);
  p.cfg = p.spec.loss_config(LossVariant::max_matching, uniform(rng, 0.0, 2.0));
  if (seed % 2 == 1) {
    p.cfg.full_softmax_limit = 4;
    p.cfg.sampled_negatives = 3;
  }
  p.negs = make_negatives(p.catalog.size(), p.sample.target, p.cfg, derive_seed(seed, "negatives"));
  return p;
}

Outcome criterion_bound() {
  const auto t0 = Clock::now();
  std::size_t violations = 0;
  for (std::size_t i = 0; i < kBoundDraws; ++i) {
    const Problem p = random_problem(i % 3, 1 + (i / 3) % 8, i);
    const LossResult r = max_matching_loss(p.params, p.catalog, p.sample, p.cfg, p.negs);
    const double total = total_probability_objective(p.params, p.catalog, p.sample, p.cfg, p.negs);
    const double best = *std::max_element(r.breakdown.scores.begin(), r.breakdown.scores.end());
    if (!(total >= best)) ++violations;
  }
  const double secs = seconds_since(t0);
  return {violations == 0 && secs < kBoundSeconds,
          std::to_string(kBoundDraws) + " draws, " + std::to_string(violations) + " violations, " +
              fmt(secs, 3) + " s"};
}

Outcome criterion_gradcheck() {
  const auto t0 = Clock::now();
  const fs::path log = "acceptance_gradcheck.txt";
  const int code = run_cli("gradcheck --seed 1 --configs " + std::to_string(kGradcheckConfigs), log);
  const double secs = seconds_since(t0);
  std::string overall;
  std::istringstream lines(slurp(log));
  for (std::string line; std::getline(lines, line);)
    if (line.rfind("# overall", 0) == 0) overall = line.substr(2);
  return {code == 0 && secs < kGradcheckSeconds,
          "exit " + std::to_string(code) + ", " + overall + ", " + fmt(secs, 3) + " s"};
}

Outcome criterion_degenerate() {
  std::size_t mismatches = 0, oracle_misses = 0, draws = 0;
  for (std::size_t i = 0; i < 3000; ++i) {
    Problem p = random_problem(i % 3, 1, 50000 + i);
    ++draws;
    const double mm = max_matching_loss(p.params, p.catalog, p.sample, p.cfg, p.negs).loss;
    for (LossVariant v : {LossVariant::pairwise, LossVariant::matching, LossVariant::maximizing}) {
      if (ablation_loss(p.params, p.catalog, p.sample, v, p.cfg, p.negs) != mm) ++mismatches;
    }
    // Softmax cross-entropy over the candidate logits, computed directly.
    const Vec fx = forward_f(p.params, p.sample.group[0]);
    double peak = -std::numeric_limits<double>::infinity();
    Vec logits;
    for (std::size_t j : p.negs.candidates) {
      const Vec gy = forward_g(p.params, p.catalog.at(j));
      double s = 0.0;
      for (std::size_t c = 0; c < fx.size(); ++c) s += fx[c] * gy[c];
      logits.push_back(s);
      peak = std::max(peak, s);
    }
    double z = 0.0;
    for (double s : logits) z += std::exp(s - peak);
    const double ce = -(logits[p.negs.target_pos] - peak - std::log(z));
    if (std::abs(ce - mm) > kOracleRelTol * std::max(1.0, std::abs(ce))) ++oracle_misses;
  }
  return {mismatches == 0 && oracle_misses == 0,
          std::to_string(draws) + " single-member groups, " + std::to_string(mismatches) +
              " variant mismatches, " + std::to_string(oracle_misses) + " cross-entropy mismatches"};
}

ExperimentConfig mil_benchmark() {
  ExperimentConfig c;
  c.task = TaskKind::mil;
  c.synth.n_classes = 5;
  c.synth.feature_dim = 10;
  c.synth.n_groups = 500;
  c.synth.group_size = 5;
  c.synth.noise_rate = 0.4;
  c.lr_grid = true;
  return c;
}

Outcome criterion_ablation() {
  const auto t0 = Clock::now();
  const ExperimentConfig base = mil_benchmark();
  std::map<LossVariant, MetricReport> reports;
  for (LossVariant v : {LossVariant::max_matching, LossVariant::pairwise, LossVariant::matching,
                        LossVariant::maximizing}) {
    ExperimentConfig c = base;
    c.train.loss.variant = v;
    reports[v] = multi_trial(
        "accuracy", [&](std::uint64_t seed) { return run_trial(c, seed).at("accuracy"); }, kTrials, 1);
  }
  const double secs = seconds_since(t0);
  const double mm = reports[LossVariant::max_matching].mean;
  bool ok = secs < kAblationSeconds;
  std::string detail;
  for (const auto& [v, r] : reports) {
    detail += to_string(v) + " " + fmt(r.mean) + "+-" + fmt(r.std, 2) + ", ";
    if (v != LossVariant::max_matching && !(mm - r.mean >= kAblationMargin)) ok = false;
  }
  return {ok, detail + fmt(secs, 3) + " s"};
}

Outcome criterion_pll_sweep() {
  const auto t0 = Clock::now();
  ExperimentConfig base;
  base.task = TaskKind::pll;
  base.synth.tau = 4;
  base.synth.cluster_spread = 0.3;
  base.synth.n_groups = 1000;
  base.train.lr = 0.1;
  std::vector<double> eps, pairwise;
  bool dominated = true;
  std::string detail;
  for (int i = 1; i <= 9; ++i) {
    const double e = i / 10.0;
    double means[2];
    int slot = 0;
    for (LossVariant v : {LossVariant::max_matching, LossVariant::pairwise}) {
      ExperimentConfig c = base;
      c.synth.epsilon = e;
      c.train.loss.variant = v;
      means[slot++] = multi_trial(
          "accuracy", [&](std::uint64_t seed) { return run_trial(c, seed).at("accuracy"); }, kTrials, 1).mean;
    }
    eps.push_back(e);
    pairwise.push_back(means[1]);
    if (!(means[0] >= means[1])) dominated = false;
    detail += fmt(e, 2) + ":" + fmt(means[0], 3) + "/" + fmt(means[1], 3) + " ";
  }
  const double rho = spearman(eps, pairwise);
  const double secs = seconds_since(t0);
  return {dominated && rho < 0.0 && secs < kSweepSeconds,
          "eps:mm/pairwise " + detail + "spearman(pairwise, eps) " + fmt(rho, 3) + ", " + fmt(secs, 3) + " s"};
}

Outcome criterion_fidelity() {
  const fs::path dir = "acceptance_fidelity";
  fs::remove_all(dir);
  ExperimentConfig cfg = mil_benchmark();
  write_text_file(dir / "config.json", to_json(cfg).dump(2));
  const std::string cfg_arg = "--config " + (dir / "config.json").string();
  if (run_cli("synth " + cfg_arg + " --out " + (dir / "data").string(), dir / "synth.log") != 0)
    return {false, "synth failed"};
  if (run_cli("train " + cfg_arg + " --dataset " + (dir / "data/dataset.jsonl").string() + " --out " +
                  (dir / "model").string(),
              dir / "train.log") != 0)
    return {false, "train failed"};

  const Dataset data = read_dataset(TaskKind::mil, dir / "data/dataset.jsonl", dir / "data/truth.json");
  const auto& mil = std::get<MilData>(data);
  const PreparedTask task = prepare(data, cfg, cfg.train.seed);
  std::size_t hits = 0, true_members = 0, members = 0;
  for (std::size_t i = 0; i < task.train.size(); ++i) {
    const fs::path out = dir / "inspect.json";
    const int code = run_cli("inspect --checkpoint " + (dir / "model/checkpoint.json").string() + " --dataset " +
                                 (dir / "data/dataset.jsonl").string() + " --index " + std::to_string(i),
                             out);
    if (code != 0) return {false, "inspect failed on group " + std::to_string(i)};
    const Json j = Json::parse(slurp(out));
    const std::size_t bag = task.train_idx[i];
    const auto& labels = mil.truth.instance_labels[bag];
    const std::size_t sel = j.at("selected").get<std::size_t>();
    hits += labels.at(sel) == mil.bags[bag].label;
    for (std::size_t y : labels) true_members += y == mil.bags[bag].label;
    members += labels.size();
  }
  const double rate = static_cast<double>(hits) / task.train.size();
  const double random_rate = 1.0 - static_cast<double>(noise_count(cfg.synth.noise_rate, cfg.synth.group_size)) /
                                       static_cast<double>(cfg.synth.group_size);
  return {rate >= kFidelityFloor,
          "selected true match in " + fmt(rate) + " of " + std::to_string(task.train.size()) +
              " groups; uniform selector " + fmt(random_rate) + " (observed true fraction " +
              fmt(static_cast<double>(true_members) / members) + ")"};
}

Outcome criterion_metric_oracle() {
  std::size_t checks = 0, misses = 0;
  for (std::size_t n = 1; n <= kMetricCatalogMax; ++n) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      for (std::size_t truth = 0; truth < n; ++truth) {
        for (std::size_t k = 1; k <= n; ++k) {
          double hit = 0.0, gain = 0.0;
          for (std::size_t pos = 0; pos < k; ++pos) {
            if (perm[pos] == truth) {
              hit = 1.0;
              gain = 1.0 / std::log2(static_cast<double>(pos) + 2.0);
            }
          }
          ++checks;
          if (hit_at_k(perm, truth, k) != hit) ++misses;
          if (std::abs(ndcg_at_k(perm, truth, k) - gain) > kNdcgTol) ++misses;
        }
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  const bool anchors = ndcg_at_k({0, 1}, 0, 10) == 1.0 &&
                       std::abs(ndcg_at_k({0, 1}, 1, 10) - 1.0 / std::log2(3.0)) <= kNdcgTol;
  return {misses == 0 && anchors, std::to_string(checks) + " (permutation, truth, k) cases, " +
                                      std::to_string(misses) + " mismatches, rank-1/rank-2 anchors " +
                                      (anchors ? "ok" : "wrong")};
}

Outcome criterion_mm_plus() {
  std::size_t cases = 0, misses = 0;
  for (std::size_t n = 2; n <= kPlusCatalogMax; ++n) {
    for (std::size_t trial = 0; trial < 40; ++trial) {
      Rng rng(derive_seed(n * 1000 + trial, "mm+"));
      const TaskSpec spec = TaskSpec::rs(n, 3);
      ModelParams p = init_params(spec.f, spec.g, n * 1000 + trial);
      for (double& v : p.f.values) v = uniform(rng, -2, 2);
      for (double& v : p.g.values) v = uniform(rng, -2, 2);
      std::vector<std::size_t> group;
      const std::size_t k = 1 + uniform_index(rng, std::min(kPlusGroupMax, n - 1));
      for (std::size_t i = 0; i < k; ++i) group.push_back(uniform_index(rng, n));
      // Brute force: every candidate's best log-probability over the group.
      std::vector<std::pair<double, std::size_t>> ranked;
      for (std::size_t y = 0; y < n; ++y) {
        if (std::find(group.begin(), group.end(), y) != group.end()) continue;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t x : group) {
          Vec logits;
          for (std::size_t j = 0; j < n; ++j) {
            double s = 0;
            for (std::size_t c = 0; c < 3; ++c) s += p.f.values[x * 3 + c] * p.g.values[j * 3 + c];
            logits.push_back(s);
          }
          best = std::max(best, logits[y] - logsumexp(logits));
        }
        ranked.push_back({-best, y});
      }
      std::sort(ranked.begin(), ranked.end());
      std::vector<std::size_t> want;
      for (const auto& r : ranked) want.push_back(r.second);
      ++cases;
      if (predict_rs_plus(p, group, n) != want) ++misses;
    }
  }
  return {misses == 0, std::to_string(cases) + " catalogs/groups, " + std::to_string(misses) + " mismatches"};
}

Outcome criterion_determinism() {
  const fs::path dir = "acceptance_determinism";
  fs::remove_all(dir);
  ExperimentConfig cfg = mil_benchmark();
  cfg.lr_grid = false;
  cfg.train.lr = 0.1;
  write_text_file(dir / "config.json", to_json(cfg).dump(2));
  const std::string cfg_arg = "--config " + (dir / "config.json").string();
  const std::string ds = (dir / "data/dataset.jsonl").string();
  if (run_cli("synth " + cfg_arg + " --out " + (dir / "data").string(), dir / "synth.log") != 0)
    return {false, "synth failed"};
  std::string csv[2], history[2];
  for (int r = 0; r < 2; ++r) {
    const fs::path run = dir / ("run" + std::to_string(r));
    if (run_cli("train " + cfg_arg + " --dataset " + ds + " --out " + run.string(), dir / "train.log") != 0)
      return {false, "train failed"};
    if (run_cli("eval --checkpoint " + (run / "checkpoint.json").string() + " --dataset " + ds, dir / "eval.log") != 0)
      return {false, "eval failed"};
    csv[r] = slurp(run / "metrics.csv");
    history[r] = slurp(run / "history.csv");
  }
  const bool same = !csv[0].empty() && csv[0] == csv[1] && history[0] == history[1];
  return {same, std::string("metrics.csv ") + (csv[0] == csv[1] ? "identical" : "differs") + " (" +
                    std::to_string(csv[0].size()) + " bytes), history.csv " +
                    (history[0] == history[1] ? "identical" : "differs")};
}

Outcome criterion_rs() {
  const auto t0 = Clock::now();
  ExperimentConfig base;
  base.task = TaskKind::rs;
  base.synth.n_items = 200;
  base.synth.n_clusters = 20;
  base.synth.noise_rate = 0.3;
  base.lr_grid = true;
  std::map<LossVariant, std::vector<MetricReport>> reports;
  const std::vector<std::string> names{"hit@10", "ndcg@10"};
  for (LossVariant v : {LossVariant::max_matching, LossVariant::pairwise}) {
    ExperimentConfig c = base;
    c.train.loss.variant = v;
    reports[v] = multi_trial(
        names,
        [&](std::uint64_t seed) {
          const auto m = run_trial(c, seed);
          return std::vector<double>{m.at("hit@10"), m.at("ndcg@10")};
        },
        kTrials, 1);
  }
  const double secs = seconds_since(t0);
  const double mm = reports[LossVariant::max_matching][0].mean;
  const double pw = reports[LossVariant::pairwise][0].mean;
  return {mm - pw >= kRsMargin && secs < kSweepSeconds,
          "HIT@10 max-matching " + fmt(mm) + " pairwise " + fmt(pw) + " (NDCG@10 " +
              fmt(reports[LossVariant::max_matching][1].mean) + " vs " +
              fmt(reports[LossVariant::pairwise][1].mean) + "), " + fmt(secs, 3) + " s"};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--cli" && i + 1 < argc) {
      g_cli = argv[++i];
    } else if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string t; std::getline(ss, t, ',');) only.insert(std::stoi(t));
    } else {
      std::cerr << "usage: maxmatch_acceptance [--cli PATH] [--only N,...]\n";
      return 2;
    }
  }
  if (g_cli.empty()) g_cli = "maxmatch";

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"total-probability bound", criterion_bound},
      {"gradient check", criterion_gradcheck},
      {"single-member groups", criterion_degenerate},
      {"MIL ablation ordering", criterion_ablation},
      {"PLL epsilon sweep", criterion_pll_sweep},
      {"selection fidelity", criterion_fidelity},
      {"ranking metric oracle", criterion_metric_oracle},
      {"MM+ brute force", criterion_mm_plus},
      {"train/eval determinism", criterion_determinism},
      {"RS benefit over pairwise", criterion_rs},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << ". " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all criteria passed") << std::endl;
  return failed ? 1 : 0;
}
