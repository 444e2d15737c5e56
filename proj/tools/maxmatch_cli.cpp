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

// Command-line entry point: synth, train, eval, sweep, gradcheck, inspect.
//
// Exit codes: 0 success, 1 check failure, 2 usage or input error,
// 3 numerical failure.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "maxmatch/gradcheck.hpp"
#include "maxmatch/io.hpp"

namespace fs = std::filesystem;
using namespace maxmatch;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

struct Manifest {
  std::string command;
  Json config;
  Json inputs = Json::object();
  fs::path out_dir;
  std::string started = utc_now();

  void write() const {
    Json j{{"command", command},
           {"tool_version", kToolVersion},
           {"config", config},
           {"inputs", inputs},
           {"output_dir", out_dir.string()},
           {"started_at", started},
           {"finished_at", utc_now()}};
    write_text_file(out_dir / "manifest.json", j.dump(2) + "\n");
  }
};

// Flag overrides shared by commands that take a config file.
struct Overrides {
  std::string loss;
  std::string lr;
  double lambda = NAN;
  std::size_t epochs = 0;
  std::size_t batch_size = 0;
  std::size_t dim = 0;
  long long seed = -1;
  double epsilon = NAN;
  double rho = NAN;
  std::size_t tau = 0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--loss", loss, "max-matching | pairwise | matching | maximizing");
    cmd->add_option("--lr", lr, "learning rate, or 'grid' to select from {1e-1,...,1e-4}");
    cmd->add_option("--lambda", lambda, "weight on the group-weighting term");
    cmd->add_option("--epochs", epochs);
    cmd->add_option("--batch-size", batch_size);
    cmd->add_option("--dim", dim, "embedding dimension (PLL, RS)");
    cmd->add_option("--seed", seed);
    cmd->add_option("--epsilon", epsilon, "PLL fraction of partially labeled records");
    cmd->add_option("--tau", tau, "PLL largest candidate set");
    cmd->add_option("--rho", rho, "group noise rate");
  }

  void apply(ExperimentConfig& c) const {
    if (!loss.empty()) c.train.loss.variant = parse_loss_variant(loss);
    if (!lr.empty()) {
      if (lr == "grid") {
        c.lr_grid = true;
      } else {
        c.train.lr = parse_double(lr);
        c.lr_grid = false;
      }
    }
    if (!std::isnan(lambda)) c.train.loss.lambda = lambda;
    if (epochs) c.train.epochs = epochs;
    if (batch_size) c.train.batch_size = batch_size;
    if (dim) c.dim = dim;
    if (seed >= 0) c.train.seed = c.synth.seed = static_cast<std::uint64_t>(seed);
    if (!std::isnan(epsilon)) c.synth.epsilon = epsilon;
    if (!std::isnan(rho)) c.synth.noise_rate = rho;
    if (tau) c.synth.tau = tau;
    c.synth.validate();
  }
};

ExperimentConfig load_config(const std::string& path, const Overrides& ov) {
  ExperimentConfig c = path.empty() ? ExperimentConfig{} : experiment_config_from_json(read_json_file(path));
  ov.apply(c);
  return c;
}

fs::path default_truth(const std::string& dataset, const std::string& truth) {
  if (!truth.empty()) return truth;
  const fs::path sibling = fs::path(dataset).parent_path() / "truth.json";
  return fs::exists(sibling) ? sibling : fs::path{};
}

void check_compatible(const PreparedTask& task, const ModelParams& params) {
  if (!(task.spec.f == params.f.spec) || !(task.spec.g == params.g.spec)) {
    throw InputError("checkpoint mappings do not match the dataset (f " + to_string(params.f.spec.kind) +
                     " " + std::to_string(params.f.spec.in_dim) + "x" +
                     std::to_string(params.f.spec.out_dim) + ", g " + to_string(params.g.spec.kind) +
                     " " + std::to_string(params.g.spec.in_dim) + "x" +
                     std::to_string(params.g.spec.out_dim) + ")");
  }
}

int cmd_synth(const std::string& config, const Overrides& ov, const std::string& out) {
  const ExperimentConfig cfg = load_config(config, ov);
  const fs::path dir = out.empty() ? fs::path("out/synth") : fs::path(out);
  Manifest m{"synth", to_json(cfg), {{"config", config}}, dir};
  write_dataset(generate(cfg), dir / "dataset.jsonl", dir / "truth.json");
  m.write();
  std::cout << "wrote " << (dir / "dataset.jsonl").string() << '\n';
  return kExitOk;
}

int cmd_train(const std::string& config, const Overrides& ov, const std::string& dataset,
              const std::string& truth, const std::string& out) {
  const ExperimentConfig cfg = load_config(config, ov);
  const fs::path dir = out.empty() ? fs::path("out/train") : fs::path(out);
  const fs::path truth_path = default_truth(dataset, truth);
  Manifest m{"train", to_json(cfg), {{"config", config}, {"dataset", dataset}, {"truth", truth_path.string()}}, dir};
  const Dataset data = read_dataset(cfg.task, dataset, truth_path);
  const PreparedTask task = prepare(data, cfg, cfg.train.seed);
  try {
    const FitResult fitted = fit(data, task, cfg, true);
    ExperimentConfig chosen = cfg;
    chosen.train.lr = fitted.lr;
    chosen.lr_grid = false;
    write_text_file(dir / "checkpoint.json", checkpoint_to_json(fitted.result.params, chosen).dump() + "\n");
    write_text_file(dir / "history.csv", history_csv(fitted.result.history));
    if (cfg.lr_grid) {
      std::ostringstream grid;
      grid << "lr,validation_metric\n";
      for (const auto& [lr, score] : fitted.grid) grid << format_double(lr) << ',' << format_double(score) << '\n';
      write_text_file(dir / "lr_grid.csv", grid.str());
    }
    m.config["selected_lr"] = fitted.lr;
    m.write();
    const auto& last = fitted.result.history.back();
    std::cout << "trained " << fitted.result.history.size() << " epochs, lr " << fitted.lr
              << ", final loss " << last.loss << ", validation " << last.metric << '\n';
  } catch (const NumericalError& e) {
    Json dump{{"error", e.what()}, {"config", to_json(cfg)}, {"dataset", dataset}};
    write_text_file(dir / "diagnostic.json", dump.dump(2) + "\n");
    m.write();
    std::cerr << "numerical failure: " << e.what() << " (see " << (dir / "diagnostic.json").string() << ")\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int cmd_eval(const std::string& checkpoint, const std::string& dataset, const std::string& truth,
             const std::string& mode, const std::string& split, const std::string& out) {
  const Json ck = read_json_file(checkpoint);
  const ModelParams params = checkpoint_params(ck);
  const ExperimentConfig cfg = checkpoint_config(ck);
  const fs::path dir = out.empty() ? fs::path(checkpoint).parent_path() : fs::path(out);
  const fs::path truth_path = default_truth(dataset, truth);
  const Dataset data = read_dataset(cfg.task, dataset, truth_path);
  const PreparedTask task = prepare(data, cfg, cfg.train.seed);
  check_compatible(task, params);
  const Split which = split == "validation" ? Split::validation : Split::test;
  if (split != "validation" && split != "test") throw InputError("--split must be test or validation");
  const auto metrics = evaluate(data, task, params, which, parse_rs_mode(mode), cfg.eval_k);
  std::vector<MetricReport> reports;
  for (const auto& [name, value] : metrics) {
    reports.push_back(summarize(name, {value}, {cfg.train.seed}));
  }
  write_text_file(dir / "metrics.csv", metrics_csv(reports));
  write_text_file(dir / "metrics.json", metrics_json(reports).dump(2) + "\n");
  Manifest m{"eval", to_json(cfg),
             {{"checkpoint", checkpoint}, {"dataset", dataset}, {"truth", truth_path.string()},
              {"mode", mode}, {"split", split}},
             dir};
  m.write();
  std::cout << metrics_csv(reports);
  return kExitOk;
}

std::vector<double> parse_values(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(parse_double(tok));
  }
  if (out.empty()) throw InputError("--values is empty");
  return out;
}

int cmd_sweep(const std::string& config, const Overrides& ov, const std::string& axis,
              const std::string& values_arg, std::size_t trials, const std::string& variants_arg,
              const std::string& mode_arg, const std::string& out) {
  const RsMode mode = parse_rs_mode(mode_arg);
  const ExperimentConfig base = load_config(config, ov);
  if (axis != "epsilon" && axis != "tau" && axis != "rho") {
    throw InputError("--axis must be epsilon, tau or rho");
  }
  const std::vector<double> values = parse_values(values_arg);
  std::vector<LossVariant> variants;
  {
    std::stringstream ss(variants_arg);
    std::string tok;
    while (std::getline(ss, tok, ',')) variants.push_back(parse_loss_variant(tok));
  }
  struct Job {
    double value;
    LossVariant variant;
    std::vector<MetricReport> reports;
  };
  std::vector<Job> jobs;
  for (double v : values) {
    for (LossVariant var : variants) jobs.push_back({v, var, {}});
  }
  // Validate every point before spending time on any of them.
  for (const Job& job : jobs) {
    ExperimentConfig c = base;
    if (axis == "epsilon") c.synth.epsilon = job.value;
    if (axis == "rho") c.synth.noise_rate = job.value;
    if (axis == "tau") c.synth.tau = static_cast<std::size_t>(job.value);
    c.synth.validate();
  }
  const std::vector<std::string> metric_names =
      base.task == TaskKind::rs
          ? std::vector<std::string>{"hit@" + std::to_string(base.eval_k), "ndcg@" + std::to_string(base.eval_k)}
          : std::vector<std::string>{"accuracy"};

#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(jobs.size()); ++i) {
    Job& job = jobs[static_cast<std::size_t>(i)];
    ExperimentConfig c = base;
    c.train.loss.variant = job.variant;
    if (axis == "epsilon") c.synth.epsilon = job.value;
    if (axis == "rho") c.synth.noise_rate = job.value;
    if (axis == "tau") c.synth.tau = static_cast<std::size_t>(job.value);
    job.reports = multi_trial(
        metric_names,
        [&](std::uint64_t seed) {
          const auto m = run_trial(c, seed, mode);
          std::vector<double> row;
          for (const auto& name : metric_names) row.push_back(m.at(name));
          return row;
        },
        trials, base.train.seed);
  }

  std::ostringstream csv;
  csv << "axis,value,variant,metric,mean,std,n_trials\n";
  for (const Job& job : jobs) {
    for (const MetricReport& r : job.reports) {
      csv << axis << ',' << format_double(job.value) << ',' << to_string(job.variant) << ','
          << r.metric << ',' << format_double(r.mean) << ',' << format_double(r.std) << ','
          << r.values.size() << '\n';
    }
  }
  const fs::path dir = out.empty() ? fs::path("out/sweep") : fs::path(out);
  write_text_file(dir / "curve.csv", csv.str());
  Manifest m{"sweep", to_json(base),
             {{"config", config}, {"axis", axis}, {"values", values}, {"trials", trials}, {"variants", variants_arg}, {"mode", mode_arg}},
             dir};
  m.write();
  std::cout << csv.str();
  return kExitOk;
}

int cmd_gradcheck(long long seed, std::size_t configs, bool corrupt) {
  GradientMutation mutate;
  if (corrupt) {
    mutate = [](GradBuffer& g) {
      if (!g.g.empty()) g.g[0] += 1e-2;
    };
  }
  const GradcheckReport report = run_gradcheck(static_cast<std::uint64_t>(seed), configs, mutate);
  std::cout << format_report(report);
  return report.passed() ? kExitOk : kExitCheckFailed;
}

int cmd_inspect(const std::string& checkpoint, const std::string& dataset, const std::string& truth,
                std::size_t index) {
  const Json ck = read_json_file(checkpoint);
  const ModelParams params = checkpoint_params(ck);
  const ExperimentConfig cfg = checkpoint_config(ck);
  const Dataset data = read_dataset(cfg.task, dataset, default_truth(dataset, truth));
  const PreparedTask task = prepare(data, cfg, cfg.train.seed);
  check_compatible(task, params);
  if (index >= task.train.size()) {
    throw InputError("group index " + std::to_string(index) + " out of range (" +
                     std::to_string(task.train.size()) + " training groups)");
  }
  std::cout << breakdown_to_json(inspect_group(task, params, index, cfg.train.loss.lambda), index).dump(2)
            << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Max-Matching: learning with group noise"};
  app.require_subcommand(1);

  std::string config, dataset, truth, out, checkpoint, mode = "mm", split = "test";
  std::string axis, values, variants = "max-matching,pairwise,matching,maximizing";
  std::size_t trials = 5, configs = 50, index = 0;
  long long gc_seed = 1;
  bool corrupt = false;
  Overrides ov;

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--config", config, "experiment config (JSON)");
  synth->add_option("--out", out, "output directory");
  ov.add_to(synth);

  auto* train = app.add_subcommand("train", "train on a dataset");
  train->add_option("--config", config, "experiment config (JSON)");
  train->add_option("--dataset", dataset, "line-delimited JSON dataset")->required();
  train->add_option("--truth", truth, "hidden-truth sidecar (default: truth.json next to the dataset)");
  train->add_option("--out", out, "output directory");
  ov.add_to(train);

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--checkpoint", checkpoint)->required();
  eval->add_option("--dataset", dataset)->required();
  eval->add_option("--truth", truth);
  eval->add_option("--mode", mode, "RS scoring: mm (last item) or mm+ (best item in the group)");
  eval->add_option("--split", split, "test or validation");
  eval->add_option("--out", out, "output directory (default: the checkpoint's)");

  auto* sweep = app.add_subcommand("sweep", "synth -> train -> eval over a noise axis");
  sweep->add_option("--config", config);
  sweep->add_option("--axis", axis, "epsilon, tau or rho")->required();
  sweep->add_option("--values", values, "comma-separated values")->required();
  sweep->add_option("--trials", trials);
  sweep->add_option("--variants", variants, "comma-separated loss variants");
  sweep->add_option("--mode", mode, "RS scoring: mm or mm+");
  sweep->add_option("--out", out);
  ov.add_to(sweep);

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of every loss gradient");
  gradcheck->add_option("--seed", gc_seed);
  gradcheck->add_option("--configs", configs, "random configurations per case");
  gradcheck->add_flag("--corrupt-gradient", corrupt, "perturb the analytic gradient (self-test)");

  auto* inspect = app.add_subcommand("inspect", "print the match breakdown of one training group");
  inspect->add_option("--checkpoint", checkpoint)->required();
  inspect->add_option("--dataset", dataset)->required();
  inspect->add_option("--truth", truth);
  inspect->add_option("--index", index)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*synth) return cmd_synth(config, ov, out);
    if (*train) return cmd_train(config, ov, dataset, truth, out);
    if (*eval) return cmd_eval(checkpoint, dataset, truth, mode, split, out);
    if (*sweep) return cmd_sweep(config, ov, axis, values, trials, variants, mode, out);
    if (*gradcheck) return cmd_gradcheck(gc_seed, configs, corrupt);
    if (*inspect) return cmd_inspect(checkpoint, dataset, truth, index);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
