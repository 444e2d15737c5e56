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

#include "maxmatch/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace maxmatch {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw InputError("not a decimal number: '" + s + "'");
  }
  return v;
}

Json to_json(const SynthConfig& c) {
  return Json{{"n_classes", c.n_classes},
              {"feature_dim", c.feature_dim},
              {"cluster_spread", c.cluster_spread},
              {"n_groups", c.n_groups},
              {"group_size", c.group_size},
              {"noise_rate", c.noise_rate},
              {"mil_noise", to_string(c.mil_noise)},
              {"epsilon", c.epsilon},
              {"tau", c.tau},
              {"n_items", c.n_items},
              {"n_clusters", c.n_clusters},
              {"n_users", c.n_users},
              {"sequence_length", c.sequence_length},
              {"transition_concentration", c.transition_concentration},
              {"seed", c.seed}};
}

namespace {

template <typename T>
void read_field(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw InputError(std::string("config field '") + key + "': " + e.what());
  }
}

}  // namespace

SynthConfig synth_config_from_json(const Json& j, SynthConfig c) {
  read_field(j, "n_classes", c.n_classes);
  read_field(j, "feature_dim", c.feature_dim);
  read_field(j, "cluster_spread", c.cluster_spread);
  read_field(j, "n_groups", c.n_groups);
  read_field(j, "group_size", c.group_size);
  read_field(j, "noise_rate", c.noise_rate);
  read_field(j, "rho", c.noise_rate);
  if (j.contains("mil_noise")) c.mil_noise = parse_mil_noise(j.at("mil_noise").get<std::string>());
  read_field(j, "epsilon", c.epsilon);
  read_field(j, "tau", c.tau);
  read_field(j, "n_items", c.n_items);
  read_field(j, "n_clusters", c.n_clusters);
  read_field(j, "n_users", c.n_users);
  read_field(j, "sequence_length", c.sequence_length);
  read_field(j, "transition_concentration", c.transition_concentration);
  read_field(j, "seed", c.seed);
  return c;
}

Json to_json(const ExperimentConfig& c) {
  return Json{{"task", to_string(c.task)},
              {"seed", c.train.seed},
              {"dim", c.dim},
              {"eval_k", c.eval_k},
              {"rs_random_holdout", c.rs_random_holdout},
              {"synth", to_json(c.synth)},
              {"train",
               {{"epochs", c.train.epochs},
                {"batch_size", c.train.batch_size},
                {"lr", c.lr_grid ? Json("grid") : Json(c.train.lr)},
                {"lambda", c.train.loss.lambda},
                {"loss", to_string(c.train.loss.variant)},
                {"negatives", c.train.loss.sampled_negatives},
                {"full_softmax_limit", c.train.loss.full_softmax_limit}}}};
}

ExperimentConfig experiment_config_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("config must be a JSON object");
  ExperimentConfig c;
  try {
    if (j.contains("task")) c.task = parse_task_kind(j.at("task").get<std::string>());
    read_field(j, "seed", c.train.seed);
    c.synth.seed = c.train.seed;
    read_field(j, "dim", c.dim);
    read_field(j, "eval_k", c.eval_k);
    read_field(j, "rs_random_holdout", c.rs_random_holdout);
    if (j.contains("synth")) c.synth = synth_config_from_json(j.at("synth"), c.synth);
    if (j.contains("train")) {
      const Json& t = j.at("train");
      read_field(t, "epochs", c.train.epochs);
      read_field(t, "batch_size", c.train.batch_size);
      if (t.contains("lr")) {
        if (t.at("lr").is_string()) {
          if (t.at("lr").get<std::string>() != "grid") throw InputError("train.lr must be a number or \"grid\"");
          c.lr_grid = true;
        } else {
          c.train.lr = t.at("lr").get<double>();
          c.lr_grid = false;
        }
      }
      read_field(t, "lambda", c.train.loss.lambda);
      if (t.contains("loss")) c.train.loss.variant = parse_loss_variant(t.at("loss").get<std::string>());
      read_field(t, "negatives", c.train.loss.sampled_negatives);
      read_field(t, "full_softmax_limit", c.train.loss.full_softmax_limit);
    }
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  } catch (const Json::exception& e) {
    throw InputError(e.what());
  }
  if (c.train.epochs == 0 || c.train.batch_size == 0) {
    throw InputError("train.epochs and train.batch_size must be positive");
  }
  if (!(c.train.lr >= 0.0)) throw InputError("train.lr must be non-negative");
  try {
    c.synth.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("synth: ") + e.what());
  }
  return c;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

}  // namespace

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_dataset(const Dataset& data, const std::filesystem::path& dataset_path,
                   const std::filesystem::path& truth_path) {
  auto out = open_out(dataset_path);
  Json truth;
  if (const auto* mil = std::get_if<MilData>(&data)) {
    for (std::size_t b = 0; b < mil->bags.size(); ++b) {
      out << Json{{"bag_id", b}, {"label", mil->bags[b].label}, {"instances", mil->bags[b].instances}}
                 .dump()
          << '\n';
    }
    truth = {{"task", "mil"},
             {"n_classes", mil->n_classes},
             {"feature_dim", mil->feature_dim},
             {"instance_labels", mil->truth.instance_labels}};
  } else if (const auto* pll = std::get_if<PllData>(&data)) {
    for (std::size_t i = 0; i < pll->records.size(); ++i) {
      out << Json{{"features", pll->records[i].features},
                  {"candidates", pll->records[i].candidates}}
                 .dump()
          << '\n';
    }
    truth = {{"task", "pll"},
             {"n_labels", pll->n_labels},
             {"feature_dim", pll->feature_dim},
             {"true_labels", pll->true_labels}};
  } else {
    const auto& rs = std::get<RsData>(data);
    for (const ClickSequence& s : rs.sequences) {
      out << Json{{"user", s.user}, {"items", s.items}}.dump() << '\n';
    }
    truth = {{"task", "rs"}, {"n_items", rs.n_items}, {"item_cluster", rs.item_cluster}};
  }
  write_text_file(truth_path, truth.dump(2) + "\n");
}

namespace {

std::vector<Json> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  std::vector<Json> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(Json::parse(line));
    } catch (const Json::exception& e) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (rows.empty()) throw InputError(path.string() + ": no records");
  return rows;
}

std::size_t max_or(std::size_t a, std::size_t b) { return a > b ? a : b; }

}  // namespace

Dataset read_dataset(TaskKind kind, const std::filesystem::path& dataset_path,
                     const std::filesystem::path& truth_path) {
  const std::vector<Json> rows = read_lines(dataset_path);
  const Json truth = truth_path.empty() ? Json::object() : read_json_file(truth_path);
  try {
    switch (kind) {
      case TaskKind::mil: {
        MilData d;
        const bool sidecar = truth.contains("instance_labels");
        std::size_t max_label = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
          const Json& r = rows[i];
          MilBag bag;
          bag.label = r.at("label").get<std::size_t>();
          bag.instances = r.at("instances").get<std::vector<Vec>>();
          if (bag.instances.empty()) throw InputError("bag " + std::to_string(i) + " is empty");
          std::vector<std::size_t> labels;
          if (r.contains("instance_labels")) {
            labels = r.at("instance_labels").get<std::vector<std::size_t>>();
          } else if (sidecar) {
            labels = truth.at("instance_labels").at(i).get<std::vector<std::size_t>>();
          }
          if (!labels.empty() && labels.size() != bag.instances.size()) {
            throw InputError("bag " + std::to_string(i) + ": instance_labels length mismatch");
          }
          for (std::size_t y : labels) max_label = max_or(max_label, y);
          max_label = max_or(max_label, bag.label);
          d.feature_dim = bag.instances.front().size();
          for (const Vec& x : bag.instances) {
            if (x.size() != d.feature_dim) throw InputError("instances differ in dimension");
          }
          d.bags.push_back(std::move(bag));
          d.truth.instance_labels.push_back(std::move(labels));
        }
        d.n_classes = truth.value("n_classes", max_label + 1);
        return d;
      }
      case TaskKind::pll: {
        PllData d;
        std::size_t max_label = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
          const Json& r = rows[i];
          PllRecord rec;
          rec.features = r.at("features").get<Vec>();
          rec.candidates = r.at("candidates").get<std::vector<std::size_t>>();
          if (rec.candidates.empty()) throw InputError("record with an empty candidate set");
          std::size_t y = 0;
          if (r.contains("true_label")) {
            y = r.at("true_label").get<std::size_t>();
          } else if (truth.contains("true_labels")) {
            y = truth.at("true_labels").at(i).get<std::size_t>();
          } else {
            throw InputError("record " + std::to_string(i) + " has no true label and there is no truth file");
          }
          for (std::size_t c : rec.candidates) max_label = max_or(max_label, c);
          d.feature_dim = rec.features.size();
          d.records.push_back(std::move(rec));
          d.true_labels.push_back(y);
        }
        d.n_labels = truth.value("n_labels", max_label + 1);
        return d;
      }
      case TaskKind::rs: {
        RsData d;
        std::size_t max_item = 0;
        for (const Json& r : rows) {
          ClickSequence s;
          s.user = r.at("user").get<std::size_t>();
          s.items = r.at("items").get<std::vector<std::size_t>>();
          if (s.items.size() < 2) throw InputError("click sequence shorter than 2");
          for (std::size_t it : s.items) max_item = max_or(max_item, it);
          d.sequences.push_back(std::move(s));
        }
        d.n_items = truth.value("n_items", max_item + 1);
        if (truth.contains("item_cluster")) {
          d.item_cluster = truth.at("item_cluster").get<std::vector<std::size_t>>();
        }
        return d;
      }
      case TaskKind::custom:
        break;
    }
  } catch (const Json::exception& e) {
    throw InputError(dataset_path.string() + ": " + e.what());
  }
  throw InputError("custom tasks have no dataset format");
}

namespace {

Json block_to_json(const ParamBlock& b) {
  Json values = Json::array();
  for (double v : b.values) values.push_back(format_double(v));
  return Json{{"kind", to_string(b.spec.kind)},
              {"in_dim", b.spec.in_dim},
              {"out_dim", b.spec.out_dim},
              {"values", std::move(values)}};
}

ParamBlock block_from_json(const Json& j) {
  ParamBlock b;
  b.spec.kind = parse_mapping_kind(j.at("kind").get<std::string>());
  b.spec.in_dim = j.at("in_dim").get<std::size_t>();
  b.spec.out_dim = j.at("out_dim").get<std::size_t>();
  b.spec.validate();
  for (const Json& v : j.at("values")) b.values.push_back(parse_double(v.get<std::string>()));
  if (b.values.size() != b.rows() * b.cols()) throw InputError("checkpoint block has wrong size");
  return b;
}

}  // namespace

Json checkpoint_to_json(const ModelParams& params, const ExperimentConfig& cfg) {
  return Json{{"format", "maxmatch-checkpoint"},
              {"version", 1},
              {"tool_version", kToolVersion},
              {"config", to_json(cfg)},
              {"f", block_to_json(params.f)},
              {"g", block_to_json(params.g)}};
}

ModelParams checkpoint_params(const Json& j) {
  try {
    if (j.value("format", "") != "maxmatch-checkpoint") throw InputError("not a maxmatch checkpoint");
    if (j.value("version", 0) != 1) throw InputError("unsupported checkpoint version");
    ModelParams p;
    p.f = block_from_json(j.at("f"));
    p.g = block_from_json(j.at("g"));
    if (p.f.spec.out_dim != p.g.spec.out_dim) throw InputError("checkpoint f/g dimensions differ");
    return p;
  } catch (const Json::exception& e) {
    throw InputError(std::string("checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("checkpoint: ") + e.what());
  }
}

ExperimentConfig checkpoint_config(const Json& j) {
  if (!j.contains("config")) throw InputError("checkpoint has no config");
  return experiment_config_from_json(j.at("config"));
}

Json breakdown_to_json(const MatchBreakdown& b, std::size_t group_index) {
  Json weights = Json::array();
  for (double lw : b.group_log_weights) weights.push_back(std::exp(lw));
  return Json{{"group_index", group_index},
              {"group_size", b.pair_log_probs.size()},
              {"pair_log_probs", b.pair_log_probs},
              {"group_log_weights", b.group_log_weights},
              {"group_weights", weights},
              {"scores", b.scores},
              {"selected", b.selected},
              {"similarities", b.similarities},
              {"norm_similarities", b.norm_similarities},
              {"context_vectors", b.context_vectors}};
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::ostringstream out;
  out << "epoch,loss,metric\n";
  for (const EpochRecord& r : history) {
    out << r.epoch << ',' << format_double(r.loss) << ','
        << (std::isnan(r.metric) ? std::string() : format_double(r.metric)) << '\n';
  }
  return out.str();
}

std::string metrics_csv(const std::vector<MetricReport>& reports) {
  std::ostringstream out;
  // std is the population standard deviation over trials.
  out << "metric,mean,std,n_trials,values,seeds\n";
  for (const MetricReport& r : reports) {
    out << r.metric << ',' << format_double(r.mean) << ',' << format_double(r.std) << ','
        << r.values.size() << ',';
    for (std::size_t i = 0; i < r.values.size(); ++i) {
      out << (i ? ";" : "") << format_double(r.values[i]);
    }
    out << ',';
    for (std::size_t i = 0; i < r.seeds.size(); ++i) out << (i ? ";" : "") << r.seeds[i];
    out << '\n';
  }
  return out.str();
}

Json metrics_json(const std::vector<MetricReport>& reports) {
  Json arr = Json::array();
  for (const MetricReport& r : reports) {
    arr.push_back({{"metric", r.metric},
                   {"mean", r.mean},
                   {"std", r.std},
                   {"std_kind", "population"},
                   {"values", r.values},
                   {"seeds", r.seeds}});
  }
  return arr;
}

}  // namespace maxmatch
