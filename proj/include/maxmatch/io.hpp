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

#ifndef MAXMATCH_IO_HPP_
#define MAXMATCH_IO_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "maxmatch/eval.hpp"
#include "maxmatch/experiment.hpp"

namespace maxmatch {

using Json = nlohmann::json;

inline constexpr const char* kToolVersion = "0.3.0";

// Bad or unreadable input file.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest decimal string that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& s);

Json to_json(const SynthConfig& cfg);
SynthConfig synth_config_from_json(const Json& j, SynthConfig base = {});
Json to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const Json& j);

// Line-delimited JSON in the ingestion formats:
//   MIL {"bag_id", "label", "instances", "instance_labels"?}
//   PLL {"features", "candidates", "true_label"}
//   RS  {"user", "items"}
// Hidden ground truth goes to a separate sidecar document.
void write_dataset(const Dataset& data, const std::filesystem::path& dataset_path,
                   const std::filesystem::path& truth_path);

// Reads a dataset; `truth_path` may be empty when the hidden labels are
// inline (MIL "instance_labels", PLL "true_label") or not needed (RS).
Dataset read_dataset(TaskKind kind, const std::filesystem::path& dataset_path,
                     const std::filesystem::path& truth_path = {});

// Parameters are stored as decimal strings so a write/read cycle is bit-exact.
Json checkpoint_to_json(const ModelParams& params, const ExperimentConfig& cfg);
ModelParams checkpoint_params(const Json& j);
ExperimentConfig checkpoint_config(const Json& j);

Json breakdown_to_json(const MatchBreakdown& b, std::size_t group_index);

std::string history_csv(const std::vector<EpochRecord>& history);
std::string metrics_csv(const std::vector<MetricReport>& reports);
Json metrics_json(const std::vector<MetricReport>& reports);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace maxmatch

#endif  // MAXMATCH_IO_HPP_
