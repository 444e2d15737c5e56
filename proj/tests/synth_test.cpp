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

#include "doctest.h"
#include "maxmatch/synth.hpp"

using namespace maxmatch;

TEST_CASE("noise count rounds up and leaves one true member") {
  CHECK(noise_count(0.5, 4) == 2);
  CHECK(noise_count(0.4, 5) == 2);
  CHECK(noise_count(0.0, 5) == 0);
  CHECK(noise_count(0.9, 3) == 2);
  CHECK(noise_count(0.99, 1) == 0);
}

TEST_CASE("clean MIL bags carry only their own class") {
  SynthConfig c;
  c.n_groups = 50;
  const MilData d = gen_mil(c);
  for (std::size_t b = 0; b < d.bags.size(); ++b)
    for (std::size_t l : d.truth.instance_labels[b]) CHECK(l == d.bags[b].label);
}

TEST_CASE("noisy MIL bags have exactly the rounded-up mismatch count") {
  SynthConfig c;
  c.n_groups = 50;
  c.group_size = 4;
  c.noise_rate = 0.5;
  for (MilNoise kind : {MilNoise::uniform, MilNoise::adjacent}) {
    c.mil_noise = kind;
    const MilData d = gen_mil(c);
    for (std::size_t b = 0; b < d.bags.size(); ++b) {
      const auto& labels = d.truth.instance_labels[b];
      CHECK(std::count(labels.begin(), labels.end(), d.bags[b].label) == 2);
      CHECK(d.bags[b].instances.size() == 4);
    }
  }
}

TEST_CASE("generators are deterministic per seed") {
  SynthConfig c;
  c.noise_rate = 0.3;
  c.epsilon = 0.5;
  c.tau = 3;
  CHECK(gen_mil(c).bags[7].instances == gen_mil(c).bags[7].instances);
  CHECK(gen_pll(c).records[3].candidates == gen_pll(c).records[3].candidates);
  CHECK(gen_rs(c).sequences[5].items == gen_rs(c).sequences[5].items);
  SynthConfig other = c;
  other.seed = 2;
  CHECK(gen_rs(c).sequences[5].items != gen_rs(other).sequences[5].items);
}

TEST_CASE("clean PLL has singleton candidates") {
  SynthConfig c;
  const PllData d = gen_pll(c);
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    CHECK(d.records[i].candidates == std::vector<std::size_t>{d.true_labels[i]});
  }
}

TEST_CASE("fully partial PLL with tau 2 has pairs containing the truth") {
  SynthConfig c;
  c.epsilon = 1.0;
  c.tau = 2;
  const PllData d = gen_pll(c);
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    const auto& cand = d.records[i].candidates;
    CHECK(cand.size() == 2);
    CHECK(std::find(cand.begin(), cand.end(), d.true_labels[i]) != cand.end());
  }
}

TEST_CASE("PLL candidate sizes stay within [2, tau] for partial records") {
  SynthConfig c;
  c.epsilon = 0.4;
  c.tau = 4;
  const PllData d = gen_pll(c);
  std::size_t partial = 0;
  for (const auto& r : d.records) {
    if (r.candidates.size() > 1) ++partial;
    CHECK(r.candidates.size() <= 4);
    CHECK(std::is_sorted(r.candidates.begin(), r.candidates.end()));
  }
  CHECK(partial == 200);
}

TEST_CASE("clean RS sequences stay inside one cluster") {
  SynthConfig c;
  const RsData d = gen_rs(c);
  for (const auto& s : d.sequences)
    for (std::size_t item : s.items) CHECK(d.item_cluster[item] == d.item_cluster[s.items[0]]);
}

TEST_CASE("always teleporting gives the chance rate of same-cluster steps") {
  SynthConfig c;
  c.noise_rate = 0.999;
  c.n_users = 400;
  c.sequence_length = 26;
  const RsData d = gen_rs(c);
  std::size_t same = 0, steps = 0;
  for (const auto& s : d.sequences) {
    for (std::size_t i = 1; i < s.items.size(); ++i) {
      same += d.item_cluster[s.items[i]] == d.item_cluster[s.items[i - 1]];
      ++steps;
    }
  }
  CHECK(steps == 10000);
  CHECK(std::abs(static_cast<double>(same) / steps - 0.05) < 0.02);
}

TEST_CASE("invalid synth configs are rejected") {
  SynthConfig c;
  c.noise_rate = 1.0;
  CHECK_THROWS(c.validate());
  c = SynthConfig{};
  c.tau = 6;
  CHECK_THROWS(c.validate());
  c = SynthConfig{};
  c.epsilon = 1.5;
  CHECK_THROWS(c.validate());
}
