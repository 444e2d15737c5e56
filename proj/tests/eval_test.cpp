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
#include "maxmatch/core_math.hpp"
#include "maxmatch/eval.hpp"

using namespace maxmatch;

TEST_CASE("accuracy counts exact matches") {
  CHECK(accuracy({1, 2, 3, 4}, {1, 0, 3, 0}) == 0.5);
  CHECK_THROWS(accuracy({1}, {1, 2}));
  CHECK_THROWS(accuracy({}, {}));
}

TEST_CASE("NDCG at ranks one and two") {
  CHECK(ndcg_at_k({7, 3, 1}, 7, 10) == 1.0);
  CHECK(ndcg_at_k({3, 7, 1}, 7, 10) == doctest::Approx(0.6309297535714574).epsilon(1e-15));
  CHECK(ndcg_at_k({3, 7, 1}, 7, 10) == 1.0 / std::log2(3.0));
  CHECK(ndcg_at_k({3, 1, 7}, 7, 2) == 0.0);
}

TEST_CASE("HIT@k reads only the top k") {
  CHECK(hit_at_k({3, 1, 7}, 7, 3) == 1.0);
  CHECK(hit_at_k({3, 1, 7}, 7, 2) == 0.0);
  CHECK(hit_at_k({3, 1, 7}, 9, 3) == 0.0);
  CHECK_THROWS(hit_at_k({3, 3, 7}, 7, 3));
  CHECK_THROWS(hit_at_k({3, 1, 7}, 7, 0));
}

TEST_CASE("ranking metrics agree with a position scan over every permutation") {
  for (std::size_t n = 1; n <= 6; ++n) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      for (std::size_t truth = 0; truth < n; ++truth) {
        std::size_t pos = 0;
        while (perm[pos] != truth) ++pos;
        for (std::size_t k = 1; k <= n; ++k) {
          const double hit = pos < k ? 1.0 : 0.0;
          const double gain = pos < k ? 1.0 / std::log2(static_cast<double>(pos) + 2.0) : 0.0;
          CHECK(hit_at_k(perm, truth, k) == hit);
          CHECK(ndcg_at_k(perm, truth, k) == doctest::Approx(gain).epsilon(1e-15));
        }
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
}

TEST_CASE("summaries report mean and population standard deviation") {
  const MetricReport r = summarize("accuracy", {0.2, 0.4, 0.6}, {1, 2, 3});
  CHECK(r.mean == doctest::Approx(0.4));
  CHECK(r.std == doctest::Approx(std::sqrt(0.08 / 3)));
  const MetricReport flat = summarize("accuracy", {0.3, 0.3, 0.3}, {1, 2, 3});
  CHECK(flat.std == 0.0);
  CHECK(flat.mean >= 0.3);
  CHECK(flat.mean <= 0.3);
}

TEST_CASE("multi_trial runs consecutive seeds") {
  const MetricReport r = multi_trial("x", [](std::uint64_t s) { return static_cast<double>(s); }, 4, 10);
  CHECK(r.seeds == std::vector<std::uint64_t>{10, 11, 12, 13});
  CHECK(r.mean == doctest::Approx(11.5));
}

TEST_CASE("Spearman uses average ranks") {
  CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(spearman({1, 2, 3}, {1, 1, 2}) == doctest::Approx(std::sqrt(3.0) / 2));
}
