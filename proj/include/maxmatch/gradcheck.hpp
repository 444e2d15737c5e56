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

#ifndef MAXMATCH_GRADCHECK_HPP_
#define MAXMATCH_GRADCHECK_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "maxmatch/tasks.hpp"

namespace maxmatch {

// |analytic - numeric| / max(|analytic|, |numeric|, kGradcheckFloor)
inline constexpr double kGradcheckFloor = 1e-3;
inline constexpr double kGradcheckStep = 1e-5;
inline constexpr double kGradcheckTolerance = 1e-4;

struct GradcheckCase {
  TaskKind task = TaskKind::mil;
  LossVariant variant = LossVariant::max_matching;
  std::size_t group_size = 1;
  std::size_t configs = 0;
  std::size_t coordinates = 0;
  double max_rel_error = 0.0;
  std::vector<std::string> failures;
};

struct GradcheckReport {
  std::vector<GradcheckCase> cases;
  double max_rel_error = 0.0;
  double tolerance = kGradcheckTolerance;
  bool passed() const { return max_rel_error < tolerance; }
};

// Applied to every analytic gradient before comparison; used to confirm the
// check catches a broken gradient.
using GradientMutation = std::function<void(GradBuffer&)>;

// Largest relative error over every parameter coordinate of one sample.
// Failing coordinates (error >= tol) are appended to `failures`.
double gradient_error(const ModelParams& params, const TargetCatalog& catalog,
                      const GroupSample& sample, const LossConfig& cfg, const NegativeSet& negs,
                      const GradientMutation& mutate = {}, double tol = kGradcheckTolerance,
                      std::vector<std::string>* failures = nullptr);

// Central finite differences over all four loss variants, the three task
// instantiations and K in {1, 2, 5}, `configs` random draws per case.
GradcheckReport run_gradcheck(std::uint64_t seed, std::size_t configs = 50,
                              const GradientMutation& mutate = {});

std::string format_report(const GradcheckReport& report);

}  // namespace maxmatch

#endif  // MAXMATCH_GRADCHECK_HPP_
