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

#ifndef MAXMATCH_KERNELS_HPP_
#define MAXMATCH_KERNELS_HPP_

// Data-parallel kernels. Each OpenMP kernel has a serial reference with the
// same contract; the tests compare the two and bench/ times them.

#include <cstdint>
#include <span>
#include <vector>

#include "maxmatch/matching_loss.hpp"

namespace maxmatch {

// Samples per work unit in batch_gradient. Fixed so the reduction order,
// and hence the result, does not depend on the thread count.
inline constexpr std::size_t kGradChunk = 8;

// Sums loss and d(loss)/d(params) over samples[order[i]] into `out`.
// Negatives for sample s are drawn from derive_seed(neg_seed, s).
double batch_gradient_serial(const MatchingEngine& engine, std::span<const GroupSample> samples,
                             std::span<const std::size_t> order, std::uint64_t neg_seed,
                             GradBuffer& out);

double batch_gradient(const MatchingEngine& engine, std::span<const GroupSample> samples,
                      std::span<const std::size_t> order, std::uint64_t neg_seed,
                      GradBuffer& out);

// Summed loss without gradients.
double batch_loss(const MatchingEngine& engine, std::span<const GroupSample> samples,
                  std::uint64_t neg_seed);

// f(q)^T g(y) for every query and catalog entry, queries x catalog row-major.
Vec score_matrix_serial(const ModelParams& params, std::span<const ObjectRef> queries,
                        const TargetCatalog& catalog);

Vec score_matrix(const ModelParams& params, std::span<const ObjectRef> queries,
                 const TargetCatalog& catalog);

}  // namespace maxmatch

#endif  // MAXMATCH_KERNELS_HPP_
