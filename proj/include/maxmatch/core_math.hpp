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

#ifndef MAXMATCH_CORE_MATH_HPP_
#define MAXMATCH_CORE_MATH_HPP_

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace maxmatch {

using Vec = std::vector<double>;

// Raised when two operands disagree in length or shape.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised on an id outside a vocabulary or a locator outside a block.
class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Raised when a caller breaks a documented precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Entries of a probability vector are clamped to this floor before any log.
inline constexpr double kProbFloor = 1e-12;

double dot(std::span<const double> a, std::span<const double> b);

// Adds alpha * x into y.
void axpy(double alpha, std::span<const double> x, std::span<double> y);

double logsumexp(std::span<const double> z);

// Max-shifted softmax.
Vec softmax(std::span<const double> z);

Vec log_softmax(std::span<const double> z);

double sigmoid(double t);

// log(1 + exp(t)) without overflow.
double softplus(double t);

// log sigmoid(t) = -softplus(-t).
double log_sigmoid(double t);

// Clamps entries to kProbFloor and renormalizes onto the simplex.
Vec clamp_probs(std::span<const double> p);

// Adjoint of clamp_probs: given the output q = clamp_probs(p) and dL/dq,
// returns dL/dp. Clamped entries receive zero.
Vec clamp_probs_backward(std::span<const double> p, std::span<const double> q,
                         std::span<const double> q_grad);

// -KL(p || q) after clamping both arguments. Always <= 0.
double neg_kl(std::span<const double> p, std::span<const double> q);

// Partial derivatives of -sum p_i log(p_i / q_i) for already-clamped inputs.
void neg_kl_grad(std::span<const double> p, std::span<const double> q,
                 std::span<double> dp, std::span<double> dq);

// Index of the largest entry; ties go to the smallest index.
std::size_t argmax(std::span<const double> z);

double l2_norm(std::span<const double> x);

// Returns x / ||x||; the zero vector is returned unchanged.
Vec l2_normalized(std::span<const double> x);

}  // namespace maxmatch

#endif  // MAXMATCH_CORE_MATH_HPP_
