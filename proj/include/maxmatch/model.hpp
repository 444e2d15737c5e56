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

#ifndef MAXMATCH_MODEL_HPP_
#define MAXMATCH_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "maxmatch/core_math.hpp"

namespace maxmatch {

enum class MappingKind { identity, linear, embedding };

std::string to_string(MappingKind kind);
MappingKind parse_mapping_kind(const std::string& name);

// Shape of one mapping function. For embeddings in_dim is the vocabulary
// size; for identity and linear maps it is the input feature dimension.
struct MappingSpec {
  MappingKind kind = MappingKind::identity;
  std::size_t in_dim = 1;
  std::size_t out_dim = 1;

  void validate() const;
  friend bool operator==(const MappingSpec&, const MappingSpec&) = default;
};

// A source or target object: a categorical id or a dense feature vector.
class ObjectRef {
 public:
  ObjectRef() : value_(std::size_t{0}) {}
  static ObjectRef id(std::size_t id) { return ObjectRef(id); }
  static ObjectRef features(Vec x) { return ObjectRef(std::move(x)); }

  bool is_id() const { return std::holds_alternative<std::size_t>(value_); }
  std::size_t id() const;
  const Vec& features() const;

  friend bool operator==(const ObjectRef&, const ObjectRef&) = default;

 private:
  explicit ObjectRef(std::size_t id) : value_(id) {}
  explicit ObjectRef(Vec x) : value_(std::move(x)) {}
  std::variant<std::size_t, Vec> value_;
};

// The target universe Y that the pair-matching softmax normalizes over.
// Either the ids [0, n) of an embedding vocabulary or a pool of feature rows.
class TargetCatalog {
 public:
  TargetCatalog() = default;
  static TargetCatalog ids(std::size_t n);
  static TargetCatalog features(std::vector<Vec> rows);

  std::size_t size() const { return size_; }
  bool has_features() const { return !rows_.empty(); }
  ObjectRef at(std::size_t index) const;
  std::span<const double> feature_row(std::size_t index) const;

 private:
  std::size_t size_ = 0;
  std::vector<Vec> rows_;
};

// Learnable state of one mapping. Embedding tables are vocab x d, linear
// matrices are d x in_dim; both row-major. Identity maps hold nothing.
struct ParamBlock {
  MappingSpec spec;
  Vec values;

  std::size_t rows() const;
  std::size_t cols() const;
  std::span<double> row(std::size_t r);
  std::span<const double> row(std::size_t r) const;
};

enum class Block { f, g };

struct ModelParams {
  ParamBlock f;
  ParamBlock g;

  std::size_t dim() const { return f.spec.out_dim; }
  std::size_t size() const { return f.values.size() + g.values.size(); }
};

// Partial derivatives laid out exactly like ModelParams.
struct GradBuffer {
  Vec f;
  Vec g;

  GradBuffer() = default;
  explicit GradBuffer(const ModelParams& params)
      : f(params.f.values.size(), 0.0), g(params.g.values.size(), 0.0) {}

  void zero();
  bool congruent(const ModelParams& params) const;
  void add(const GradBuffer& other, double scale = 1.0);
  std::size_t size() const { return f.size() + g.size(); }
};

// Which parameter row a gradient contribution lands on.
struct ParamLocator {
  Block block = Block::f;
  std::size_t row = 0;
};

// Adds `contribution` to row `where.row` of the chosen block.
void accumulate_grad(GradBuffer& buffer, const ModelParams& params,
                     ParamLocator where, std::span<const double> contribution);

// Evaluates one mapping on one object.
Vec forward_map(const ParamBlock& block, const ObjectRef& x);

// Pushes d(loss)/d(output) of forward_map(block, x) into the buffer.
void backward_map(const ParamBlock& block, Block which, const ObjectRef& x,
                  std::span<const double> out_grad, GradBuffer& buffer);

Vec forward_f(const ModelParams& params, const ObjectRef& x);
Vec forward_g(const ModelParams& params, const ObjectRef& y);

// Input features of the group-weighting step: either the embedding f(x) or
// the pair-matching distribution over the whole target catalog.
enum class WeightFeatures { prob_features, embed_features };

std::string to_string(WeightFeatures mode);
WeightFeatures parse_weight_features(const std::string& name);

Vec forward_h(const ModelParams& params, const ObjectRef& x, WeightFeatures mode,
              const TargetCatalog& catalog);

// g(y) for every catalog entry, catalog.size() x d row-major.
Vec embed_catalog(const ModelParams& params, const TargetCatalog& catalog);

// Uniform [-1/sqrt(d), 1/sqrt(d)] initialization, deterministic per seed.
ModelParams init_params(const MappingSpec& spec_f, const MappingSpec& spec_g,
                        std::uint64_t seed);

}  // namespace maxmatch

#endif  // MAXMATCH_MODEL_HPP_
