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

#include "maxmatch/model.hpp"

#include <cmath>

#include "maxmatch/random.hpp"

namespace maxmatch {

std::string to_string(MappingKind kind) {
  switch (kind) {
    case MappingKind::identity: return "identity";
    case MappingKind::linear: return "linear";
    case MappingKind::embedding: return "embedding";
  }
  return "unknown";
}

MappingKind parse_mapping_kind(const std::string& name) {
  if (name == "identity" || name == "ide") return MappingKind::identity;
  if (name == "linear" || name == "lin") return MappingKind::linear;
  if (name == "embedding" || name == "emb") return MappingKind::embedding;
  throw std::invalid_argument("unknown mapping kind: " + name);
}

void MappingSpec::validate() const {
  if (in_dim == 0 || out_dim == 0) {
    throw DimensionError("mapping dimensions must be positive");
  }
  if (kind == MappingKind::identity && in_dim != out_dim) {
    throw DimensionError("identity mapping requires in_dim == out_dim");
  }
}

std::size_t ObjectRef::id() const {
  if (!is_id()) throw ContractError("object is a feature vector, not an id");
  return std::get<std::size_t>(value_);
}

const Vec& ObjectRef::features() const {
  if (is_id()) throw ContractError("object is an id, not a feature vector");
  return std::get<Vec>(value_);
}

TargetCatalog TargetCatalog::ids(std::size_t n) {
  TargetCatalog c;
  c.size_ = n;
  return c;
}

TargetCatalog TargetCatalog::features(std::vector<Vec> rows) {
  TargetCatalog c;
  c.size_ = rows.size();
  c.rows_ = std::move(rows);
  return c;
}

ObjectRef TargetCatalog::at(std::size_t index) const {
  if (index >= size_) throw LookupError("catalog index out of range");
  if (has_features()) return ObjectRef::features(rows_[index]);
  return ObjectRef::id(index);
}

std::span<const double> TargetCatalog::feature_row(std::size_t index) const {
  if (index >= rows_.size()) throw LookupError("catalog feature row out of range");
  return rows_[index];
}

std::size_t ParamBlock::rows() const {
  switch (spec.kind) {
    case MappingKind::identity: return 0;
    case MappingKind::linear: return spec.out_dim;
    case MappingKind::embedding: return spec.in_dim;
  }
  return 0;
}

std::size_t ParamBlock::cols() const {
  switch (spec.kind) {
    case MappingKind::identity: return 0;
    case MappingKind::linear: return spec.in_dim;
    case MappingKind::embedding: return spec.out_dim;
  }
  return 0;
}

std::span<double> ParamBlock::row(std::size_t r) {
  if (r >= rows()) throw LookupError("parameter row out of range");
  return std::span<double>(values).subspan(r * cols(), cols());
}

std::span<const double> ParamBlock::row(std::size_t r) const {
  if (r >= rows()) throw LookupError("parameter row out of range");
  return std::span<const double>(values).subspan(r * cols(), cols());
}

void GradBuffer::zero() {
  std::fill(f.begin(), f.end(), 0.0);
  std::fill(g.begin(), g.end(), 0.0);
}

bool GradBuffer::congruent(const ModelParams& params) const {
  return f.size() == params.f.values.size() && g.size() == params.g.values.size();
}

void GradBuffer::add(const GradBuffer& other, double scale) {
  if (other.f.size() != f.size() || other.g.size() != g.size()) {
    throw DimensionError("gradient buffers are not congruent");
  }
  axpy(scale, other.f, f);
  axpy(scale, other.g, g);
}

void accumulate_grad(GradBuffer& buffer, const ModelParams& params,
                     ParamLocator where, std::span<const double> contribution) {
  if (!buffer.congruent(params)) throw DimensionError("gradient buffer shape mismatch");
  const ParamBlock& block = where.block == Block::f ? params.f : params.g;
  Vec& target = where.block == Block::f ? buffer.f : buffer.g;
  if (where.row >= block.rows()) throw LookupError("parameter row out of range");
  if (contribution.size() != block.cols()) {
    throw DimensionError("gradient contribution has wrong length");
  }
  axpy(1.0, contribution,
       std::span<double>(target).subspan(where.row * block.cols(), block.cols()));
}

Vec forward_map(const ParamBlock& block, const ObjectRef& x) {
  const MappingSpec& spec = block.spec;
  switch (spec.kind) {
    case MappingKind::identity: {
      const Vec& v = x.features();
      if (v.size() != spec.out_dim) throw DimensionError("identity input has wrong length");
      return v;
    }
    case MappingKind::linear: {
      const Vec& v = x.features();
      if (v.size() != spec.in_dim) throw DimensionError("linear input has wrong length");
      Vec out(spec.out_dim);
      for (std::size_t r = 0; r < spec.out_dim; ++r) out[r] = dot(block.row(r), v);
      return out;
    }
    case MappingKind::embedding: {
      const std::size_t id = x.id();
      if (id >= spec.in_dim) {
        throw LookupError("id " + std::to_string(id) + " outside vocabulary of size " +
                          std::to_string(spec.in_dim));
      }
      auto r = block.row(id);
      return Vec(r.begin(), r.end());
    }
  }
  return {};
}

void backward_map(const ParamBlock& block, Block which, const ObjectRef& x,
                  std::span<const double> out_grad, GradBuffer& buffer) {
  Vec& target = which == Block::f ? buffer.f : buffer.g;
  if (target.size() != block.values.size()) throw DimensionError("gradient buffer shape mismatch");
  switch (block.spec.kind) {
    case MappingKind::identity:
      return;
    case MappingKind::linear: {
      const Vec& v = x.features();
      const std::size_t cols = block.cols();
      for (std::size_t r = 0; r < block.rows(); ++r) {
        axpy(out_grad[r], v, std::span<double>(target).subspan(r * cols, cols));
      }
      return;
    }
    case MappingKind::embedding: {
      const std::size_t cols = block.cols();
      axpy(1.0, out_grad, std::span<double>(target).subspan(x.id() * cols, cols));
      return;
    }
  }
}

Vec forward_f(const ModelParams& params, const ObjectRef& x) { return forward_map(params.f, x); }
Vec forward_g(const ModelParams& params, const ObjectRef& y) { return forward_map(params.g, y); }

std::string to_string(WeightFeatures mode) {
  return mode == WeightFeatures::prob_features ? "prob_features" : "embed_features";
}

WeightFeatures parse_weight_features(const std::string& name) {
  if (name == "prob_features" || name == "prob") return WeightFeatures::prob_features;
  if (name == "embed_features" || name == "embed") return WeightFeatures::embed_features;
  throw std::invalid_argument("unknown weighting features: " + name);
}

Vec embed_catalog(const ModelParams& params, const TargetCatalog& catalog) {
  const std::size_t d = params.dim();
  Vec out(catalog.size() * d);
  for (std::size_t j = 0; j < catalog.size(); ++j) {
    const Vec gy = forward_g(params, catalog.at(j));
    std::copy(gy.begin(), gy.end(), out.begin() + static_cast<std::ptrdiff_t>(j * d));
  }
  return out;
}

Vec forward_h(const ModelParams& params, const ObjectRef& x, WeightFeatures mode,
              const TargetCatalog& catalog) {
  Vec fx = forward_f(params, x);
  if (mode == WeightFeatures::embed_features) return fx;
  if (catalog.size() == 0) throw ContractError("probabilistic features need the target catalog");
  const std::size_t d = params.dim();
  const Vec table = embed_catalog(params, catalog);
  Vec logits(catalog.size());
  for (std::size_t j = 0; j < catalog.size(); ++j) {
    logits[j] = dot(fx, std::span<const double>(table).subspan(j * d, d));
  }
  return clamp_probs(softmax(logits));
}

namespace {

ParamBlock make_block(const MappingSpec& spec, Rng& rng, double bound) {
  spec.validate();
  ParamBlock b{spec, {}};
  b.values.resize(b.rows() * b.cols());
  for (double& v : b.values) v = uniform(rng, -bound, bound);
  return b;
}

}  // namespace

ModelParams init_params(const MappingSpec& spec_f, const MappingSpec& spec_g,
                        std::uint64_t seed) {
  if (spec_f.out_dim != spec_g.out_dim) {
    throw DimensionError("f and g must map into the same embedding dimension");
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(spec_f.out_dim));
  Rng rng(derive_seed(seed, "init"));
  ModelParams p;
  p.f = make_block(spec_f, rng, bound);
  p.g = make_block(spec_g, rng, bound);
  return p;
}

}  // namespace maxmatch
