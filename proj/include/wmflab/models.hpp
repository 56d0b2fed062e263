// Copyright 2025 the wmflab authors
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
#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "wmflab/dense.hpp"

namespace wmflab {

// The five experimental model families. Enum order is the wire tag.
enum class ModelKind : std::uint32_t {
  AwmfWeightDecay = 0,
  Wmf = 1,
  AwmfDropout = 2,
  AwmfDataWeightDecay = 3,
  FullRank = 4,
};

const char* kind_name(ModelKind kind);
ModelKind parse_kind(const std::string& name);
bool is_factor_kind(ModelKind kind);

struct FactorModel {
  ModelKind kind = ModelKind::AwmfWeightDecay;
  // Wmf: U is n_users x d (free user factors). AWMF kinds: U is n_items x d
  // and the user representation is the fold-in sum x_u^T U.
  DenseMatrix u;
  DenseMatrix v;  // n_items x d
  Index n_users = 0;
  double alpha = 1.0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
};

struct FullRankModel {
  DenseMatrix b;  // n_items x n_items
  Index n_users = 0;
  double alpha = 1.0;
  double lambda = 0.0;
};

using Model = std::variant<FactorModel, FullRankModel>;

ModelKind model_kind(const Model& m);
Index model_n_items(const Model& m);

// Flat binary container (little-endian): magic, version, shape header
// (kind, n_users, n_items, d, alpha, lambda, seed), then the factors as
// column-major 64-bit floats. Round-trips bit-exactly. A plain-text
// sidecar `<path>.meta` mirrors the header.
void save_model(const Model& m, const std::string& path);
Model load_model(const std::string& path);

}  // namespace wmflab
