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
#include "wmflab/models.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace wmflab {

namespace {

constexpr char kMagic[8] = {'W', 'M', 'F', 'L', 'M', 'O', 'D', 'L'};
constexpr std::uint32_t kVersion = 1;

void write_bytes(std::ostream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void read_bytes(std::istream& is, void* p, std::size_t n) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (!is) throw std::runtime_error("model file truncated");
}

template <typename T>
void write_pod(std::ostream& os, T v) {
  write_bytes(os, &v, sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v;
  read_bytes(is, &v, sizeof(T));
  return v;
}

void write_matrix(std::ostream& os, const DenseMatrix& m) {
  write_bytes(os, m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
}

DenseMatrix read_matrix(std::istream& is, Index rows, Index cols) {
  DenseMatrix m(rows, cols);
  read_bytes(is, m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
  return m;
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

const char* kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::AwmfWeightDecay:
      return "awmf-wd";
    case ModelKind::Wmf:
      return "wmf";
    case ModelKind::AwmfDropout:
      return "awmf-dropout";
    case ModelKind::AwmfDataWeightDecay:
      return "awmf-data-wd";
    case ModelKind::FullRank:
      return "full-rank";
  }
  return "unknown";
}

ModelKind parse_kind(const std::string& name) {
  if (name == "awmf-wd") return ModelKind::AwmfWeightDecay;
  if (name == "wmf") return ModelKind::Wmf;
  if (name == "awmf-dropout") return ModelKind::AwmfDropout;
  if (name == "awmf-data-wd") return ModelKind::AwmfDataWeightDecay;
  if (name == "full-rank") return ModelKind::FullRank;
  throw std::invalid_argument("unknown model kind: " + name);
}

bool is_factor_kind(ModelKind kind) { return kind != ModelKind::FullRank; }

ModelKind model_kind(const Model& m) {
  if (const auto* f = std::get_if<FactorModel>(&m)) return f->kind;
  return ModelKind::FullRank;
}

Index model_n_items(const Model& m) {
  if (const auto* f = std::get_if<FactorModel>(&m)) return f->v.rows();
  return std::get<FullRankModel>(m).b.rows();
}

void save_model(const Model& m, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_bytes(os, kMagic, sizeof(kMagic));
  write_pod(os, kVersion);

  ModelKind kind = model_kind(m);
  std::uint64_t n_users, n_items, d;
  double alpha, lambda;
  std::uint64_t seed = 0;
  if (const auto* f = std::get_if<FactorModel>(&m)) {
    n_users = static_cast<std::uint64_t>(f->n_users);
    n_items = static_cast<std::uint64_t>(f->v.rows());
    d = static_cast<std::uint64_t>(f->v.cols());
    alpha = f->alpha;
    lambda = f->lambda;
    seed = f->seed;
  } else {
    const auto& fr = std::get<FullRankModel>(m);
    n_users = static_cast<std::uint64_t>(fr.n_users);
    n_items = static_cast<std::uint64_t>(fr.b.rows());
    d = n_items;
    alpha = fr.alpha;
    lambda = fr.lambda;
  }
  write_pod(os, static_cast<std::uint32_t>(kind));
  write_pod(os, n_users);
  write_pod(os, n_items);
  write_pod(os, d);
  write_pod(os, alpha);
  write_pod(os, lambda);
  write_pod(os, seed);

  if (const auto* f = std::get_if<FactorModel>(&m)) {
    write_matrix(os, f->u);
    write_matrix(os, f->v);
  } else {
    write_matrix(os, std::get<FullRankModel>(m).b);
  }
  if (!os) throw std::runtime_error("short write to " + path);
  os.close();

  std::ofstream meta(path + ".meta");
  meta << "kind: " << kind_name(kind) << "\n"
       << "n_users: " << n_users << "\n"
       << "n_items: " << n_items << "\n"
       << "d: " << d << "\n"
       << "alpha: " << format_real(alpha) << "\n"
       << "lambda: " << format_real(lambda) << "\n"
       << "seed: " << seed << "\n";
}

Model load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[8];
  read_bytes(is, magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error(path + " is not a model file");
  }
  const auto version = read_pod<std::uint32_t>(is);
  if (version != kVersion) {
    throw std::runtime_error("unsupported model file version " +
                             std::to_string(version));
  }
  const auto kind = static_cast<ModelKind>(read_pod<std::uint32_t>(is));
  const auto n_users = static_cast<Index>(read_pod<std::uint64_t>(is));
  const auto n_items = static_cast<Index>(read_pod<std::uint64_t>(is));
  const auto d = static_cast<Index>(read_pod<std::uint64_t>(is));
  const double alpha = read_pod<double>(is);
  const double lambda = read_pod<double>(is);
  const auto seed = read_pod<std::uint64_t>(is);

  if (kind == ModelKind::FullRank) {
    FullRankModel fr;
    fr.b = read_matrix(is, n_items, n_items);
    fr.n_users = n_users;
    fr.alpha = alpha;
    fr.lambda = lambda;
    return fr;
  }
  FactorModel f;
  f.kind = kind;
  const Index u_rows = kind == ModelKind::Wmf ? n_users : n_items;
  f.u = read_matrix(is, u_rows, d);
  f.v = read_matrix(is, n_items, d);
  f.n_users = n_users;
  f.alpha = alpha;
  f.lambda = lambda;
  f.seed = seed;
  return f;
}

}  // namespace wmflab
