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
#include "wmflab/sparse.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace wmflab {

BinaryInteractionMatrix BinaryInteractionMatrix::from_coordinates(
    Index n_users, Index n_items, std::vector<Coordinate> coords) {
  if (n_users < 0 || n_items < 0) {
    throw std::invalid_argument("negative matrix dimension");
  }
  for (const auto& [u, i] : coords) {
    if (u < 0 || u >= n_users || i < 0 || i >= n_items) {
      throw std::invalid_argument("coordinate (" + std::to_string(u) + ", " +
                                  std::to_string(i) + ") out of bounds for " +
                                  std::to_string(n_users) + " x " +
                                  std::to_string(n_items));
    }
  }
  std::sort(coords.begin(), coords.end());
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());

  BinaryInteractionMatrix m;
  m.n_users_ = n_users;
  m.n_items_ = n_items;
  const std::int64_t nnz = static_cast<std::int64_t>(coords.size());

  m.row_ptr_.assign(n_users + 1, 0);
  m.col_idx_.resize(nnz);
  for (std::int64_t k = 0; k < nnz; ++k) {
    m.row_ptr_[coords[k].first + 1]++;
    m.col_idx_[k] = static_cast<std::int32_t>(coords[k].second);
  }
  for (Index u = 0; u < n_users; ++u) m.row_ptr_[u + 1] += m.row_ptr_[u];

  // CSC from the sorted coordinate list; csc_perm_ maps back into CSR order.
  m.col_ptr_.assign(n_items + 1, 0);
  for (const auto& c : coords) m.col_ptr_[c.second + 1]++;
  for (Index i = 0; i < n_items; ++i) m.col_ptr_[i + 1] += m.col_ptr_[i];
  m.row_idx_.resize(nnz);
  m.csc_perm_.resize(nnz);
  std::vector<std::int64_t> fill(m.col_ptr_.begin(), m.col_ptr_.end() - 1);
  for (std::int64_t k = 0; k < nnz; ++k) {
    const std::int64_t p = fill[coords[k].second]++;
    m.row_idx_[p] = static_cast<std::int32_t>(coords[k].first);
    m.csc_perm_[p] = k;
  }
  return m;
}

std::vector<Coordinate> BinaryInteractionMatrix::coordinates() const {
  std::vector<Coordinate> out;
  out.reserve(static_cast<std::size_t>(nnz()));
  for (Index u = 0; u < n_users_; ++u) {
    for (std::int32_t i : row_items(u)) out.emplace_back(u, i);
  }
  return out;
}

BinaryInteractionMatrix BinaryInteractionMatrix::select_rows(
    std::span<const Index> users) const {
  std::vector<Coordinate> coords;
  for (std::size_t r = 0; r < users.size(); ++r) {
    for (std::int32_t i : row_items(users[r])) {
      coords.emplace_back(static_cast<std::int64_t>(r), i);
    }
  }
  return from_coordinates(static_cast<Index>(users.size()), n_items_,
                          std::move(coords));
}

DenseMatrix spmm(const BinaryInteractionMatrix& x, const DenseMatrix& d) {
  if (d.rows() != x.n_items()) {
    throw std::invalid_argument("spmm: X is " + std::to_string(x.n_users()) +
                                " x " + std::to_string(x.n_items()) +
                                " but D has " + std::to_string(d.rows()) +
                                " rows");
  }
  DenseMatrix out = DenseMatrix::Zero(x.n_users(), d.cols());
#pragma omp parallel for
  for (Index u = 0; u < x.n_users(); ++u) {
    for (std::int32_t i : x.row_items(u)) out.row(u) += d.row(i);
  }
  return out;
}

DenseMatrix spmm_t(const BinaryInteractionMatrix& x, const DenseMatrix& d) {
  if (d.rows() != x.n_users()) {
    throw std::invalid_argument("spmm_t: X^T is " +
                                std::to_string(x.n_items()) + " x " +
                                std::to_string(x.n_users()) + " but D has " +
                                std::to_string(d.rows()) + " rows");
  }
  DenseMatrix out = DenseMatrix::Zero(x.n_items(), d.cols());
#pragma omp parallel for
  for (Index i = 0; i < x.n_items(); ++i) {
    for (std::int32_t u : x.col_users(i)) out.row(i) += d.row(u);
  }
  return out;
}

SparsePattern sddmm(const BinaryInteractionMatrix& x, const DenseMatrix& a,
                    const DenseMatrix& bt) {
  if (a.rows() != x.n_users() || bt.rows() != x.n_items() ||
      a.cols() != bt.cols()) {
    throw std::invalid_argument("sddmm: dimension mismatch");
  }
  SparsePattern s(x, /*transposed=*/false);
#pragma omp parallel for
  for (Index u = 0; u < x.n_users(); ++u) {
    std::int64_t k = x.row_begin(u);
    for (std::int32_t i : x.row_items(u)) {
      s.values()[k++] = a.row(u).dot(bt.row(i));
    }
  }
  return s;
}

SparsePattern sddmm_transposed(const BinaryInteractionMatrix& x,
                               const DenseMatrix& a, const DenseMatrix& bt) {
  if (a.rows() != x.n_items() || bt.rows() != x.n_users() ||
      a.cols() != bt.cols()) {
    throw std::invalid_argument("sddmm_transposed: dimension mismatch");
  }
  SparsePattern s(x, /*transposed=*/true);
#pragma omp parallel for
  for (Index u = 0; u < x.n_users(); ++u) {
    std::int64_t k = x.row_begin(u);
    for (std::int32_t i : x.row_items(u)) {
      s.values()[k++] = a.row(i).dot(bt.row(u));
    }
  }
  return s;
}

DenseMatrix SparsePattern::times(const DenseMatrix& d) const {
  const auto& x = *base_;
  if (!transposed_) {
    if (d.rows() != x.n_items()) {
      throw std::invalid_argument("SparsePattern::times: dimension mismatch");
    }
    DenseMatrix out = DenseMatrix::Zero(x.n_users(), d.cols());
#pragma omp parallel for
    for (Index u = 0; u < x.n_users(); ++u) {
      std::int64_t k = x.row_begin(u);
      for (std::int32_t i : x.row_items(u)) {
        out.row(u) += values_[k++] * d.row(i);
      }
    }
    return out;
  }
  if (d.rows() != x.n_users()) {
    throw std::invalid_argument("SparsePattern::times: dimension mismatch");
  }
  DenseMatrix out = DenseMatrix::Zero(x.n_items(), d.cols());
#pragma omp parallel for
  for (Index i = 0; i < x.n_items(); ++i) {
    std::int64_t k = x.col_begin(i);
    for (std::int32_t u : x.col_users(i)) {
      out.row(i) += values_[x.csc_to_csr(k++)] * d.row(u);
    }
  }
  return out;
}

DenseMatrix SparsePattern::transpose_times(const DenseMatrix& d) const {
  const auto& x = *base_;
  if (!transposed_) {
    if (d.rows() != x.n_users()) {
      throw std::invalid_argument(
          "SparsePattern::transpose_times: dimension mismatch");
    }
    DenseMatrix out = DenseMatrix::Zero(x.n_items(), d.cols());
#pragma omp parallel for
    for (Index i = 0; i < x.n_items(); ++i) {
      std::int64_t k = x.col_begin(i);
      for (std::int32_t u : x.col_users(i)) {
        out.row(i) += values_[x.csc_to_csr(k++)] * d.row(u);
      }
    }
    return out;
  }
  if (d.rows() != x.n_items()) {
    throw std::invalid_argument(
        "SparsePattern::transpose_times: dimension mismatch");
  }
  DenseMatrix out = DenseMatrix::Zero(x.n_users(), d.cols());
#pragma omp parallel for
  for (Index u = 0; u < x.n_users(); ++u) {
    std::int64_t k = x.row_begin(u);
    for (std::int32_t i : x.row_items(u)) {
      out.row(u) += values_[k++] * d.row(i);
    }
  }
  return out;
}

DenseMatrix gram_dense(const BinaryInteractionMatrix& x) {
  DenseMatrix g = DenseMatrix::Zero(x.n_items(), x.n_items());
#pragma omp parallel for
  for (Index j = 0; j < x.n_items(); ++j) {
    for (std::int32_t u : x.col_users(j)) {
      for (std::int32_t i : x.row_items(u)) g(i, j) += 1.0;
    }
  }
  return g;
}

Vector gram_column(const BinaryInteractionMatrix& x, Index j) {
  Vector col = Vector::Zero(x.n_items());
  for (std::int32_t u : x.col_users(j)) {
    for (std::int32_t i : x.row_items(u)) col[i] += 1.0;
  }
  return col;
}

DenseMatrix to_dense(const BinaryInteractionMatrix& x) {
  DenseMatrix d = DenseMatrix::Zero(x.n_users(), x.n_items());
  for (Index u = 0; u < x.n_users(); ++u) {
    for (std::int32_t i : x.row_items(u)) d(u, i) = 1.0;
  }
  return d;
}

}  // namespace wmflab
