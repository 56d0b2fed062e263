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
#include <span>
#include <utility>
#include <vector>

#include "wmflab/dense.hpp"

namespace wmflab {

using Coordinate = std::pair<std::int64_t, std::int64_t>;  // (user, item)

// Sparse binary user-item matrix with both row-major (CSR) and column-major
// (CSC) index structures over the same coordinate set. Every stored value
// is exactly 1, so only indices are kept. Immutable after construction and
// safe to share across threads.
//
// Reduction order: all kernels below accumulate each output element
// sequentially in stored index order, so results are bitwise reproducible
// and independent of the thread count.
class BinaryInteractionMatrix {
 public:
  // Builds from a coordinate list. Duplicates are collapsed; out-of-bounds
  // coordinates throw.
  static BinaryInteractionMatrix from_coordinates(
      Index n_users, Index n_items, std::vector<Coordinate> coords);

  Index n_users() const { return n_users_; }
  Index n_items() const { return n_items_; }
  Index nnz() const { return static_cast<Index>(col_idx_.size()); }

  // Items of user u, ascending. CSR order.
  std::span<const std::int32_t> row_items(Index u) const {
    return {col_idx_.data() + row_ptr_[u],
            static_cast<std::size_t>(row_ptr_[u + 1] - row_ptr_[u])};
  }
  // Users of item i, ascending. CSC order.
  std::span<const std::int32_t> col_users(Index i) const {
    return {row_idx_.data() + col_ptr_[i],
            static_cast<std::size_t>(col_ptr_[i + 1] - col_ptr_[i])};
  }

  std::int64_t row_begin(Index u) const { return row_ptr_[u]; }
  std::int64_t col_begin(Index i) const { return col_ptr_[i]; }
  // Position in CSR storage of the k-th CSC entry (k indexes col_ptr space).
  std::int64_t csc_to_csr(std::int64_t k) const { return csc_perm_[k]; }

  // Row-wise extraction of the coordinate list, ascending (user, item).
  std::vector<Coordinate> coordinates() const;

  // Restrict to a subset of rows (new row r = users[r]); items unchanged.
  BinaryInteractionMatrix select_rows(std::span<const Index> users) const;

 private:
  BinaryInteractionMatrix() = default;

  Index n_users_ = 0;
  Index n_items_ = 0;
  std::vector<std::int64_t> row_ptr_;   // size n_users + 1
  std::vector<std::int32_t> col_idx_;   // CSR item indices
  std::vector<std::int64_t> col_ptr_;   // size n_items + 1
  std::vector<std::int32_t> row_idx_;   // CSC user indices
  std::vector<std::int64_t> csc_perm_;  // CSC entry -> CSR position
};

// One real value per stored coordinate of a BinaryInteractionMatrix (or of
// its transpose). Values are kept in the base matrix's CSR order.
class SparsePattern {
 public:
  SparsePattern(const BinaryInteractionMatrix& base, bool transposed)
      : base_(&base),
        transposed_(transposed),
        values_(Vector::Zero(base.nnz())) {}

  const BinaryInteractionMatrix& base() const { return *base_; }
  bool transposed() const { return transposed_; }
  Vector& values() { return values_; }
  const Vector& values() const { return values_; }

  double value_sum() const { return values_.sum(); }

  // S * D. For the non-transposed orientation S is n_users x n_items;
  // transposed, n_items x n_users.
  DenseMatrix times(const DenseMatrix& d) const;
  // S^T * D.
  DenseMatrix transpose_times(const DenseMatrix& d) const;

 private:
  const BinaryInteractionMatrix* base_;
  bool transposed_;
  Vector values_;
};

// X * D (D has X.n_items rows).
DenseMatrix spmm(const BinaryInteractionMatrix& x, const DenseMatrix& d);
// X^T * D (D has X.n_users rows).
DenseMatrix spmm_t(const BinaryInteractionMatrix& x, const DenseMatrix& d);

// Sampled dense-dense product: value at stored (u, i) is
// <row u of A, row i of Bt>. A is n_users x c, Bt is n_items x c.
SparsePattern sddmm(const BinaryInteractionMatrix& x, const DenseMatrix& a,
                    const DenseMatrix& bt);
// Transpose-pattern variant: values live on X^T, value at (i, u) is
// <row i of A, row u of Bt>. A is n_items x c, Bt is n_users x c.
SparsePattern sddmm_transposed(const BinaryInteractionMatrix& x,
                               const DenseMatrix& a, const DenseMatrix& bt);

// Dense X^T X (n_items x n_items). Intended for preconditioners and
// unweighted fast paths; the caller is responsible for it fitting in memory.
DenseMatrix gram_dense(const BinaryInteractionMatrix& x);

// Column j of X^T X without forming the full Gram.
Vector gram_column(const BinaryInteractionMatrix& x, Index j);

// Dense copy of X, test- and oracle-sized uses only.
DenseMatrix to_dense(const BinaryInteractionMatrix& x);

}  // namespace wmflab
