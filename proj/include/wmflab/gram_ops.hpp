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

#include <memory>
#include <stdexcept>

#include "wmflab/pcg.hpp"
#include "wmflab/sparse.hpp"

namespace wmflab {

// Implicit confidence weights W = (alpha - 1) X + 1, never materialized.
// alpha = 1 is the unweighted case.
struct WeightScheme {
  double alpha = 1.0;

  explicit WeightScheme(double a) : alpha(a) {
    if (!(a >= 1.0)) {
      throw std::invalid_argument("WeightScheme: alpha must be >= 1");
    }
  }
};

enum class RegKind { WeightDecay, Dropout, DataWeightDecay };

struct Regularizer {
  RegKind kind = RegKind::WeightDecay;
  double lambda = 0.0;

  Regularizer(RegKind k, double l) : kind(k), lambda(l) {
    if (l < 0.0) {
      throw std::invalid_argument("Regularizer: lambda must be >= 0");
    }
  }
};

// A preconditioner factorization failed (non-SPD block), typically a
// rank-deficient factor. Callers may fall back to the identity.
class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Full-rank operator H(B, lambda) = (I (x) X^T) diag(vec(W)) (I (x) X) + l I.
//
// The operator is block-diagonal over the columns of B: column j couples
// only with itself, through the weight column W[:, j]. Applies therefore
// take a column offset so that single columns or column blocks can be
// processed independently, and the dense |U| x |I| product W .* (XP) is
// never formed: each weighted term reduces to
//   X^T (X p_j) + (alpha - 1) X^T (X[:, j] .* (X p_j)) + lambda p_j.
// ---------------------------------------------------------------------------
class FullRankGramOp {
 public:
  FullRankGramOp(const BinaryInteractionMatrix& x, WeightScheme w,
                 double lambda);

  const BinaryInteractionMatrix& x() const { return *x_; }
  double alpha() const { return alpha_; }
  double lambda() const { return lambda_; }

  // H applied to a column block of B; P's columns are the global columns
  // [col0, col0 + P.cols()) of the full problem.
  DenseMatrix apply(const DenseMatrix& p, Index col0 = 0) const;

  // Single-column apply, y = H_j p where H_j = X^T diag(W[:,j]) X + l I.
  void apply_column(Index j, Eigen::Ref<const Vector> p,
                    Eigen::Ref<Vector> y) const;

  // LinearOperator view of column j's n_items x n_items block.
  class ColumnOp final : public LinearOperator {
   public:
    ColumnOp(const FullRankGramOp& op, Index j) : op_(&op), j_(j) {}
    Index dim() const override { return op_->x().n_items(); }
    void apply(Eigen::Ref<const Vector> in,
               Eigen::Ref<Vector> out) const override {
      op_->apply_column(j_, in, out);
    }

   private:
    const FullRankGramOp* op_;
    Index j_;
  };
  ColumnOp column_operator(Index j) const { return ColumnOp(*this, j); }

 private:
  const BinaryInteractionMatrix* x_;
  double alpha_;
  double lambda_;
};

// ---------------------------------------------------------------------------
// Factor operator for the U side,
//   core   = (V (x) X)^T diag(vec(W)) (V (x) X)
//   H_D(U, l) = core + l (V^T V (x) I)        (Dropout)
//   H_W(U, l) = core + l I                    (WeightDecay)
//   H    (U, l) = core + l (I (x) X^T X)      (DataWeightDecay)
// applied in matrix form as
//   X^T X P (V^T V) + (alpha-1) X^T S V + reg(P),  S = sddmm(X, XP, V).
// ---------------------------------------------------------------------------
class FactorGramOpU final : public LinearOperator {
 public:
  FactorGramOpU(const BinaryInteractionMatrix& x, const DenseMatrix& v,
                WeightScheme w, Regularizer reg);

  DenseMatrix apply(const DenseMatrix& p) const;

  Index dim() const override { return x_->n_items() * v_->cols(); }
  void apply(Eigen::Ref<const Vector> in,
             Eigen::Ref<Vector> out) const override;

  const BinaryInteractionMatrix& x() const { return *x_; }
  const DenseMatrix& v() const { return *v_; }
  const DenseMatrix& vtv() const { return vtv_; }
  double alpha() const { return alpha_; }
  const Regularizer& reg() const { return reg_; }

 private:
  const BinaryInteractionMatrix* x_;
  const DenseMatrix* v_;
  DenseMatrix vtv_;  // d x d
  double alpha_;
  Regularizer reg_;
};

// ---------------------------------------------------------------------------
// Factor operator for the V side,
//   core   = (XU (x) I)^T diag(vec(W^T)) (XU (x) I)
//   H_D(V, l) = core + l (U^T U (x) I)        (Dropout)
//   H_W(V, l) = core + l I                    (WeightDecay and the V side
//                                              of DataWeightDecay)
// applied in matrix form as
//   P (XU)^T (XU) + (alpha-1) S^T (XU) + reg(P),  S = sddmm(X, XU, P).
// ---------------------------------------------------------------------------
class FactorGramOpV final : public LinearOperator {
 public:
  FactorGramOpV(const BinaryInteractionMatrix& x, const DenseMatrix& u,
                WeightScheme w, Regularizer reg);

  DenseMatrix apply(const DenseMatrix& p) const;

  Index dim() const override { return x_->n_items() * u_->cols(); }
  void apply(Eigen::Ref<const Vector> in,
             Eigen::Ref<Vector> out) const override;

  const BinaryInteractionMatrix& x() const { return *x_; }
  const DenseMatrix& u() const { return *u_; }
  const DenseMatrix& xu() const { return xu_; }
  double alpha() const { return alpha_; }
  const Regularizer& reg() const { return reg_; }

 private:
  const BinaryInteractionMatrix* x_;
  const DenseMatrix* u_;
  DenseMatrix xu_;    // n_users x d
  DenseMatrix xutxu_; // d x d, (XU)^T XU
  DenseMatrix utu_;   // d x d
  double alpha_;
  Regularizer reg_;
};

// ---------------------------------------------------------------------------
// Right-hand sides. X is binary, so W .* X = alpha X and the weighted
// right-hand sides collapse to alpha-scaled unweighted ones.
// ---------------------------------------------------------------------------

// X^T (W .* X) = alpha X^T X, dense.
DenseMatrix rhs_full_rank(const BinaryInteractionMatrix& x, WeightScheme w);
// Column j of the above without forming the full Gram.
Vector rhs_full_rank_column(const BinaryInteractionMatrix& x, WeightScheme w,
                            Index j);
// Column j of X^T (W .* X'), the generalized target form; target_col is
// column j of a dense X'.
Vector rhs_general_column(const BinaryInteractionMatrix& x, WeightScheme w,
                          Eigen::Ref<const Vector> target_col, Index j);

// X^T (W .* X) V = alpha X^T X V.
DenseMatrix rhs_factor_u(const BinaryInteractionMatrix& x, const DenseMatrix& v,
                         WeightScheme w);
// (W^T .* X^T) X U = alpha X^T X U.
DenseMatrix rhs_factor_v(const BinaryInteractionMatrix& x, const DenseMatrix& u,
                         WeightScheme w);

// ---------------------------------------------------------------------------
// W = 1 preconditioners. All Kronecker-form inverses are held as Cholesky
// factors of the small blocks and applied by triangular solves.
// ---------------------------------------------------------------------------

// M^-1 = I (x) (X^T X + lambda I)^-1. dim() is n_items: the same block
// preconditions every column system of the full-rank solve.
class FullRankPreconditioner final : public LinearOperator {
 public:
  FullRankPreconditioner(const BinaryInteractionMatrix& x, double lambda);
  Index dim() const override { return llt_.rows(); }
  void apply(Eigen::Ref<const Vector> in,
             Eigen::Ref<Vector> out) const override;
  DenseMatrix solve(const DenseMatrix& p) const { return llt_.solve(p); }

 private:
  Eigen::LLT<DenseMatrix> llt_;
};

// U side: vec(P) -> vec(A^-1 P (V^T V)^-1) where A is X^T X + shift I.
// Dropout uses shift = lambda (the exact W = 1 inverse); WeightDecay and
// DataWeightDecay use the Kronecker surrogate shift = lambda / mean(diag V^T V).
class FactorUPreconditioner final : public LinearOperator {
 public:
  explicit FactorUPreconditioner(const FactorGramOpU& op);
  Index dim() const override { return rows_ * cols_; }
  void apply(Eigen::Ref<const Vector> in,
             Eigen::Ref<Vector> out) const override;

 private:
  Index rows_, cols_;
  Eigen::LLT<DenseMatrix> llt_items_;  // n_items block
  Eigen::LLT<DenseMatrix> llt_vtv_;    // d block
};

// V side: vec(P) -> vec(P K^-1) with K = (XU)^T XU + lambda U^T U (Dropout)
// or K = (XU)^T XU + lambda I (WeightDecay / DataWeightDecay).
class FactorVPreconditioner final : public LinearOperator {
 public:
  explicit FactorVPreconditioner(const FactorGramOpV& op);
  Index dim() const override { return rows_ * cols_; }
  void apply(Eigen::Ref<const Vector> in,
             Eigen::Ref<Vector> out) const override;

 private:
  Index rows_, cols_;
  Eigen::LLT<DenseMatrix> llt_k_;
};

std::unique_ptr<LinearOperator> make_preconditioner(const FullRankGramOp& op);
std::unique_ptr<LinearOperator> make_preconditioner(const FactorGramOpU& op);
std::unique_ptr<LinearOperator> make_preconditioner(const FactorGramOpV& op);

}  // namespace wmflab
