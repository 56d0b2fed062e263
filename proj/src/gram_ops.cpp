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
#include "wmflab/gram_ops.hpp"

namespace wmflab {

FullRankGramOp::FullRankGramOp(const BinaryInteractionMatrix& x,
                               WeightScheme w, double lambda)
    : x_(&x), alpha_(w.alpha), lambda_(lambda) {
  if (lambda < 0.0) {
    throw std::invalid_argument("FullRankGramOp: lambda must be >= 0");
  }
}

void FullRankGramOp::apply_column(Index j, Eigen::Ref<const Vector> p,
                                  Eigen::Ref<Vector> y) const {
  const auto& x = *x_;
  if (p.size() != x.n_items() || y.size() != x.n_items()) {
    throw std::invalid_argument("FullRankGramOp: column length mismatch");
  }
  // y_u = (X p)_u for stored users, accumulated to X^T X p; the weighted
  // correction visits only column j's users.
  Vector xp = Vector::Zero(x.n_users());
  for (Index u = 0; u < x.n_users(); ++u) {
    double s = 0.0;
    for (std::int32_t i : x.row_items(u)) s += p[i];
    xp[u] = s;
  }
  y.setZero();
  for (Index i = 0; i < x.n_items(); ++i) {
    double s = 0.0;
    for (std::int32_t u : x.col_users(i)) s += xp[u];
    y[i] = s;
  }
  if (alpha_ > 1.0) {
    const double scale = alpha_ - 1.0;
    for (std::int32_t u : x.col_users(j)) {
      const double c = scale * xp[u];
      for (std::int32_t i : x.row_items(u)) y[i] += c;
    }
  }
  y += lambda_ * p;
}

DenseMatrix FullRankGramOp::apply(const DenseMatrix& p, Index col0) const {
  const auto& x = *x_;
  if (p.rows() != x.n_items() || col0 < 0 ||
      col0 + p.cols() > x.n_items()) {
    throw std::invalid_argument("FullRankGramOp: block shape mismatch");
  }
  DenseMatrix out(p.rows(), p.cols());
#pragma omp parallel for
  for (Index c = 0; c < p.cols(); ++c) {
    apply_column(col0 + c, p.col(c), out.col(c));
  }
  return out;
}

FactorGramOpU::FactorGramOpU(const BinaryInteractionMatrix& x,
                             const DenseMatrix& v, WeightScheme w,
                             Regularizer reg)
    : x_(&x), v_(&v), vtv_(v.transpose() * v), alpha_(w.alpha), reg_(reg) {
  if (v.rows() != x.n_items()) {
    throw std::invalid_argument("FactorGramOpU: V must have n_items rows");
  }
}

DenseMatrix FactorGramOpU::apply(const DenseMatrix& p) const {
  const auto& x = *x_;
  const auto& v = *v_;
  if (p.rows() != x.n_items() || p.cols() != v.cols()) {
    throw std::invalid_argument("FactorGramOpU: P must conform to U's shape");
  }
  const DenseMatrix xp = spmm(x, p);          // n_users x d
  const DenseMatrix xtxp = spmm_t(x, xp);     // X^T X P
  DenseMatrix out = xtxp * vtv_;
  if (alpha_ > 1.0) {
    const SparsePattern s = sddmm(x, xp, v);  // X .* (XP V^T)
    out.noalias() += (alpha_ - 1.0) * spmm_t(x, s.times(v));
  }
  switch (reg_.kind) {
    case RegKind::Dropout:
      out.noalias() += reg_.lambda * (p * vtv_);
      break;
    case RegKind::WeightDecay:
      out.noalias() += reg_.lambda * p;
      break;
    case RegKind::DataWeightDecay:
      out.noalias() += reg_.lambda * xtxp;
      break;
  }
  return out;
}

void FactorGramOpU::apply(Eigen::Ref<const Vector> in,
                          Eigen::Ref<Vector> out) const {
  const Index rows = x_->n_items(), cols = v_->cols();
  Eigen::Map<const DenseMatrix> p(in.data(), rows, cols);
  Eigen::Map<DenseMatrix> o(out.data(), rows, cols);
  o = apply(DenseMatrix(p));
}

FactorGramOpV::FactorGramOpV(const BinaryInteractionMatrix& x,
                             const DenseMatrix& u, WeightScheme w,
                             Regularizer reg)
    : x_(&x),
      u_(&u),
      xu_(spmm(x, u)),
      xutxu_(xu_.transpose() * xu_),
      utu_(u.transpose() * u),
      alpha_(w.alpha),
      reg_(reg) {
  if (u.rows() != x.n_items()) {
    throw std::invalid_argument("FactorGramOpV: U must have n_items rows");
  }
}

DenseMatrix FactorGramOpV::apply(const DenseMatrix& p) const {
  const auto& x = *x_;
  if (p.rows() != x.n_items() || p.cols() != u_->cols()) {
    throw std::invalid_argument("FactorGramOpV: P must conform to V's shape");
  }
  DenseMatrix out = p * xutxu_;
  if (alpha_ > 1.0) {
    const SparsePattern s = sddmm(x, xu_, p);  // X .* (XU P^T)
    out.noalias() += (alpha_ - 1.0) * s.transpose_times(xu_);
  }
  switch (reg_.kind) {
    case RegKind::Dropout:
      out.noalias() += reg_.lambda * (p * utu_);
      break;
    case RegKind::WeightDecay:
    case RegKind::DataWeightDecay:
      out.noalias() += reg_.lambda * p;
      break;
  }
  return out;
}

void FactorGramOpV::apply(Eigen::Ref<const Vector> in,
                          Eigen::Ref<Vector> out) const {
  const Index rows = x_->n_items(), cols = u_->cols();
  Eigen::Map<const DenseMatrix> p(in.data(), rows, cols);
  Eigen::Map<DenseMatrix> o(out.data(), rows, cols);
  o = apply(DenseMatrix(p));
}

DenseMatrix rhs_full_rank(const BinaryInteractionMatrix& x, WeightScheme w) {
  return w.alpha * gram_dense(x);
}

Vector rhs_full_rank_column(const BinaryInteractionMatrix& x, WeightScheme w,
                            Index j) {
  return w.alpha * gram_column(x, j);
}

Vector rhs_general_column(const BinaryInteractionMatrix& x, WeightScheme w,
                          Eigen::Ref<const Vector> target_col, Index j) {
  if (target_col.size() != x.n_users()) {
    throw std::invalid_argument("rhs_general_column: target length mismatch");
  }
  // X^T (W[:,j] .* x'_j) = X^T x'_j + (alpha - 1) X^T (X[:,j] .* x'_j).
  Vector y = Vector::Zero(x.n_items());
  for (Index i = 0; i < x.n_items(); ++i) {
    double s = 0.0;
    for (std::int32_t u : x.col_users(i)) s += target_col[u];
    y[i] = s;
  }
  if (w.alpha > 1.0) {
    const double scale = w.alpha - 1.0;
    for (std::int32_t u : x.col_users(j)) {
      const double c = scale * target_col[u];
      for (std::int32_t i : x.row_items(u)) y[i] += c;
    }
  }
  return y;
}

DenseMatrix rhs_factor_u(const BinaryInteractionMatrix& x, const DenseMatrix& v,
                         WeightScheme w) {
  return w.alpha * spmm_t(x, spmm(x, v));
}

DenseMatrix rhs_factor_v(const BinaryInteractionMatrix& x, const DenseMatrix& u,
                         WeightScheme w) {
  return w.alpha * spmm_t(x, spmm(x, u));
}

namespace {

Eigen::LLT<DenseMatrix> factorize_or_throw(DenseMatrix m, const char* what) {
  Eigen::LLT<DenseMatrix> llt(std::move(m));
  if (llt.info() != Eigen::Success) {
    throw FactorizationError(std::string(what) +
                             ": block is not positive definite "
                             "(rank-deficient factor?)");
  }
  return llt;
}

}  // namespace

FullRankPreconditioner::FullRankPreconditioner(
    const BinaryInteractionMatrix& x, double lambda) {
  DenseMatrix g = gram_dense(x);
  g.diagonal().array() += lambda;
  llt_ = factorize_or_throw(std::move(g), "FullRankPreconditioner");
}

void FullRankPreconditioner::apply(Eigen::Ref<const Vector> in,
                                   Eigen::Ref<Vector> out) const {
  out = llt_.solve(in);
}

FactorUPreconditioner::FactorUPreconditioner(const FactorGramOpU& op)
    : rows_(op.x().n_items()), cols_(op.v().cols()) {
  double shift = op.reg().lambda;
  if (op.reg().kind != RegKind::Dropout) {
    const double mean_diag = op.vtv().diagonal().mean();
    if (!(mean_diag > 0.0)) {
      throw FactorizationError("FactorUPreconditioner: V^T V has zero diagonal");
    }
    shift = op.reg().lambda / mean_diag;
  }
  DenseMatrix g = gram_dense(op.x());
  g.diagonal().array() += shift;
  llt_items_ = factorize_or_throw(std::move(g), "FactorUPreconditioner");
  llt_vtv_ = factorize_or_throw(op.vtv(), "FactorUPreconditioner");
}

void FactorUPreconditioner::apply(Eigen::Ref<const Vector> in,
                                  Eigen::Ref<Vector> out) const {
  Eigen::Map<const DenseMatrix> p(in.data(), rows_, cols_);
  Eigen::Map<DenseMatrix> o(out.data(), rows_, cols_);
  const DenseMatrix left = llt_items_.solve(p);
  o = llt_vtv_.solve(left.transpose()).transpose();
}

FactorVPreconditioner::FactorVPreconditioner(const FactorGramOpV& op)
    : rows_(op.x().n_items()), cols_(op.u().cols()) {
  DenseMatrix k = op.xu().transpose() * op.xu();
  if (op.reg().kind == RegKind::Dropout) {
    k.noalias() += op.reg().lambda * (op.u().transpose() * op.u());
  } else {
    k.diagonal().array() += op.reg().lambda;
  }
  llt_k_ = factorize_or_throw(std::move(k), "FactorVPreconditioner");
}

void FactorVPreconditioner::apply(Eigen::Ref<const Vector> in,
                                  Eigen::Ref<Vector> out) const {
  Eigen::Map<const DenseMatrix> p(in.data(), rows_, cols_);
  Eigen::Map<DenseMatrix> o(out.data(), rows_, cols_);
  o = llt_k_.solve(p.transpose()).transpose();
}

std::unique_ptr<LinearOperator> make_preconditioner(const FullRankGramOp& op) {
  return std::make_unique<FullRankPreconditioner>(op.x(), op.lambda());
}

std::unique_ptr<LinearOperator> make_preconditioner(const FactorGramOpU& op) {
  return std::make_unique<FactorUPreconditioner>(op);
}

std::unique_ptr<LinearOperator> make_preconditioner(const FactorGramOpV& op) {
  return std::make_unique<FactorVPreconditioner>(op);
}

}  // namespace wmflab
