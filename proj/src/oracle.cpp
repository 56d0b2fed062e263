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
#include "wmflab/oracle.hpp"

#include <stdexcept>

#include "wmflab/trainers.hpp"

namespace wmflab::oracle {

namespace {

void check_size(const DenseProblem& p) {
  if (p.x.rows() * p.x.cols() > 10000) {
    throw std::invalid_argument("oracle: instance exceeds the desk-scale bound");
  }
  if (p.w.rows() != p.x.rows() || p.w.cols() != p.x.cols()) {
    throw std::invalid_argument("oracle: W must match X's shape");
  }
}

DenseMatrix identity(Index n) { return DenseMatrix::Identity(n, n); }

Vector weight_vec(const DenseMatrix& w, bool transposed) {
  const DenseMatrix wt = transposed ? DenseMatrix(w.transpose()) : w;
  return vec_flatten(wt);
}

}  // namespace

DenseProblem DenseProblem::from_alpha(const BinaryInteractionMatrix& x,
                                      ModelKind kind, double alpha,
                                      double lambda) {
  DenseProblem p;
  p.kind = kind;
  p.x = to_dense(x);
  p.w = (alpha - 1.0) * p.x.array() + 1.0;
  p.lambda = lambda;
  return p;
}

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

DenseMatrix dense_gram_assemble(const DenseProblem& p, Side side) {
  check_size(p);
  const Index n_items = p.x.cols();
  switch (side) {
    case Side::B: {
      const DenseMatrix k = kron(identity(n_items), p.x);
      DenseMatrix h =
          k.transpose() * weight_vec(p.w, false).asDiagonal() * k;
      h.diagonal().array() += p.lambda;
      return h;
    }
    case Side::U: {
      const DenseMatrix k = kron(p.v, p.x);
      DenseMatrix h =
          k.transpose() * weight_vec(p.w, false).asDiagonal() * k;
      switch (model_reg_kind(p.kind, /*u_side=*/true)) {
        case RegKind::WeightDecay:
          h.diagonal().array() += p.lambda;
          break;
        case RegKind::Dropout:
          h.noalias() +=
              p.lambda * kron(p.v.transpose() * p.v, identity(n_items));
          break;
        case RegKind::DataWeightDecay:
          h.noalias() += p.lambda *
                         kron(identity(p.v.cols()), p.x.transpose() * p.x);
          break;
      }
      return h;
    }
    case Side::V: {
      const DenseMatrix k = kron(p.x * p.u, identity(n_items));
      DenseMatrix h =
          k.transpose() * weight_vec(p.w, true).asDiagonal() * k;
      if (model_reg_kind(p.kind, /*u_side=*/false) == RegKind::Dropout) {
        h.noalias() +=
            p.lambda * kron(p.u.transpose() * p.u, identity(n_items));
      } else {
        h.diagonal().array() += p.lambda;
      }
      return h;
    }
  }
  throw std::logic_error("unreachable");
}

DenseMatrix dense_rhs(const DenseProblem& p, Side side) {
  check_size(p);
  switch (side) {
    case Side::B:
      return p.x.transpose() * p.w.cwiseProduct(p.x);
    case Side::U:
      return p.x.transpose() * p.w.cwiseProduct(p.x) * p.v;
    case Side::V:
      return p.w.transpose().cwiseProduct(p.x.transpose()) * (p.x * p.u);
  }
  throw std::logic_error("unreachable");
}

DenseMatrix dense_closed_form(const DenseProblem& p, Side side) {
  const DenseMatrix h = dense_gram_assemble(p, side);
  const DenseMatrix rhs = dense_rhs(p, side);
  const Eigen::FullPivLU<DenseMatrix> lu(h);
  if (!lu.isInvertible()) {
    throw std::runtime_error("oracle: assembled Gram matrix is singular");
  }
  const Vector sol = lu.solve(vec_flatten(rhs));
  return unvec(sol, rhs.rows(), rhs.cols());
}

DenseMatrix dense_wmf_solve(const DenseProblem& p, bool user_side) {
  check_size(p);
  const DenseMatrix& factor = user_side ? p.v : p.u;
  const Index n_rows = user_side ? p.x.rows() : p.x.cols();
  const Index d = factor.cols();
  DenseMatrix out(n_rows, d);
  for (Index r = 0; r < n_rows; ++r) {
    const Vector wr = user_side ? p.w.row(r).transpose() : p.w.col(r);
    const Vector xr = user_side ? p.x.row(r).transpose() : p.x.col(r);
    DenseMatrix m = factor.transpose() * wr.asDiagonal() * factor;
    m.diagonal().array() += p.lambda;
    const Vector rhs = factor.transpose() * wr.cwiseProduct(xr);
    out.row(r) = Eigen::LDLT<DenseMatrix>(m).solve(rhs);
  }
  return out;
}

namespace {

DenseMatrix prediction(const DenseProblem& p, const DenseMatrix& first,
                       const DenseMatrix* second) {
  switch (p.kind) {
    case ModelKind::FullRank:
      return p.x * first;
    case ModelKind::Wmf:
      return first * second->transpose();
    default:
      return p.x * first * second->transpose();
  }
}

double regularizer(const DenseProblem& p, const DenseMatrix& first,
                   const DenseMatrix* second) {
  switch (p.kind) {
    case ModelKind::FullRank:
      return p.lambda * first.squaredNorm();
    case ModelKind::Wmf:
    case ModelKind::AwmfWeightDecay:
      return p.lambda * (first.squaredNorm() + second->squaredNorm());
    case ModelKind::AwmfDropout:
      return p.lambda * (first * second->transpose()).squaredNorm();
    case ModelKind::AwmfDataWeightDecay:
      return p.lambda *
             ((p.x * first).squaredNorm() + second->squaredNorm());
  }
  throw std::logic_error("unreachable");
}

}  // namespace

double dense_objective(const DenseProblem& p, const DenseMatrix& first,
                       const DenseMatrix* second) {
  check_size(p);
  const DenseMatrix r = prediction(p, first, second) - p.x;
  return (p.w.array() * r.array().square()).sum() +
         regularizer(p, first, second);
}

GradientPair dense_objective_and_gradient(const DenseProblem& p,
                                          const DenseMatrix& first,
                                          const DenseMatrix* second) {
  check_size(p);
  GradientPair g;
  const DenseMatrix r = prediction(p, first, second) - p.x;
  const DenseMatrix wr = p.w.cwiseProduct(r);
  g.value = (p.w.array() * r.array().square()).sum() +
            regularizer(p, first, second);
  switch (p.kind) {
    case ModelKind::FullRank:
      g.first = 2.0 * p.x.transpose() * wr + 2.0 * p.lambda * first;
      break;
    case ModelKind::Wmf:
      g.first = 2.0 * wr * *second + 2.0 * p.lambda * first;
      g.second = 2.0 * wr.transpose() * first + 2.0 * p.lambda * *second;
      break;
    case ModelKind::AwmfWeightDecay:
      g.first = 2.0 * p.x.transpose() * wr * *second + 2.0 * p.lambda * first;
      g.second =
          2.0 * wr.transpose() * (p.x * first) + 2.0 * p.lambda * *second;
      break;
    case ModelKind::AwmfDropout:
      g.first = 2.0 * p.x.transpose() * wr * *second +
                2.0 * p.lambda * first * (second->transpose() * *second);
      g.second = 2.0 * wr.transpose() * (p.x * first) +
                 2.0 * p.lambda * *second * (first.transpose() * first);
      break;
    case ModelKind::AwmfDataWeightDecay:
      g.first = 2.0 * p.x.transpose() * wr * *second +
                2.0 * p.lambda * p.x.transpose() * (p.x * first);
      g.second =
          2.0 * wr.transpose() * (p.x * first) + 2.0 * p.lambda * *second;
      break;
  }
  return g;
}

DenseMatrix finite_difference_gradient(const DenseProblem& p,
                                       const DenseMatrix& first,
                                       const DenseMatrix* second,
                                       bool wrt_first, double step) {
  check_size(p);
  DenseMatrix f = first;
  DenseMatrix s = second != nullptr ? *second : DenseMatrix();
  DenseMatrix& block = wrt_first ? f : s;
  const DenseMatrix* second_ptr = second != nullptr ? &s : nullptr;
  DenseMatrix grad(block.rows(), block.cols());
  for (Index j = 0; j < block.cols(); ++j) {
    for (Index i = 0; i < block.rows(); ++i) {
      const double saved = block(i, j);
      block(i, j) = saved + step;
      const double up = dense_objective(p, f, second_ptr);
      block(i, j) = saved - step;
      const double down = dense_objective(p, f, second_ptr);
      block(i, j) = saved;
      grad(i, j) = (up - down) / (2.0 * step);
    }
  }
  return grad;
}

}  // namespace wmflab::oracle
