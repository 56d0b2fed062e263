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

#include "wmflab/gram_ops.hpp"
#include "wmflab/models.hpp"
#include "wmflab/sparse.hpp"

// Brute-force reference implementations for verification: explicit
// Kronecker Gram assembly, dense closed-form solves, dense objectives and
// gradients. Desk-scale by construction; every entry point enforces
// n_users * n_items <= 10^4 and must never become a production path.
namespace wmflab::oracle {

struct DenseProblem {
  ModelKind kind = ModelKind::FullRank;
  DenseMatrix x;  // materialized X (binary in the standard setting)
  DenseMatrix w;  // positive weights, same shape as x
  double lambda = 0.0;
  DenseMatrix u;  // fixed factor for side V and for objectives
  DenseMatrix v;  // fixed factor for side U and for objectives

  // Standard instance: W = (alpha - 1) X + 1 over a real interaction matrix.
  static DenseProblem from_alpha(const BinaryInteractionMatrix& x,
                                 ModelKind kind, double alpha, double lambda);
};

enum class Side { B, U, V };

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b);

// Full SPD system matrix for the requested side: the Kronecker factors,
// the diagonal weight (vec(W) for sides B/U, vec(W^T) for side V) and the
// regularizer block implied by the problem's model kind.
DenseMatrix dense_gram_assemble(const DenseProblem& p, Side side);

// Densely computed right-hand side for the requested side.
DenseMatrix dense_rhs(const DenseProblem& p, Side side);

// Direct solve of the assembled system; returns the un-vectorized solution.
// Throws on singular systems.
DenseMatrix dense_closed_form(const DenseProblem& p, Side side);

// Row-wise dense ridge solves of the WMF sub-problems. user_side solves
// every user row against p.v; otherwise every item row against p.u.
DenseMatrix dense_wmf_solve(const DenseProblem& p, bool user_side);

// Objective of the problem's model kind at (first, second); `second` is
// ignored for FullRank.
double dense_objective(const DenseProblem& p, const DenseMatrix& first,
                       const DenseMatrix* second);

struct GradientPair {
  double value = 0.0;
  DenseMatrix first;   // gradient w.r.t. U (or B)
  DenseMatrix second;  // gradient w.r.t. V (empty for FullRank)
};

GradientPair dense_objective_and_gradient(const DenseProblem& p,
                                          const DenseMatrix& first,
                                          const DenseMatrix* second);

// Central finite differences (default step 1e-5) of the dense objective
// with respect to one block.
DenseMatrix finite_difference_gradient(const DenseProblem& p,
                                       const DenseMatrix& first,
                                       const DenseMatrix* second,
                                       bool wrt_first, double step = 1e-5);

}  // namespace wmflab::oracle
