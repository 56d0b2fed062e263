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

#include <string>
#include <vector>

#include "wmflab/gram_ops.hpp"
#include "wmflab/models.hpp"
#include "wmflab/pcg.hpp"
#include "wmflab/sparse.hpp"

namespace wmflab {

struct TrainConfig {
  int n_alternations = 20;
  // Stop alternating once the relative objective decrease falls below this.
  double objective_rel_stop = 1e-4;
  // solver.tolerance is interpreted as a RELATIVE residual tolerance here;
  // each sub-solve passes eps = tolerance * ||b||_2 to the solver.
  SolverConfig solver{.tolerance = 1e-6, .max_iter = 0,
                      .record_history = false};
  std::uint64_t init_seed = 0;
  double init_scale = 0.1;
  bool use_preconditioner = true;
};

struct TrainStats {
  std::vector<double> objective_history;  // value after each alternation
  std::int64_t total_pcg_iterations = 0;
  int alternations_run = 0;
  bool preconditioner_fallback = false;
  std::vector<std::string> warnings;
  // Per-column final residuals of full-rank columns that missed tolerance.
  std::vector<std::pair<Index, double>> unconverged_columns;
};

// Full-rank solve H(B, lambda) vec(B) = vec(alpha X^T X), one independent
// n_items-sized PCG system per column of B. alpha = 1 takes a direct
// factorization fast path. `target` optionally replaces X as the
// reconstruction target (a dense X' with n_users rows), generalizing the
// right-hand side to X^T (W .* X').
FullRankModel train_full_rank(const BinaryInteractionMatrix& x, double alpha,
                              double lambda, const TrainConfig& cfg,
                              TrainStats* stats = nullptr,
                              const DenseMatrix* target = nullptr);

// Alternating minimization for the three AWMF variants. V starts Gaussian
// (stddev init_scale / sqrt(d)), U is solved first, and both PCG solves are
// warm-started from the previous alternation's iterate.
FactorModel train_awmf(const BinaryInteractionMatrix& x, ModelKind kind,
                       Index d, double alpha, double lambda,
                       const TrainConfig& cfg, TrainStats* stats = nullptr);

// Classic per-row alternating least squares for WMF.
FactorModel train_wmf(const BinaryInteractionMatrix& x, Index d, double alpha,
                      double lambda, const TrainConfig& cfg,
                      TrainStats* stats = nullptr);

// Dispatch on kind (d is ignored for FullRank).
Model train_model(const BinaryInteractionMatrix& x, ModelKind kind, Index d,
                  double alpha, double lambda, const TrainConfig& cfg,
                  TrainStats* stats = nullptr);

// Weighted objective of the model on X, computed without materializing the
// dense prediction matrix:
//   ||sqrt(W) .* (X - P)||_F^2
//     = ||P||^2 - 2 <X, P> + nnz + (alpha - 1) sum_nnz (1 - P_ui)^2
// plus the kind's regularizer.
double objective_value(const BinaryInteractionMatrix& x, const Model& model);

// Regularizer block a model kind implies for the U (or V) sub-problem.
RegKind model_reg_kind(ModelKind kind, bool u_side);

// One weighted ridge solve for a single user against an item set:
//   (V^T V + (alpha-1) V_S^T V_S + lambda I) u = alpha V_S^T 1.
// Shared by the WMF trainer and WMF fold-in scoring. vtv must equal V^T V.
Vector wmf_user_factor(const DenseMatrix& v, const DenseMatrix& vtv,
                       std::span<const std::int32_t> items, double alpha,
                       double lambda);

}  // namespace wmflab
