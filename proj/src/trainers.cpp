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
#include "wmflab/trainers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <utility>

#include "wmflab/rng.hpp"

namespace wmflab {

namespace {

void add_warning(TrainStats* stats, std::string msg) {
  if (stats != nullptr) stats->warnings.push_back(std::move(msg));
}

DenseMatrix gaussian_init(Index rows, Index cols, double scale,
                          std::uint64_t seed) {
  Rng rng(seed);
  DenseMatrix m(rows, cols);
  const double stddev = scale / std::sqrt(static_cast<double>(cols));
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = stddev * rng.gaussian();
  }
  return m;
}

double solve_eps(double rel_tol, double b_norm) {
  return std::max(rel_tol * b_norm, 1e-300);
}

}  // namespace

RegKind model_reg_kind(ModelKind kind, bool u_side) {
  switch (kind) {
    case ModelKind::AwmfDropout:
      return RegKind::Dropout;
    case ModelKind::AwmfDataWeightDecay:
      return u_side ? RegKind::DataWeightDecay : RegKind::WeightDecay;
    default:
      return RegKind::WeightDecay;
  }
}

FullRankModel train_full_rank(const BinaryInteractionMatrix& x, double alpha,
                              double lambda, const TrainConfig& cfg,
                              TrainStats* stats, const DenseMatrix* target) {
  const WeightScheme w(alpha);
  const Index n = x.n_items();
  if (target != nullptr &&
      (target->rows() != x.n_users() || target->cols() != n)) {
    throw std::invalid_argument("train_full_rank: target shape mismatch");
  }
  if (lambda == 0.0) {
    add_warning(stats, "lambda = 0: system may be singular");
  }

  FullRankModel model;
  model.n_users = x.n_users();
  model.alpha = alpha;
  model.lambda = lambda;

  if (alpha == 1.0) {
    // Unweighted normal equations in one factorization.
    DenseMatrix g = gram_dense(x);
    DenseMatrix rhs = target != nullptr ? spmm_t(x, *target) : g;
    g.diagonal().array() += lambda;
    Eigen::LDLT<DenseMatrix> ldlt(g);
    model.b = ldlt.solve(rhs);
    if (stats != nullptr) stats->alternations_run = 1;
    return model;
  }

  std::unique_ptr<LinearOperator> precond;
  if (cfg.use_preconditioner) {
    try {
      precond = std::make_unique<FullRankPreconditioner>(x, lambda);
    } catch (const FactorizationError& e) {
      add_warning(stats, std::string("preconditioner disabled: ") + e.what());
      if (stats != nullptr) stats->preconditioner_fallback = true;
    }
  }

  const FullRankGramOp op(x, w, lambda);
  model.b = DenseMatrix::Zero(n, n);
  std::vector<std::int64_t> iters(n, 0);
  std::vector<std::pair<Index, double>> missed;
  std::vector<std::string> nonspd;

#pragma omp parallel for schedule(dynamic)
  for (Index j = 0; j < n; ++j) {
    const Vector rhs = target != nullptr
                           ? rhs_general_column(x, w, target->col(j), j)
                           : rhs_full_rank_column(x, w, j);
    SolverConfig sc = cfg.solver;
    sc.tolerance = solve_eps(cfg.solver.tolerance, rhs.norm());
    const FullRankGramOp::ColumnOp col_op = op.column_operator(j);
    try {
      const SolveReport rep =
          pcg_solve(col_op, precond.get(), rhs, model.b.col(j), sc);
      iters[j] = rep.iterations_used;
      if (!rep.converged) {
#pragma omp critical
        missed.emplace_back(j, rep.final_residual_norm);
      }
    } catch (const NonSpdError& e) {
#pragma omp critical
      nonspd.push_back("column " + std::to_string(j) + ": " + e.what());
    }
  }

  if (stats != nullptr) {
    for (std::int64_t it : iters) stats->total_pcg_iterations += it;
    std::sort(missed.begin(), missed.end());
    stats->unconverged_columns = std::move(missed);
    std::sort(nonspd.begin(), nonspd.end());
    for (auto& msg : nonspd) stats->warnings.push_back(std::move(msg));
    stats->alternations_run = 1;
  }
  return model;
}

FactorModel train_awmf(const BinaryInteractionMatrix& x, ModelKind kind,
                       Index d, double alpha, double lambda,
                       const TrainConfig& cfg, TrainStats* stats) {
  if (kind != ModelKind::AwmfWeightDecay && kind != ModelKind::AwmfDropout &&
      kind != ModelKind::AwmfDataWeightDecay) {
    throw std::invalid_argument("train_awmf: not an AWMF kind");
  }
  if (d < 1 || d > x.n_items()) {
    throw std::invalid_argument("train_awmf: need 1 <= d <= n_items");
  }
  if (lambda == 0.0) {
    add_warning(stats, "lambda = 0: sub-systems may be singular");
  }
  const WeightScheme w(alpha);

  FactorModel model;
  model.kind = kind;
  model.n_users = x.n_users();
  model.alpha = alpha;
  model.lambda = lambda;
  model.seed = cfg.init_seed;
  model.v = gaussian_init(x.n_items(), d, cfg.init_scale, cfg.init_seed);
  model.u = DenseMatrix::Zero(x.n_items(), d);

  double obj_prev = std::numeric_limits<double>::infinity();
  for (int alt = 0; alt < cfg.n_alternations; ++alt) {
    for (const bool u_side : {true, false}) {
      const Regularizer reg(model_reg_kind(kind, u_side), lambda);
      DenseMatrix& sol = u_side ? model.u : model.v;
      const DenseMatrix& fixed = u_side ? model.v : model.u;
      const DenseMatrix rhs = w.alpha * spmm_t(x, spmm(x, fixed));

      std::unique_ptr<LinearOperator> precond;
      SolveReport rep;
      SolverConfig sc = cfg.solver;
      sc.tolerance = solve_eps(cfg.solver.tolerance, rhs.norm());
      Eigen::Map<Vector> sol_vec(sol.data(), sol.size());
      try {
        if (u_side) {
          const FactorGramOpU op(x, fixed, w, reg);
          if (cfg.use_preconditioner) {
            try {
              precond = make_preconditioner(op);
            } catch (const FactorizationError& e) {
              add_warning(stats,
                          std::string("U preconditioner disabled: ") + e.what());
              if (stats != nullptr) stats->preconditioner_fallback = true;
            }
          }
          rep = pcg_solve(op, precond.get(), vec_view(rhs), sol_vec, sc);
        } else {
          const FactorGramOpV op(x, fixed, w, reg);
          if (cfg.use_preconditioner) {
            try {
              precond = make_preconditioner(op);
            } catch (const FactorizationError& e) {
              add_warning(stats,
                          std::string("V preconditioner disabled: ") + e.what());
              if (stats != nullptr) stats->preconditioner_fallback = true;
            }
          }
          rep = pcg_solve(op, precond.get(), vec_view(rhs), sol_vec, sc);
        }
      } catch (const NonSpdError& e) {
        add_warning(stats, std::string("singular sub-system: ") + e.what());
      }
      if (stats != nullptr) stats->total_pcg_iterations += rep.iterations_used;
    }

    const double obj = objective_value(x, model);
    if (stats != nullptr) {
      stats->objective_history.push_back(obj);
      stats->alternations_run = alt + 1;
    }
    if (obj > obj_prev * (1.0 + 1e-10)) {
      add_warning(stats, "objective increased at alternation " +
                             std::to_string(alt + 1) +
                             "; solver tolerance may be too loose");
    }
    if (std::isfinite(obj_prev) &&
        obj_prev - obj < cfg.objective_rel_stop * std::abs(obj_prev)) {
      break;
    }
    obj_prev = obj;
  }
  return model;
}

Vector wmf_user_factor(const DenseMatrix& v, const DenseMatrix& vtv,
                       std::span<const std::int32_t> items, double alpha,
                       double lambda) {
  const Index d = v.cols();
  DenseMatrix m = vtv;
  Vector rhs = Vector::Zero(d);
  for (std::int32_t i : items) {
    if (alpha > 1.0) {
      m.noalias() += (alpha - 1.0) * (v.row(i).transpose() * v.row(i));
    }
    rhs += v.row(i);
  }
  rhs *= alpha;
  m.diagonal().array() += lambda;
  return Eigen::LDLT<DenseMatrix>(m).solve(rhs);
}

FactorModel train_wmf(const BinaryInteractionMatrix& x, Index d, double alpha,
                      double lambda, const TrainConfig& cfg,
                      TrainStats* stats) {
  if (d < 1 || d > x.n_items()) {
    throw std::invalid_argument("train_wmf: need 1 <= d <= n_items");
  }
  if (lambda == 0.0) {
    add_warning(stats, "lambda = 0: per-row systems may be singular");
  }

  FactorModel model;
  model.kind = ModelKind::Wmf;
  model.n_users = x.n_users();
  model.alpha = alpha;
  model.lambda = lambda;
  model.seed = cfg.init_seed;
  model.v = gaussian_init(x.n_items(), d, cfg.init_scale, cfg.init_seed);
  model.u = DenseMatrix::Zero(x.n_users(), d);

  std::vector<Index> bad_rows;
  const auto sweep_side = [&](DenseMatrix& out, const DenseMatrix& fixed,
                              bool user_side) {
    const DenseMatrix gram = fixed.transpose() * fixed;
    const Index n_rows = user_side ? x.n_users() : x.n_items();
#pragma omp parallel for schedule(dynamic, 64)
    for (Index r = 0; r < n_rows; ++r) {
      const auto set = user_side ? x.row_items(r) : x.col_users(r);
      const Vector sol = wmf_user_factor(fixed, gram, set, alpha, lambda);
      if (sol.allFinite()) {
        out.row(r) = sol;
      } else {
#pragma omp critical
        bad_rows.push_back(r);
      }
    }
  };

  double obj_prev = std::numeric_limits<double>::infinity();
  for (int alt = 0; alt < cfg.n_alternations; ++alt) {
    sweep_side(model.u, model.v, /*user_side=*/true);
    sweep_side(model.v, model.u, /*user_side=*/false);

    const double obj = objective_value(x, model);
    if (stats != nullptr) {
      stats->objective_history.push_back(obj);
      stats->alternations_run = alt + 1;
    }
    if (obj > obj_prev * (1.0 + 1e-10)) {
      add_warning(stats, "objective increased at sweep " +
                             std::to_string(alt + 1));
    }
    if (std::isfinite(obj_prev) &&
        obj_prev - obj < cfg.objective_rel_stop * std::abs(obj_prev)) {
      break;
    }
    obj_prev = obj;
  }
  if (!bad_rows.empty() && stats != nullptr) {
    std::sort(bad_rows.begin(), bad_rows.end());
    for (Index r : bad_rows) {
      stats->warnings.push_back("singular per-row system at row " +
                                std::to_string(r));
    }
  }
  return model;
}

Model train_model(const BinaryInteractionMatrix& x, ModelKind kind, Index d,
                  double alpha, double lambda, const TrainConfig& cfg,
                  TrainStats* stats) {
  switch (kind) {
    case ModelKind::Wmf:
      return train_wmf(x, d, alpha, lambda, cfg, stats);
    case ModelKind::FullRank:
      return train_full_rank(x, alpha, lambda, cfg, stats);
    default:
      return train_awmf(x, kind, d, alpha, lambda, cfg, stats);
  }
}

namespace {

// Shared tail of the weighted square loss given the prediction's Gram
// trace, the sampled predictions on nnz coordinates, and alpha.
double weighted_loss(double pred_sq_norm, const Vector& nnz_pred, Index nnz,
                     double alpha) {
  const double cross = nnz_pred.sum();
  double loss = pred_sq_norm - 2.0 * cross + static_cast<double>(nnz);
  if (alpha > 1.0) {
    loss += (alpha - 1.0) * (1.0 - nnz_pred.array()).square().sum();
  }
  return loss;
}

}  // namespace

double objective_value(const BinaryInteractionMatrix& x, const Model& model) {
  if (const auto* f = std::get_if<FactorModel>(&model)) {
    const double alpha = f->alpha;
    const double lambda = f->lambda;
    const DenseMatrix vtv = f->v.transpose() * f->v;
    double loss, reg;
    if (f->kind == ModelKind::Wmf) {
      const DenseMatrix utu = f->u.transpose() * f->u;
      const SparsePattern s = sddmm(x, f->u, f->v);
      loss = weighted_loss((utu * vtv).trace(), s.values(), x.nnz(), alpha);
      reg = lambda * (f->u.squaredNorm() + f->v.squaredNorm());
    } else {
      const DenseMatrix xu = spmm(x, f->u);
      const DenseMatrix xutxu = xu.transpose() * xu;
      const SparsePattern s = sddmm(x, xu, f->v);
      loss = weighted_loss((xutxu * vtv).trace(), s.values(), x.nnz(), alpha);
      switch (f->kind) {
        case ModelKind::AwmfWeightDecay:
          reg = lambda * (f->u.squaredNorm() + f->v.squaredNorm());
          break;
        case ModelKind::AwmfDropout:
          reg = lambda * (f->u.transpose() * f->u * vtv).trace();
          break;
        default:  // AwmfDataWeightDecay
          reg = lambda * (xu.squaredNorm() + f->v.squaredNorm());
          break;
      }
    }
    return loss + reg;
  }

  const auto& fr = std::get<FullRankModel>(model);
  const double alpha = fr.alpha;
  const Index n = fr.b.rows();
  if (fr.b.cols() != n || n != x.n_items()) {
    throw std::invalid_argument("objective_value: B shape mismatch");
  }
  // Column blocks keep the dense intermediate X B small.
  constexpr Index kBlock = 128;
  double pred_sq = 0.0, cross = 0.0, pen = 0.0;
  for (Index j0 = 0; j0 < n; j0 += kBlock) {
    const Index width = std::min(kBlock, n - j0);
    const DenseMatrix y = spmm(x, fr.b.middleCols(j0, width));
    pred_sq += y.squaredNorm();
    for (Index c = 0; c < width; ++c) {
      for (std::int32_t u : x.col_users(j0 + c)) {
        const double s = y(u, c);
        cross += s;
        pen += (1.0 - s) * (1.0 - s);
      }
    }
  }
  double loss = pred_sq - 2.0 * cross + static_cast<double>(x.nnz());
  if (alpha > 1.0) loss += (alpha - 1.0) * pen;
  return loss + fr.lambda * fr.b.squaredNorm();
}

}  // namespace wmflab
