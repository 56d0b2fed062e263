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
#include "wmflab/pcg.hpp"

#include <cmath>
#include <string>

namespace wmflab {

namespace {
// Recurrence residual drift is bounded by periodically recomputing
// r = b - A x from scratch.
constexpr Index kResidualRefreshPeriod = 50;
}  // namespace

SolveReport pcg_solve(const LinearOperator& op, const LinearOperator* precond,
                      Eigen::Ref<const Vector> b, Eigen::Ref<Vector> x,
                      const SolverConfig& cfg) {
  const Index n = op.dim();
  if (b.size() != n || x.size() != n) {
    throw std::invalid_argument("pcg_solve: vector length does not match operator");
  }
  if (cfg.tolerance <= 0.0) {
    throw std::invalid_argument("pcg_solve: tolerance must be positive");
  }
  const Index max_iter = cfg.max_iter > 0 ? cfg.max_iter : n;

  SolveReport report;
  Vector r(n), z(n), p(n), ap(n);

  op.apply(x, ap);
  r = b - ap;
  if (precond != nullptr) {
    precond->apply(r, z);
  } else {
    z = r;
  }
  p = z;
  double rz = r.dot(z);
  double res_norm = r.norm();
  if (cfg.record_history) report.residual_history.push_back(res_norm);

  Index k = 0;
  while (k < max_iter) {
    if (res_norm <= cfg.tolerance) break;
    if (!std::isfinite(res_norm)) {
      throw std::runtime_error("pcg_solve: non-finite residual at iteration " +
                               std::to_string(k));
    }
    if (rz <= 0.0) {
      throw NonSpdError("pcg_solve: preconditioner breakdown, r^T z = " +
                        std::to_string(rz) + " at iteration " +
                        std::to_string(k));
    }
    op.apply(p, ap);
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) {
      throw NonSpdError("pcg_solve: operator breakdown, p^T A p = " +
                        std::to_string(pap) + " at iteration " +
                        std::to_string(k));
    }
    const double alpha = rz / pap;
    x += alpha * p;
    ++k;
    if (k % kResidualRefreshPeriod == 0) {
      op.apply(x, ap);
      r = b - ap;
    } else {
      r -= alpha * ap;
    }
    if (precond != nullptr) {
      precond->apply(r, z);
    } else {
      z = r;
    }
    const double rz_next = r.dot(z);
    const double beta = rz_next / rz;
    rz = rz_next;
    p = z + beta * p;
    res_norm = r.norm();
    if (cfg.record_history) report.residual_history.push_back(res_norm);
  }

  report.iterations_used = k;
  report.final_residual_norm = res_norm;
  report.converged = res_norm <= cfg.tolerance;
  return report;
}

}  // namespace wmflab
