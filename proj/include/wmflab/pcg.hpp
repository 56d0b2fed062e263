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

#include <functional>
#include <stdexcept>
#include <vector>

#include "wmflab/dense.hpp"

namespace wmflab {

// Apply-only interface for a square linear map. Implementations must be
// safe for concurrent apply() calls.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual Index dim() const = 0;
  virtual void apply(Eigen::Ref<const Vector> in,
                     Eigen::Ref<Vector> out) const = 0;

  Vector operator()(const Vector& in) const {
    Vector out(dim());
    apply(in, out);
    return out;
  }
};

// Wraps a callable; handy for tests and ad-hoc operators.
class FunctionOperator final : public LinearOperator {
 public:
  using Fn = std::function<void(Eigen::Ref<const Vector>, Eigen::Ref<Vector>)>;
  FunctionOperator(Index dim, Fn fn) : dim_(dim), fn_(std::move(fn)) {}
  Index dim() const override { return dim_; }
  void apply(Eigen::Ref<const Vector> in,
             Eigen::Ref<Vector> out) const override {
    fn_(in, out);
  }

 private:
  Index dim_;
  Fn fn_;
};

class IdentityOperator final : public LinearOperator {
 public:
  explicit IdentityOperator(Index dim) : dim_(dim) {}
  Index dim() const override { return dim_; }
  void apply(Eigen::Ref<const Vector> in,
             Eigen::Ref<Vector> out) const override {
    out = in;
  }

 private:
  Index dim_;
};

struct SolverConfig {
  double tolerance = 1e-8;  // absolute residual 2-norm threshold
  Index max_iter = 0;       // 0 means the system dimension
  bool record_history = false;
};

struct SolveReport {
  Index iterations_used = 0;
  double final_residual_norm = 0.0;
  bool converged = false;
  std::vector<double> residual_history;  // filled iff record_history
};

// The operator produced a direction p with p^T A p <= 0, i.e. A is not
// symmetric positive definite. Surfaced as its own type so callers can
// distinguish it from plain non-convergence.
class NonSpdError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Preconditioned conjugate gradients. x holds the initial guess on entry
// and the final iterate on exit (whether or not the tolerance was met).
// precond may be nullptr for M = I. Throws NonSpdError on breakdown and
// std::runtime_error if non-finite values appear.
SolveReport pcg_solve(const LinearOperator& op, const LinearOperator* precond,
                      Eigen::Ref<const Vector> b, Eigen::Ref<Vector> x,
                      const SolverConfig& cfg);

}  // namespace wmflab
