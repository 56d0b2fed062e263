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

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "wmflab/evaluation.hpp"
#include "wmflab/trainers.hpp"

namespace wmflab {

struct SweepConfig {
  ModelKind kind = ModelKind::FullRank;
  Index d = 10;
  // Base grids; the paper's defaults. Boundary winners trigger geometric
  // expansion (x100 for lambda, x2 for alpha) until an interior cell wins
  // or the hard caps are reached. Single-value axes are treated as pinned
  // and never expanded.
  std::vector<double> lambdas{1e-4, 1e-2, 1.0, 100.0, 10000.0};
  std::vector<double> alphas{1.0, 2.0, 5.0, 10.0, 20.0};
  double lambda_cap = 1e8;
  double lambda_floor = 1e-12;
  double alpha_cap = 200.0;
  TrainConfig train;
  int cell_workers = 1;
};

struct CellResult {
  double alpha = 1.0;
  double lambda = 0.0;
  bool trained_ok = false;
  std::string error;
  double val_recall_20 = 0.0, val_recall_50 = 0.0, val_ndcg_100 = 0.0;
  double val_se_recall_20 = 0.0, val_se_recall_50 = 0.0, val_se_ndcg_100 = 0.0;
  std::int64_t pcg_iterations = 0;
  int alternations = 0;
  double train_seconds = 0.0;  // kept out of deterministic reports
  bool selected = false;
};

struct SweepResult {
  ModelKind kind = ModelKind::FullRank;
  Index d = 0;
  Index n_items = 0;
  std::uint64_t seed = 0;
  std::string selection_metric = "ndcg_at_100";
  std::vector<CellResult> cells;
  Index selected_cell = -1;
  EvalReport test;  // winner cell only
  // Resolved settings so every record is self-describing.
  std::vector<std::pair<std::string, std::string>> config_echo;
};

// Trains one model per grid cell, evaluates each on the validation users,
// expands boundary-winning axes, then evaluates the single selected cell
// on the test users. Training failures are recorded per cell.
SweepResult run_sweep(const SweepConfig& cfg,
                      const BinaryInteractionMatrix& x_train,
                      std::span<const HeldOutUser> val_users,
                      std::span<const HeldOutUser> test_users);

// Formats: "csv" (fixed header, one row per sweep: the selected cell with
// test metrics), "jsonl" (full deterministic record per line), "table"
// (human-readable, mirrors the paper's layout).
void emit_report(const std::vector<SweepResult>& results,
                 const std::string& format, std::ostream& os);

// Full run record round-trip (includes per-cell timings).
void save_sweep_record(const SweepResult& result, const std::string& path);
SweepResult load_sweep_record(const std::string& path);

}  // namespace wmflab
