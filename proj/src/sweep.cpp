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
#include "wmflab/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>

#include <json.hpp>

namespace wmflab {

namespace {

using json = nlohmann::ordered_json;

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string format_param(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

struct CellRun {
  CellResult cell;
  std::optional<Model> model;
};

CellRun run_cell(const SweepConfig& cfg, const BinaryInteractionMatrix& x,
                 std::span<const HeldOutUser> val_users, double alpha,
                 double lambda) {
  CellRun run;
  run.cell.alpha = alpha;
  run.cell.lambda = lambda;
  const auto start = std::chrono::steady_clock::now();
  try {
    TrainStats stats;
    run.model = train_model(x, cfg.kind, cfg.d, alpha, lambda, cfg.train,
                            &stats);
    run.cell.pcg_iterations = stats.total_pcg_iterations;
    run.cell.alternations = stats.alternations_run;
    const EvalReport val = evaluate(*run.model, val_users);
    run.cell.val_recall_20 = val.recall_at_20;
    run.cell.val_recall_50 = val.recall_at_50;
    run.cell.val_ndcg_100 = val.ndcg_at_100;
    run.cell.val_se_recall_20 = val.se_recall_20;
    run.cell.val_se_recall_50 = val.se_recall_50;
    run.cell.val_se_ndcg_100 = val.se_ndcg_100;
    run.cell.trained_ok = true;
  } catch (const std::exception& e) {
    run.cell.error = e.what();
    run.model.reset();
  }
  run.cell.train_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return run;
}

Index best_cell(const std::vector<CellResult>& cells) {
  Index best = -1;
  for (Index k = 0; k < static_cast<Index>(cells.size()); ++k) {
    if (!cells[k].trained_ok) continue;
    if (best < 0 || cells[k].val_ndcg_100 > cells[best].val_ndcg_100) {
      best = k;
    }
  }
  return best;
}

}  // namespace

SweepResult run_sweep(const SweepConfig& cfg,
                      const BinaryInteractionMatrix& x_train,
                      std::span<const HeldOutUser> val_users,
                      std::span<const HeldOutUser> test_users) {
  if (cfg.lambdas.empty() || cfg.alphas.empty()) {
    throw std::invalid_argument("run_sweep: grids must be non-empty");
  }
  for (double a : cfg.alphas) {
    if (!(a >= 1.0)) throw std::invalid_argument("run_sweep: alpha < 1");
  }

  SweepResult result;
  result.kind = cfg.kind;
  result.d = cfg.kind == ModelKind::FullRank ? x_train.n_items() : cfg.d;
  result.n_items = x_train.n_items();
  result.seed = cfg.train.init_seed;

  std::vector<std::pair<double, double>> pending;  // (lambda, alpha)
  for (double l : cfg.lambdas) {
    for (double a : cfg.alphas) pending.emplace_back(l, a);
  }
  std::set<double> lambda_axis(cfg.lambdas.begin(), cfg.lambdas.end());
  std::set<double> alpha_axis(cfg.alphas.begin(), cfg.alphas.end());
  const bool lambda_sweepable = lambda_axis.size() >= 2;
  const bool alpha_sweepable = alpha_axis.size() >= 2;

  std::optional<Model> best_model;
  Index best_index = -1;

  while (!pending.empty()) {
    const Index first_new = static_cast<Index>(result.cells.size());
    result.cells.resize(result.cells.size() + pending.size());
    std::vector<std::optional<Model>> models(pending.size());

#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, cfg.cell_workers)) if (cfg.cell_workers > 1)
    for (std::size_t k = 0; k < pending.size(); ++k) {
      CellRun run = run_cell(cfg, x_train, val_users, pending[k].second,
                             pending[k].first);
      result.cells[first_new + static_cast<Index>(k)] = run.cell;
      models[k] = std::move(run.model);
    }
    for (std::size_t k = 0; k < pending.size(); ++k) {
      const Index idx = first_new + static_cast<Index>(k);
      const CellResult& cell = result.cells[idx];
      if (!cell.trained_ok) continue;
      if (best_index < 0 ||
          cell.val_ndcg_100 > result.cells[best_index].val_ndcg_100) {
        best_index = idx;
        best_model = std::move(models[k]);
      }
    }
    pending.clear();

    if (best_index < 0) break;  // nothing trained this round or ever
    const double best_lambda = result.cells[best_index].lambda;
    const double best_alpha = result.cells[best_index].alpha;

    if (lambda_sweepable) {
      if (best_lambda == *lambda_axis.rbegin() &&
          best_lambda * 100.0 <= cfg.lambda_cap) {
        const double next = best_lambda * 100.0;
        lambda_axis.insert(next);
        for (double a : alpha_axis) pending.emplace_back(next, a);
      } else if (best_lambda == *lambda_axis.begin() &&
                 best_lambda / 100.0 >= cfg.lambda_floor) {
        const double next = best_lambda / 100.0;
        lambda_axis.insert(next);
        for (double a : alpha_axis) pending.emplace_back(next, a);
      }
    }
    if (pending.empty() && alpha_sweepable && best_alpha > 1.0 &&
        best_alpha == *alpha_axis.rbegin() &&
        best_alpha * 2.0 <= cfg.alpha_cap) {
      const double next = best_alpha * 2.0;
      alpha_axis.insert(next);
      for (double l : lambda_axis) pending.emplace_back(l, next);
    }
  }

  if (best_index < 0 || !best_model.has_value()) {
    throw std::runtime_error("run_sweep: every grid cell failed to train");
  }
  result.selected_cell = best_index;
  result.cells[best_index].selected = true;
  result.test = evaluate(*best_model, test_users);
  return result;
}

void emit_report(const std::vector<SweepResult>& results,
                 const std::string& format, std::ostream& os) {
  if (format == "csv") {
    os << "model,rank,alpha,lambda,recall_at_20,recall_at_50,ndcg_at_100,"
          "se_recall_20,se_recall_50,se_ndcg_100\n";
    for (const auto& r : results) {
      const CellResult& sel = r.cells.at(r.selected_cell);
      os << kind_name(r.kind) << ',' << r.d << ',' << format_param(sel.alpha)
         << ',' << format_param(sel.lambda) << ','
         << format_metric(r.test.recall_at_20) << ','
         << format_metric(r.test.recall_at_50) << ','
         << format_metric(r.test.ndcg_at_100) << ','
         << format_metric(r.test.se_recall_20) << ','
         << format_metric(r.test.se_recall_50) << ','
         << format_metric(r.test.se_ndcg_100) << '\n';
    }
    return;
  }
  if (format == "jsonl") {
    for (const auto& r : results) {
      const CellResult& sel = r.cells.at(r.selected_cell);
      json row;
      row["model"] = kind_name(r.kind);
      row["rank"] = r.d;
      row["alpha"] = sel.alpha;
      row["lambda"] = sel.lambda;
      row["weighted"] = sel.alpha > 1.0;
      row["selection_metric"] = r.selection_metric;
      row["test"] = {{"recall_at_20", r.test.recall_at_20},
                     {"recall_at_50", r.test.recall_at_50},
                     {"ndcg_at_100", r.test.ndcg_at_100},
                     {"se_recall_20", r.test.se_recall_20},
                     {"se_recall_50", r.test.se_recall_50},
                     {"se_ndcg_100", r.test.se_ndcg_100},
                     {"n_users", r.test.n_users_evaluated}};
      json cells = json::array();
      for (const auto& c : r.cells) {
        cells.push_back({{"alpha", c.alpha},
                         {"lambda", c.lambda},
                         {"ok", c.trained_ok},
                         {"val_ndcg_100", c.val_ndcg_100},
                         {"pcg_iterations", c.pcg_iterations},
                         {"selected", c.selected}});
      }
      row["cells"] = std::move(cells);
      json echo;
      for (const auto& [k, v] : r.config_echo) echo[k] = v;
      row["config"] = std::move(echo);
      os << row.dump() << '\n';
    }
    return;
  }
  if (format == "table") {
    os << "model          rank   alpha   lambda     Recall@20  Recall@50  "
          "nDCG@100\n";
    for (const auto& r : results) {
      const CellResult& sel = r.cells.at(r.selected_cell);
      char line[256];
      std::snprintf(line, sizeof(line),
                    "%-14s %-6lld %-7s %-10s %-10s %-10s %-10s %s\n",
                    kind_name(r.kind), static_cast<long long>(r.d),
                    format_param(sel.alpha).c_str(),
                    format_param(sel.lambda).c_str(),
                    format_metric(r.test.recall_at_20).c_str(),
                    format_metric(r.test.recall_at_50).c_str(),
                    format_metric(r.test.ndcg_at_100).c_str(),
                    sel.alpha > 1.0 ? "(weighted)" : "(unweighted)");
      os << line;
    }
    return;
  }
  throw std::invalid_argument("emit_report: unknown format '" + format + "'");
}

void save_sweep_record(const SweepResult& result, const std::string& path) {
  json rec;
  rec["kind"] = kind_name(result.kind);
  rec["d"] = result.d;
  rec["n_items"] = result.n_items;
  rec["seed"] = result.seed;
  rec["selection_metric"] = result.selection_metric;
  rec["selected_cell"] = result.selected_cell;
  rec["test"] = {{"recall_at_20", result.test.recall_at_20},
                 {"recall_at_50", result.test.recall_at_50},
                 {"ndcg_at_100", result.test.ndcg_at_100},
                 {"se_recall_20", result.test.se_recall_20},
                 {"se_recall_50", result.test.se_recall_50},
                 {"se_ndcg_100", result.test.se_ndcg_100},
                 {"n_users", result.test.n_users_evaluated}};
  json cells = json::array();
  for (const auto& c : result.cells) {
    cells.push_back({{"alpha", c.alpha},
                     {"lambda", c.lambda},
                     {"ok", c.trained_ok},
                     {"error", c.error},
                     {"val_recall_20", c.val_recall_20},
                     {"val_recall_50", c.val_recall_50},
                     {"val_ndcg_100", c.val_ndcg_100},
                     {"val_se_recall_20", c.val_se_recall_20},
                     {"val_se_recall_50", c.val_se_recall_50},
                     {"val_se_ndcg_100", c.val_se_ndcg_100},
                     {"pcg_iterations", c.pcg_iterations},
                     {"alternations", c.alternations},
                     {"train_seconds", c.train_seconds},
                     {"selected", c.selected}});
  }
  rec["cells"] = std::move(cells);
  json echo;
  for (const auto& [k, v] : result.config_echo) echo[k] = v;
  rec["config"] = std::move(echo);

  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << rec.dump(2) << '\n';
}

SweepResult load_sweep_record(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  json rec = json::parse(is);

  SweepResult result;
  result.kind = parse_kind(rec.at("kind").get<std::string>());
  result.d = rec.at("d").get<Index>();
  result.n_items = rec.at("n_items").get<Index>();
  result.seed = rec.at("seed").get<std::uint64_t>();
  result.selection_metric = rec.at("selection_metric").get<std::string>();
  result.selected_cell = rec.at("selected_cell").get<Index>();
  const auto& t = rec.at("test");
  result.test.recall_at_20 = t.at("recall_at_20").get<double>();
  result.test.recall_at_50 = t.at("recall_at_50").get<double>();
  result.test.ndcg_at_100 = t.at("ndcg_at_100").get<double>();
  result.test.se_recall_20 = t.at("se_recall_20").get<double>();
  result.test.se_recall_50 = t.at("se_recall_50").get<double>();
  result.test.se_ndcg_100 = t.at("se_ndcg_100").get<double>();
  result.test.n_users_evaluated = t.at("n_users").get<Index>();
  for (const auto& c : rec.at("cells")) {
    CellResult cell;
    cell.alpha = c.at("alpha").get<double>();
    cell.lambda = c.at("lambda").get<double>();
    cell.trained_ok = c.at("ok").get<bool>();
    cell.error = c.at("error").get<std::string>();
    cell.val_recall_20 = c.at("val_recall_20").get<double>();
    cell.val_recall_50 = c.at("val_recall_50").get<double>();
    cell.val_ndcg_100 = c.at("val_ndcg_100").get<double>();
    cell.val_se_recall_20 = c.at("val_se_recall_20").get<double>();
    cell.val_se_recall_50 = c.at("val_se_recall_50").get<double>();
    cell.val_se_ndcg_100 = c.at("val_se_ndcg_100").get<double>();
    cell.pcg_iterations = c.at("pcg_iterations").get<std::int64_t>();
    cell.alternations = c.at("alternations").get<int>();
    cell.train_seconds = c.at("train_seconds").get<double>();
    cell.selected = c.at("selected").get<bool>();
    result.cells.push_back(std::move(cell));
  }
  if (rec.contains("config")) {
    for (const auto& [k, v] : rec.at("config").items()) {
      result.config_echo.emplace_back(k, v.get<std::string>());
    }
  }
  return result;
}

}  // namespace wmflab
