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
#include "wmflab/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "wmflab/rng.hpp"
#include "wmflab/trainers.hpp"

namespace wmflab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool contains(std::span<const std::int32_t> sorted, Index item) {
  return std::binary_search(sorted.begin(), sorted.end(),
                            static_cast<std::int32_t>(item));
}

}  // namespace

PreprocessResult preprocess(const std::vector<RawInteraction>& raw,
                            double rating_threshold,
                            Index min_user_interactions) {
  std::vector<std::pair<std::int64_t, std::int64_t>> kept;
  kept.reserve(raw.size());
  for (const auto& t : raw) {
    if (t.rating > rating_threshold) kept.emplace_back(t.user, t.item);
  }
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());

  // kept is grouped by user; drop short users in one pass.
  std::vector<std::pair<std::int64_t, std::int64_t>> survivors;
  std::size_t start = 0;
  while (start < kept.size()) {
    std::size_t end = start;
    while (end < kept.size() && kept[end].first == kept[start].first) ++end;
    if (static_cast<Index>(end - start) >= min_user_interactions) {
      survivors.insert(survivors.end(), kept.begin() + start,
                       kept.begin() + end);
    }
    start = end;
  }
  if (survivors.empty()) {
    throw std::runtime_error(
        "preprocess: no interactions left after filtering");
  }

  PreprocessResult out;
  std::map<std::int64_t, Index> user_index, item_index;
  for (const auto& [u, i] : survivors) {
    user_index.emplace(u, 0);
    item_index.emplace(i, 0);
  }
  for (auto& [id, idx] : user_index) {
    idx = static_cast<Index>(out.user_ids.size());
    out.user_ids.push_back(id);
  }
  for (auto& [id, idx] : item_index) {
    idx = static_cast<Index>(out.item_ids.size());
    out.item_ids.push_back(id);
  }
  std::vector<Coordinate> coords;
  coords.reserve(survivors.size());
  for (const auto& [u, i] : survivors) {
    coords.emplace_back(user_index[u], item_index[i]);
  }
  out.x = BinaryInteractionMatrix::from_coordinates(
      static_cast<Index>(out.user_ids.size()),
      static_cast<Index>(out.item_ids.size()), std::move(coords));
  return out;
}

EvalSplit make_split(const BinaryInteractionMatrix& x_full,
                     const SplitSpec& spec) {
  const Index n = x_full.n_users();
  const Index nv = spec.n_heldout_users_val;
  const Index nt = spec.n_heldout_users_test;
  if (nv < 0 || nt < 0 || nv + nt >= n) {
    throw std::invalid_argument(
        "make_split: held-out user counts exceed available users");
  }
  if (!(spec.fold_in_fraction > 0.0 && spec.fold_in_fraction < 1.0)) {
    throw std::invalid_argument("make_split: fold_in_fraction must be in (0,1)");
  }

  Rng rng(spec.seed);
  std::vector<Index> perm(n);
  for (Index i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(perm);

  EvalSplit split;
  split.train_rows.assign(perm.begin(), perm.end() - (nv + nt));
  std::sort(split.train_rows.begin(), split.train_rows.end());
  split.x_train = x_full.select_rows(split.train_rows);

  const auto split_user = [&](Index row) {
    HeldOutUser hu;
    hu.row = row;
    const auto items = x_full.row_items(row);
    std::vector<std::int32_t> shuffled(items.begin(), items.end());
    rng.shuffle(shuffled);
    const auto size = static_cast<Index>(shuffled.size());
    if (size < 2) {
      // Cannot put one item on each side; all items fold in and the user
      // is excluded from aggregation downstream.
      hu.fold_in.assign(shuffled.begin(), shuffled.end());
      std::sort(hu.fold_in.begin(), hu.fold_in.end());
      return hu;
    }
    Index n_fold = static_cast<Index>(
        std::floor(static_cast<double>(size) * spec.fold_in_fraction));
    n_fold = std::clamp<Index>(n_fold, 1, size - 1);
    hu.fold_in.assign(shuffled.begin(), shuffled.begin() + n_fold);
    hu.held_out.assign(shuffled.begin() + n_fold, shuffled.end());
    std::sort(hu.fold_in.begin(), hu.fold_in.end());
    std::sort(hu.held_out.begin(), hu.held_out.end());
    return hu;
  };

  for (Index k = n - nv - nt; k < n - nt; ++k) {
    split.val_users.push_back(split_user(perm[k]));
  }
  for (Index k = n - nt; k < n; ++k) {
    split.test_users.push_back(split_user(perm[k]));
  }
  return split;
}

namespace {

std::string join_items(const std::vector<std::int32_t>& items) {
  if (items.empty()) return "-";
  std::string out;
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (k > 0) out.push_back(',');
    out += std::to_string(items[k]);
  }
  return out;
}

std::vector<std::int32_t> parse_items(const std::string& field) {
  std::vector<std::int32_t> items;
  if (field == "-") return items;
  std::stringstream ss(field);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    items.push_back(static_cast<std::int32_t>(std::stol(tok)));
  }
  return items;
}

}  // namespace

void save_split(const EvalSplit& split, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "# wmflab split v1: user role fold_in held_out\n";
  for (Index r : split.train_rows) os << r << " train - -\n";
  for (const auto& hu : split.val_users) {
    os << hu.row << " val " << join_items(hu.fold_in) << ' '
       << join_items(hu.held_out) << "\n";
  }
  for (const auto& hu : split.test_users) {
    os << hu.row << " test " << join_items(hu.fold_in) << ' '
       << join_items(hu.held_out) << "\n";
  }
}

EvalSplit load_split(const std::string& path,
                     const BinaryInteractionMatrix& x_full) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  EvalSplit split;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::int64_t row;
    std::string role, fold, held;
    if (!(ss >> row >> role >> fold >> held)) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed split line");
    }
    if (row < 0 || row >= x_full.n_users()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": user out of range");
    }
    if (role == "train") {
      split.train_rows.push_back(row);
    } else if (role == "val" || role == "test") {
      HeldOutUser hu;
      hu.row = row;
      hu.fold_in = parse_items(fold);
      hu.held_out = parse_items(held);
      std::vector<std::int32_t> both = hu.fold_in;
      both.insert(both.end(), hu.held_out.begin(), hu.held_out.end());
      std::sort(both.begin(), both.end());
      if (std::adjacent_find(both.begin(), both.end()) != both.end()) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": fold-in and held-out overlap");
      }
      (role == "val" ? split.val_users : split.test_users).push_back(hu);
    } else {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": unknown role '" + role + "'");
    }
  }
  std::sort(split.train_rows.begin(), split.train_rows.end());
  split.x_train = x_full.select_rows(split.train_rows);
  return split;
}

ModelScorer::ModelScorer(const Model& model) : model_(&model) {
  if (const auto* f = std::get_if<FactorModel>(&model)) {
    if (f->kind == ModelKind::Wmf) vtv_ = f->v.transpose() * f->v;
  }
}

Vector ModelScorer::score(std::span<const std::int32_t> fold_in) const {
  if (const auto* f = std::get_if<FactorModel>(model_)) {
    if (f->kind == ModelKind::Wmf) {
      const Vector u =
          wmf_user_factor(f->v, vtv_, fold_in, f->alpha, f->lambda);
      return f->v * u;
    }
    Vector embed = Vector::Zero(f->u.cols());
    for (std::int32_t i : fold_in) embed += f->u.row(i);
    return f->v * embed;
  }
  const auto& fr = std::get<FullRankModel>(*model_);
  Vector scores = Vector::Zero(fr.b.cols());
  for (std::int32_t i : fold_in) scores += fr.b.row(i);
  return scores;
}

Vector ModelScorer::score_masked(std::span<const std::int32_t> fold_in) const {
  Vector s = score(fold_in);
  for (std::int32_t i : fold_in) s[i] = kNegInf;
  return s;
}

Vector score_user(const Model& model, std::span<const std::int32_t> fold_in) {
  return ModelScorer(model).score_masked(fold_in);
}

std::vector<Index> rank_items(const Vector& scores, Index k) {
  std::vector<Index> idx;
  idx.reserve(scores.size());
  for (Index i = 0; i < scores.size(); ++i) {
    if (scores[i] != kNegInf) idx.push_back(i);
  }
  const auto better = [&scores](Index a, Index b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  const auto take = std::min<Index>(k, static_cast<Index>(idx.size()));
  std::partial_sort(idx.begin(), idx.begin() + take, idx.end(), better);
  idx.resize(take);
  return idx;
}

double recall_at_k(std::span<const Index> ranked,
                   std::span<const std::int32_t> held_out_sorted, Index k) {
  if (k < 1) throw std::invalid_argument("recall_at_k: k must be >= 1");
  if (held_out_sorted.empty()) return 0.0;
  const auto top = std::min<Index>(k, static_cast<Index>(ranked.size()));
  Index hits = 0;
  for (Index r = 0; r < top; ++r) {
    if (contains(held_out_sorted, ranked[r])) ++hits;
  }
  const auto denom =
      std::min<Index>(k, static_cast<Index>(held_out_sorted.size()));
  return static_cast<double>(hits) / static_cast<double>(denom);
}

double ndcg_at_k(std::span<const Index> ranked,
                 std::span<const std::int32_t> held_out_sorted, Index k) {
  if (k < 1) throw std::invalid_argument("ndcg_at_k: k must be >= 1");
  if (held_out_sorted.empty()) return 0.0;
  const auto top = std::min<Index>(k, static_cast<Index>(ranked.size()));
  double dcg = 0.0;
  for (Index r = 0; r < top; ++r) {
    if (contains(held_out_sorted, ranked[r])) {
      dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
    }
  }
  const auto ideal =
      std::min<Index>(k, static_cast<Index>(held_out_sorted.size()));
  double idcg = 0.0;
  for (Index r = 0; r < ideal; ++r) {
    idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  }
  return dcg / idcg;
}

namespace {

std::pair<double, double> mean_and_se(const std::vector<double>& v) {
  const auto n = static_cast<double>(v.size());
  if (v.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double stddev = std::sqrt(ss / (n - 1.0));
  return {mean, stddev / std::sqrt(n)};
}

}  // namespace

EvalReport evaluate(const Model& model, std::span<const HeldOutUser> users) {
  const ModelScorer scorer(model);
  EvalReport report;
  std::vector<char> keep(users.size(), 0);
  std::vector<double> r20(users.size()), r50(users.size()),
      n100(users.size());

#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t k = 0; k < users.size(); ++k) {
    const auto& hu = users[k];
    if (hu.held_out.empty()) continue;
    const Vector scores = scorer.score_masked(hu.fold_in);
    const std::vector<Index> ranked = rank_items(scores, 100);
    r20[k] = recall_at_k(ranked, hu.held_out, 20);
    r50[k] = recall_at_k(ranked, hu.held_out, 50);
    n100[k] = ndcg_at_k(ranked, hu.held_out, 100);
    keep[k] = 1;
  }

  for (std::size_t k = 0; k < users.size(); ++k) {
    if (!keep[k]) continue;
    report.per_user_recall_20.push_back(r20[k]);
    report.per_user_recall_50.push_back(r50[k]);
    report.per_user_ndcg_100.push_back(n100[k]);
  }
  report.n_users_evaluated =
      static_cast<Index>(report.per_user_ndcg_100.size());
  std::tie(report.recall_at_20, report.se_recall_20) =
      mean_and_se(report.per_user_recall_20);
  std::tie(report.recall_at_50, report.se_recall_50) =
      mean_and_se(report.per_user_recall_50);
  std::tie(report.ndcg_at_100, report.se_ndcg_100) =
      mean_and_se(report.per_user_ndcg_100);
  return report;
}

}  // namespace wmflab
