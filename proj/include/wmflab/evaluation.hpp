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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wmflab/models.hpp"
#include "wmflab/sparse.hpp"

namespace wmflab {

struct RawInteraction {
  std::int64_t user = 0;
  std::int64_t item = 0;
  double rating = 1.0;
};

struct SplitSpec {
  Index n_heldout_users_val = 0;
  Index n_heldout_users_test = 0;
  double fold_in_fraction = 0.8;
  double rating_threshold = 3.0;  // strict >
  Index min_user_interactions = 5;
  std::uint64_t seed = 0;
};

struct PreprocessResult {
  BinaryInteractionMatrix x;
  std::vector<std::int64_t> user_ids;  // row -> original user id
  std::vector<std::int64_t> item_ids;  // column -> original item id
};

// Keeps interactions with rating strictly above the threshold, drops users
// left with fewer than min_user_interactions items, and reindexes both axes
// densely (ascending original id order). Throws if nothing survives.
PreprocessResult preprocess(const std::vector<RawInteraction>& raw,
                            double rating_threshold,
                            Index min_user_interactions);

struct HeldOutUser {
  Index row = 0;                       // row in the full preprocessed matrix
  std::vector<std::int32_t> fold_in;   // sorted, disjoint from held_out
  std::vector<std::int32_t> held_out;  // sorted
};

struct EvalSplit {
  BinaryInteractionMatrix x_train;  // training users only
  std::vector<Index> train_rows;    // ascending rows of the full matrix
  std::vector<HeldOutUser> val_users;
  std::vector<HeldOutUser> test_users;
};

// Strong-generalization split: a seeded shuffle of users, the last blocks
// held out for validation and test, and a seeded per-user fold-in /
// held-out item split (floor(n * fraction) fold-in, at least one item on
// each side whenever the user has >= 2 items).
EvalSplit make_split(const BinaryInteractionMatrix& x_full,
                     const SplitSpec& spec);

// Plain-text line-oriented manifest (user id, role, fold-in items,
// held-out items) for exact split reuse across runs.
void save_split(const EvalSplit& split, const std::string& path);
EvalSplit load_split(const std::string& path,
                     const BinaryInteractionMatrix& x_full);

// Scores all items for fold-in histories of one model; caches the model's
// small Grams so per-user scoring stays cheap.
class ModelScorer {
 public:
  explicit ModelScorer(const Model& model);

  // Raw scores over all items. WMF first solves the per-user weighted
  // ridge against the fold-in row (same alpha / lambda as training).
  Vector score(std::span<const std::int32_t> fold_in) const;
  // As above with fold-in entries masked to -inf for ranking.
  Vector score_masked(std::span<const std::int32_t> fold_in) const;

 private:
  const Model* model_;
  DenseMatrix vtv_;  // WMF ridge only
};

Vector score_user(const Model& model, std::span<const std::int32_t> fold_in);

// Top-k item indices by descending score, ties broken by ascending item
// index; -inf entries (masked items) are excluded entirely.
std::vector<Index> rank_items(const Vector& scores, Index k);

// (# held-out items in the top k) / min(k, |held_out|).
double recall_at_k(std::span<const Index> ranked,
                   std::span<const std::int32_t> held_out_sorted, Index k);
// DCG over the top k with 1/log2(rank+1) gains, normalized by the ideal
// DCG of min(k, |held_out|) hits.
double ndcg_at_k(std::span<const Index> ranked,
                 std::span<const std::int32_t> held_out_sorted, Index k);

struct EvalReport {
  double recall_at_20 = 0.0, recall_at_50 = 0.0, ndcg_at_100 = 0.0;
  double se_recall_20 = 0.0, se_recall_50 = 0.0, se_ndcg_100 = 0.0;
  Index n_users_evaluated = 0;
  std::vector<double> per_user_recall_20;
  std::vector<double> per_user_recall_50;
  std::vector<double> per_user_ndcg_100;
};

// Scores every held-out user, ranks deterministically and aggregates
// Recall@20/50 and nDCG@100 with standard errors (sample stddev / sqrt(n)).
// Users with an empty held-out set are excluded from aggregation.
EvalReport evaluate(const Model& model, std::span<const HeldOutUser> users);

}  // namespace wmflab
