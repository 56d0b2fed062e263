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

#include "wmflab/rng.hpp"
#include "wmflab/sparse.hpp"

namespace wmflab {

// Random binary matrix with the given density. Every row and column is
// topped up to at least one entry so desk-scale instances stay well posed.
BinaryInteractionMatrix random_interactions(Rng& rng, Index n_users,
                                            Index n_items, double density);

// As above but resampled until X has full column rank (requires
// n_users >= n_items and desk-scale dimensions).
BinaryInteractionMatrix random_full_column_rank(Rng& rng, Index n_users,
                                                Index n_items, double density);

struct PlantedSpec {
  Index n_users = 600;
  Index n_items = 120;
  Index n_clusters = 32;
  Index core_items_per_cluster = 3;
  Index n_popular_items = 24;
  double p_core = 0.75;
  double p_popular = 0.25;
  double p_noise = 0.01;
  Index min_user_items = 5;
};

// Cluster-structured dataset: every user belongs to one of n_clusters
// taste clusters with exclusive core items, plus globally popular items
// and uniform noise. The planted structure has rank ~ n_clusters, so
// low-rank models are capacity-limited while d >= n_clusters is not.
BinaryInteractionMatrix planted_clusters(Rng& rng, const PlantedSpec& spec);

}  // namespace wmflab
