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

#include "wmflab/evaluation.hpp"
#include "wmflab/sparse.hpp"

namespace wmflab {

enum class RawFormat { Auto, Csv, Pairs };

RawFormat parse_format(const std::string& name);

// Reads a rating file. Csv expects the MovieLens convention
// `userId,movieId,rating,timestamp` (header required); Pairs expects
// headerless `user item` (or `user,item`) lines read as rating 1. Auto
// sniffs the header. Malformed lines are reported with their line number;
// more than `error_budget` of them is a hard failure.
std::vector<RawInteraction> read_raw(const std::string& path, RawFormat format,
                                     int error_budget = 0);

// Detected (or explicit) format of the file, after sniffing.
RawFormat resolve_format(const std::string& path, RawFormat format);

// Canonical pair-file export; ingest(write_pairs(X)) reproduces X.
void write_pairs(const std::string& path, const BinaryInteractionMatrix& x);

// One original id per line, position = dense index.
void write_id_map(const std::string& path,
                  const std::vector<std::int64_t>& ids);

}  // namespace wmflab
