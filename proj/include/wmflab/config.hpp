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
#include <map>
#include <string>
#include <vector>

namespace wmflab {

// Plain-text key-value configuration with [section] headers; keys are
// addressed as "section.key". Later assignments win, so CLI flags can be
// layered on top of a file.
class Config {
 public:
  Config() = default;
  static Config load(const std::string& path);
  void parse_line(const std::string& line, const std::string& where);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_str(const std::string& key, const std::string& dflt) const;
  double get_real(const std::string& key, double dflt) const;
  std::int64_t get_int(const std::string& key, std::int64_t dflt) const;
  std::vector<double> get_real_list(const std::string& key,
                                    const std::vector<double>& dflt) const;

  const std::map<std::string, std::string>& entries() const {
    return entries_;
  }

 private:
  std::map<std::string, std::string> entries_;
  std::string current_section_;
};

}  // namespace wmflab
