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
#include "wmflab/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wmflab {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

Config Config::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file " + path);
  Config cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    cfg.parse_line(line, path + ":" + std::to_string(line_no));
  }
  return cfg;
}

void Config::parse_line(const std::string& raw, const std::string& where) {
  std::string line = trim(raw);
  if (line.empty() || line[0] == '#' || line[0] == ';') return;
  if (line.front() == '[') {
    if (line.back() != ']') {
      throw std::runtime_error(where + ": unterminated section header");
    }
    current_section_ = trim(line.substr(1, line.size() - 2));
    return;
  }
  const auto eq = line.find('=');
  if (eq == std::string::npos) {
    throw std::runtime_error(where + ": expected key = value");
  }
  std::string key = trim(line.substr(0, eq));
  const std::string value = trim(line.substr(eq + 1));
  if (key.empty()) throw std::runtime_error(where + ": empty key");
  if (!current_section_.empty()) key = current_section_ + "." + key;
  entries_[key] = value;
}

void Config::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

bool Config::has(const std::string& key) const {
  return entries_.count(key) != 0;
}

std::string Config::get_str(const std::string& key,
                            const std::string& dflt) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? dflt : it->second;
}

double Config::get_real(const std::string& key, double dflt) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return dflt;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw std::runtime_error("config key '" + key + "': not a number: " +
                             it->second);
  }
}

std::int64_t Config::get_int(const std::string& key, std::int64_t dflt) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return dflt;
  try {
    return std::stoll(it->second);
  } catch (const std::exception&) {
    throw std::runtime_error("config key '" + key + "': not an integer: " +
                             it->second);
  }
}

std::vector<double> Config::get_real_list(
    const std::string& key, const std::vector<double>& dflt) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return dflt;
  std::vector<double> out;
  std::stringstream ss(it->second);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw std::runtime_error("config key '" + key +
                               "': not a number list: " + it->second);
    }
  }
  if (out.empty()) {
    throw std::runtime_error("config key '" + key + "': empty list");
  }
  return out;
}

}  // namespace wmflab
