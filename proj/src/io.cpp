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
#include "wmflab/io.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace wmflab {

namespace {

bool looks_like_csv_header(const std::string& line) {
  return line.rfind("userId,", 0) == 0 || line.rfind("user_id,", 0) == 0;
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= line.size()) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

bool parse_i64(const std::string& s, std::int64_t& v) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto res = std::from_chars(first, last, v);
  return res.ec == std::errc() && res.ptr == last && !s.empty();
}

bool parse_f64(const std::string& s, double& v) {
  if (s.empty()) return false;
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

}  // namespace

RawFormat parse_format(const std::string& name) {
  if (name == "auto") return RawFormat::Auto;
  if (name == "csv") return RawFormat::Csv;
  if (name == "pairs") return RawFormat::Pairs;
  throw std::invalid_argument("unknown input format: " + name);
}

RawFormat resolve_format(const std::string& path, RawFormat format) {
  if (format != RawFormat::Auto) return format;
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::string first;
  std::getline(is, first);
  return looks_like_csv_header(first) ? RawFormat::Csv : RawFormat::Pairs;
}

std::vector<RawInteraction> read_raw(const std::string& path, RawFormat format,
                                     int error_budget) {
  format = resolve_format(path, format);
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);

  std::vector<RawInteraction> out;
  std::string line;
  std::size_t line_no = 0;
  int errors = 0;
  const auto bad_line = [&](const std::string& why) {
    ++errors;
    std::fprintf(stderr, "%s:%zu: %s\n", path.c_str(), line_no, why.c_str());
    if (errors > error_budget) {
      throw std::runtime_error(path + ": " + std::to_string(errors) +
                               " malformed line(s), budget is " +
                               std::to_string(error_budget));
    }
  };

  bool header_skipped = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (format == RawFormat::Csv) {
      if (!header_skipped) {
        header_skipped = true;
        if (looks_like_csv_header(line)) continue;
        bad_line("missing userId,movieId,rating header");
        continue;
      }
      const auto fields = split_fields(line, ',');
      RawInteraction t;
      if (fields.size() < 3 || !parse_i64(fields[0], t.user) ||
          !parse_i64(fields[1], t.item) || !parse_f64(fields[2], t.rating)) {
        bad_line("malformed csv rating line");
        continue;
      }
      out.push_back(t);
    } else {
      const char sep = line.find(',') != std::string::npos ? ',' : ' ';
      auto fields = split_fields(line, sep);
      std::erase_if(fields, [](const std::string& f) { return f.empty(); });
      RawInteraction t;
      if (fields.size() != 2 || !parse_i64(fields[0], t.user) ||
          !parse_i64(fields[1], t.item)) {
        bad_line("malformed pair line");
        continue;
      }
      t.rating = 1.0;
      out.push_back(t);
    }
  }
  return out;
}

void write_pairs(const std::string& path, const BinaryInteractionMatrix& x) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  for (Index u = 0; u < x.n_users(); ++u) {
    for (std::int32_t i : x.row_items(u)) os << u << ' ' << i << '\n';
  }
}

void write_id_map(const std::string& path,
                  const std::vector<std::int64_t>& ids) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  for (std::int64_t id : ids) os << id << '\n';
}

}  // namespace wmflab
