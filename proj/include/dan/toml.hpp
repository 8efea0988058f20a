// Copyright 2026 The dansim Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Minimal TOML subset: [section] / [section.sub] headers, key = value with
// integers, floats, booleans, double-quoted strings and flat arrays, and #
// comments. Covers scenario files; not a general TOML implementation.

#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dan/common.hpp"

namespace dan::toml {

class parse_error : public error {
 public:
  using error::error;
};

struct value {
  enum class kind { integer, floating, boolean, string, array };
  kind k = kind::integer;
  std::int64_t i = 0;
  double f = 0.0;
  bool b = false;
  std::string s;
  std::vector<value> arr;

  std::int64_t as_int(const std::string& path) const {
    if (k != kind::integer)
      throw parse_error("expected integer for " + path);
    return i;
  }
  double as_double(const std::string& path) const {
    if (k == kind::integer) return static_cast<double>(i);
    if (k != kind::floating)
      throw parse_error("expected number for " + path);
    return f;
  }
  bool as_bool(const std::string& path) const {
    if (k != kind::boolean) throw parse_error("expected boolean for " + path);
    return b;
  }
  const std::string& as_string(const std::string& path) const {
    if (k != kind::string) throw parse_error("expected string for " + path);
    return s;
  }
  const std::vector<value>& as_array(const std::string& path) const {
    if (k != kind::array) throw parse_error("expected array for " + path);
    return arr;
  }
};

/// Flat view of a parsed document keyed by dotted path. Typed getters mark
/// keys as read, so loaders can reject anything left over.
class table {
 public:
  bool has(const std::string& path) const { return entries_.count(path) != 0; }

  const value& at(const std::string& path) const {
    auto it = entries_.find(path);
    if (it == entries_.end()) throw parse_error("missing key " + path);
    touched_.insert(path);
    return it->second;
  }

  std::int64_t get_int(const std::string& path, std::int64_t dflt) const {
    return has(path) ? at(path).as_int(path) : dflt;
  }
  double get_double(const std::string& path, double dflt) const {
    return has(path) ? at(path).as_double(path) : dflt;
  }
  bool get_bool(const std::string& path, bool dflt) const {
    return has(path) ? at(path).as_bool(path) : dflt;
  }
  std::string get_string(const std::string& path, std::string dflt) const {
    return has(path) ? at(path).as_string(path) : std::move(dflt);
  }
  std::vector<std::int64_t> get_int_array(const std::string& path) const {
    std::vector<std::int64_t> out;
    if (!has(path)) return out;
    for (const auto& v : at(path).as_array(path)) out.push_back(v.as_int(path));
    return out;
  }
  std::vector<double> get_double_array(const std::string& path) const {
    std::vector<double> out;
    if (!has(path)) return out;
    for (const auto& v : at(path).as_array(path))
      out.push_back(v.as_double(path));
    return out;
  }
  std::vector<std::string> get_string_array(const std::string& path) const {
    std::vector<std::string> out;
    if (!has(path)) return out;
    for (const auto& v : at(path).as_array(path))
      out.push_back(v.as_string(path));
    return out;
  }

  /// Keys never read through a getter; used for unknown-key rejection.
  std::vector<std::string> untouched() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_)
      if (!touched_.count(k)) out.push_back(k);
    return out;
  }

  static table parse(std::istream& is) {
    table t;
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      std::string_view sv = strip(line);
      if (sv.empty() || sv.front() == '#') continue;
      if (sv.front() == '[') {
        if (sv.back() != ']')
          throw parse_error(err(lineno, "unterminated section header"));
        std::string_view name = strip(sv.substr(1, sv.size() - 2));
        if (name.empty() || !valid_key_path(name))
          throw parse_error(err(lineno, "bad section name"));
        section = std::string(name);
        continue;
      }
      const std::size_t eq = find_eq(sv);
      if (eq == std::string_view::npos)
        throw parse_error(err(lineno, "expected key = value"));
      std::string_view key = strip(sv.substr(0, eq));
      std::string_view raw = strip(sv.substr(eq + 1));
      if (key.empty() || !valid_key_path(key))
        throw parse_error(err(lineno, "bad key name"));
      if (raw.empty()) throw parse_error(err(lineno, "missing value"));
      std::string path =
          section.empty() ? std::string(key) : section + "." + std::string(key);
      if (t.entries_.count(path))
        throw parse_error(err(lineno, "duplicate key " + path));
      t.entries_.emplace(std::move(path), parse_value(raw, lineno));
    }
    return t;
  }

  static table parse_string(std::string_view text) {
    std::istringstream is{std::string(text)};
    return parse(is);
  }

  static table parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw parse_error("cannot open " + path);
    return parse(is);
  }

 private:
  static std::string err(std::size_t lineno, const std::string& what) {
    return "line " + std::to_string(lineno) + ": " + what;
  }

  static std::string_view strip(std::string_view sv) {
    while (!sv.empty() && std::isspace(static_cast<unsigned char>(sv.front())))
      sv.remove_prefix(1);
    while (!sv.empty() && std::isspace(static_cast<unsigned char>(sv.back())))
      sv.remove_suffix(1);
    return sv;
  }

  static bool valid_key_path(std::string_view sv) {
    for (char c : sv)
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' &&
          c != '-' && c != '.')
        return false;
    return true;
  }

  /// Position of the assignment '=' outside any quoted string.
  static std::size_t find_eq(std::string_view sv) {
    bool in_str = false;
    for (std::size_t i = 0; i < sv.size(); ++i) {
      if (sv[i] == '"' && (i == 0 || sv[i - 1] != '\\')) in_str = !in_str;
      else if (sv[i] == '=' && !in_str) return i;
    }
    return std::string_view::npos;
  }

  /// Cuts an unquoted trailing comment.
  static std::string_view cut_comment(std::string_view sv) {
    bool in_str = false;
    for (std::size_t i = 0; i < sv.size(); ++i) {
      if (sv[i] == '"' && (i == 0 || sv[i - 1] != '\\')) in_str = !in_str;
      else if (sv[i] == '#' && !in_str) return strip(sv.substr(0, i));
    }
    return sv;
  }

  static value parse_value(std::string_view raw, std::size_t lineno) {
    raw = cut_comment(raw);
    if (raw.empty()) throw parse_error(err(lineno, "missing value"));
    value v;
    if (raw.front() == '"') {
      if (raw.size() < 2 || raw.back() != '"')
        throw parse_error(err(lineno, "unterminated string"));
      v.k = value::kind::string;
      std::string_view body = raw.substr(1, raw.size() - 2);
      for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i] == '\\' && i + 1 < body.size()) {
          ++i;
          switch (body[i]) {
            case 'n': v.s += '\n'; break;
            case 't': v.s += '\t'; break;
            case '"': v.s += '"'; break;
            case '\\': v.s += '\\'; break;
            default:
              throw parse_error(err(lineno, "unsupported escape"));
          }
        } else {
          v.s += body[i];
        }
      }
      return v;
    }
    if (raw.front() == '[') {
      if (raw.back() != ']')
        throw parse_error(err(lineno, "unterminated array"));
      v.k = value::kind::array;
      std::string_view body = strip(raw.substr(1, raw.size() - 2));
      while (!body.empty()) {
        const std::size_t comma = next_comma(body);
        std::string_view item = strip(body.substr(0, comma));
        if (!item.empty()) v.arr.push_back(parse_value(item, lineno));
        if (comma == std::string_view::npos) break;
        body = strip(body.substr(comma + 1));
      }
      return v;
    }
    if (raw == "true" || raw == "false") {
      v.k = value::kind::boolean;
      v.b = raw == "true";
      return v;
    }
    const bool floaty = raw.find_first_of(".eE") != std::string_view::npos &&
                        raw.find("0x") == std::string_view::npos;
    if (!floaty) {
      std::int64_t iv = 0;
      auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), iv);
      if (ec == std::errc() && p == raw.data() + raw.size()) {
        v.k = value::kind::integer;
        v.i = iv;
        return v;
      }
    }
    double dv = 0.0;
    auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), dv);
    if (ec == std::errc() && p == raw.data() + raw.size()) {
      v.k = value::kind::floating;
      v.f = dv;
      return v;
    }
    throw parse_error(err(lineno, "cannot parse value: " + std::string(raw)));
  }

  static std::size_t next_comma(std::string_view sv) {
    bool in_str = false;
    for (std::size_t i = 0; i < sv.size(); ++i) {
      if (sv[i] == '"' && (i == 0 || sv[i - 1] != '\\')) in_str = !in_str;
      else if (sv[i] == ',' && !in_str) return i;
    }
    return std::string_view::npos;
  }

  std::map<std::string, value> entries_;
  mutable std::set<std::string> touched_;
};

}  // namespace dan::toml
