// strata/config.cpp
//
// Copyright 2026 STRATA authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "strata/config.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>

#include "strata/error.hpp"

namespace strata::config {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

void load_into(const std::string& path, Map& map, int depth) {
  if (depth > 16) fail(Errc::bad_config, "config include depth exceeded at " + path);
  std::ifstream in(path);
  if (!in) fail(Errc::missing_file, "cannot open config: " + path);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    if (body.rfind("include ", 0) == 0) {
      const std::string ref = trim(body.substr(8));
      if (ref.empty()) {
        fail(Errc::bad_config, path + ":" + std::to_string(line_no) + ": empty include");
      }
      std::filesystem::path target(ref);
      if (target.is_relative()) target = std::filesystem::path(path).parent_path() / target;
      load_into(target.string(), map, depth + 1);
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      fail(Errc::bad_config,
           path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) {
      fail(Errc::bad_config, path + ":" + std::to_string(line_no) + ": empty key");
    }
    map[key] = value;
  }
}

}  // namespace

Map load(const std::string& path) {
  Map map;
  load_into(path, map, 0);
  return map;
}

std::optional<std::string> get(const Map& map, const std::string& key) {
  auto it = map.find(key);
  if (it == map.end()) return std::nullopt;
  return it->second;
}

std::string get_string(const Map& map, const std::string& key, const std::string& fallback) {
  auto v = get(map, key);
  return v ? *v : fallback;
}

double get_double(const Map& map, const std::string& key, double fallback) {
  auto v = get(map, key);
  if (!v) return fallback;
  try {
    size_t used = 0;
    const double parsed = std::stod(*v, &used);
    if (used != v->size()) throw std::invalid_argument(*v);
    return parsed;
  } catch (const std::exception&) {
    fail(Errc::bad_config, "config key " + key + ": \"" + *v + "\" is not a number");
  }
}

long get_long(const Map& map, const std::string& key, long fallback) {
  auto v = get(map, key);
  if (!v) return fallback;
  try {
    size_t used = 0;
    const long parsed = std::stol(*v, &used);
    if (used != v->size()) throw std::invalid_argument(*v);
    return parsed;
  } catch (const std::exception&) {
    fail(Errc::bad_config, "config key " + key + ": \"" + *v + "\" is not an integer");
  }
}

uint64_t get_u64(const Map& map, const std::string& key, uint64_t fallback) {
  auto v = get(map, key);
  if (!v) return fallback;
  try {
    size_t used = 0;
    const uint64_t parsed = std::stoull(*v, &used);
    if (used != v->size()) throw std::invalid_argument(*v);
    return parsed;
  } catch (const std::exception&) {
    fail(Errc::bad_config, "config key " + key + ": \"" + *v + "\" is not an unsigned integer");
  }
}

bool get_bool(const Map& map, const std::string& key, bool fallback) {
  auto v = get(map, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  fail(Errc::bad_config, "config key " + key + ": \"" + *v + "\" is not a boolean");
}

}  // namespace strata::config
