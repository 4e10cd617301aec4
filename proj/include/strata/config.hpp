// strata/config.hpp
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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace strata::config {

// Flat key=value files. '#' starts a comment, blank lines are skipped, and
// `include <path>` splices another file in place (relative to the including
// file). Later assignments win.
using Map = std::map<std::string, std::string>;

Map load(const std::string& path);

std::optional<std::string> get(const Map& map, const std::string& key);
std::string get_string(const Map& map, const std::string& key, const std::string& fallback);
double get_double(const Map& map, const std::string& key, double fallback);
long get_long(const Map& map, const std::string& key, long fallback);
uint64_t get_u64(const Map& map, const std::string& key, uint64_t fallback);
bool get_bool(const Map& map, const std::string& key, bool fallback);

}  // namespace strata::config
