// strata/parallel.cpp
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

#include "strata/parallel.hpp"

#include <omp.h>

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace strata::par {

namespace {

std::atomic<bool> g_enabled{[] {
  const char* v = std::getenv("STRATA_SERIAL");
  return !(v != nullptr && std::strcmp(v, "0") != 0);
}()};

}  // namespace

bool enabled() { return g_enabled.load(std::memory_order_relaxed); }

void set_enabled(bool on) { g_enabled.store(on, std::memory_order_relaxed); }

int max_threads() { return omp_get_max_threads(); }

}  // namespace strata::par
