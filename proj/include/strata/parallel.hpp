// strata/parallel.hpp
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

namespace strata::par {

// Global switch for the OpenMP code paths. All parallel kernels assign each
// output element to exactly one thread and keep the per-element operation
// order identical to the serial reference, so results are bit-identical
// whether this is on or off. STRATA_SERIAL=1 in the environment turns the
// parallel paths off at startup.
bool enabled();
void set_enabled(bool on);
int max_threads();

}  // namespace strata::par
