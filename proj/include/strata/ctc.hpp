// strata/ctc.hpp
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

#include <vector>

#include "strata/matrix.hpp"

namespace strata::ctc {

inline constexpr int kBlankId = 0;

// Label sequence without blanks; all ids >= 1.
struct CtcTarget {
  std::vector<int> labels;
};

CtcTarget target_from_tokens(const std::vector<int>& tokens);

struct CtcResult {
  double loss = 0.0;  // negative log-likelihood, nats
  Matrix grad;        // d(loss)/d(logprobs), T x n_classes
};

// Minimum number of frames that can emit the target: L plus one separating
// blank per adjacent repeated label.
int min_frames(const CtcTarget& target);

// Negative log-likelihood of the target under per-frame log-probabilities
// (rows T, columns n_classes, blank in column 0), via the forward-backward
// recursion over the blank-extended label sequence, entirely in log space.
// The gradient with respect to every logprob entry is exact.
// Errors with infeasible_target when T < min_frames(target).
CtcResult ctc_loss(const Matrix& logprobs, const CtcTarget& target);

// Best path decoding: per-frame argmax, collapse adjacent repeats, then
// drop blanks.
std::vector<int> greedy_decode(const Matrix& logprobs);

}  // namespace strata::ctc
