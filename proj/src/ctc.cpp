// strata/ctc.cpp
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

#include "strata/ctc.hpp"

#include <cmath>
#include <limits>

#include "strata/error.hpp"

namespace strata::ctc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = a > b ? a : b;
  return m + std::log1p(std::exp((a < b ? a : b) - m));
}

double log_sum_exp(double a, double b, double c) { return log_sum_exp(log_sum_exp(a, b), c); }

}  // namespace

CtcTarget target_from_tokens(const std::vector<int>& tokens) {
  CtcTarget t;
  t.labels.reserve(tokens.size());
  for (int id : tokens) {
    if (id < 1) fail(Errc::invalid_transcript, "CTC target contains a non-label id");
    t.labels.push_back(id);
  }
  return t;
}

int min_frames(const CtcTarget& target) {
  int repeats = 0;
  for (size_t i = 1; i < target.labels.size(); ++i) {
    if (target.labels[i] == target.labels[i - 1]) ++repeats;
  }
  return static_cast<int>(target.labels.size()) + repeats;
}

CtcResult ctc_loss(const Matrix& logprobs, const CtcTarget& target) {
  const int t_total = logprobs.rows();
  const int n_classes = logprobs.cols();
  if (t_total < 1) fail(Errc::shape_mismatch, "ctc_loss needs at least one frame");
  for (int label : target.labels) {
    if (label < 1 || label >= n_classes) {
      fail(Errc::shape_mismatch, "target label " + std::to_string(label) + " outside class range");
    }
  }
  const int need = min_frames(target);
  if (t_total < need) {
    fail(Errc::infeasible_target, "target needs at least " + std::to_string(need) +
                                      " frames, got " + std::to_string(t_total));
  }

  // Blank-extended sequence: blank, l1, blank, l2, ..., blank.
  const int l = static_cast<int>(target.labels.size());
  const int s_total = 2 * l + 1;
  std::vector<int> ext(s_total, kBlankId);
  for (int i = 0; i < l; ++i) ext[2 * i + 1] = target.labels[i];

  auto lp = [&](int t, int s) { return logprobs(t, ext[s]); };
  // A state can be entered from s-2 when it is a label different from the
  // label two states back (skipping the blank between distinct labels).
  auto can_skip = [&](int s) { return s >= 2 && ext[s] != kBlankId && ext[s] != ext[s - 2]; };

  Matrix alpha(t_total, s_total);
  Matrix beta(t_total, s_total);
  alpha.fill(kNegInf);
  beta.fill(kNegInf);

  alpha(0, 0) = lp(0, 0);
  if (s_total > 1) alpha(0, 1) = lp(0, 1);
  for (int t = 1; t < t_total; ++t) {
    for (int s = 0; s < s_total; ++s) {
      double a = alpha(t - 1, s);
      if (s >= 1) a = log_sum_exp(a, alpha(t - 1, s - 1));
      if (can_skip(s)) a = log_sum_exp(a, alpha(t - 1, s - 2));
      alpha(t, s) = a == kNegInf ? kNegInf : a + lp(t, s);
    }
  }

  const double log_p = s_total > 1
                           ? log_sum_exp(alpha(t_total - 1, s_total - 1), alpha(t_total - 1, s_total - 2))
                           : alpha(t_total - 1, s_total - 1);
  if (log_p == kNegInf) {
    fail(Errc::infeasible_target, "target has zero probability under the given logprobs");
  }

  // beta(t, s): log-probability of completing the target from state s after
  // frame t (emission at t excluded, so alpha + beta covers each full path
  // exactly once).
  beta(t_total - 1, s_total - 1) = 0.0;
  if (s_total > 1) beta(t_total - 1, s_total - 2) = 0.0;
  for (int t = t_total - 2; t >= 0; --t) {
    for (int s = 0; s < s_total; ++s) {
      double b = beta(t + 1, s) == kNegInf ? kNegInf : beta(t + 1, s) + lp(t + 1, s);
      if (s + 1 < s_total && beta(t + 1, s + 1) != kNegInf) {
        b = log_sum_exp(b, beta(t + 1, s + 1) + lp(t + 1, s + 1));
      }
      if (s + 2 < s_total && can_skip(s + 2) && beta(t + 1, s + 2) != kNegInf) {
        b = log_sum_exp(b, beta(t + 1, s + 2) + lp(t + 1, s + 2));
      }
      beta(t, s) = b;
    }
  }

  CtcResult result;
  result.loss = -log_p;
  result.grad = Matrix(t_total, n_classes);
  for (int t = 0; t < t_total; ++t) {
    // Aggregate the state posteriors per class, then convert out of log
    // space once.
    std::vector<double> acc(n_classes, kNegInf);
    for (int s = 0; s < s_total; ++s) {
      const double occ = alpha(t, s) + beta(t, s);
      if (occ == kNegInf || std::isnan(occ)) continue;
      acc[ext[s]] = log_sum_exp(acc[ext[s]], occ);
    }
    for (int k = 0; k < n_classes; ++k) {
      result.grad(t, k) = acc[k] == kNegInf ? 0.0 : -std::exp(acc[k] - log_p);
    }
  }
  return result;
}

std::vector<int> greedy_decode(const Matrix& logprobs) {
  std::vector<int> out;
  int prev = -1;
  for (int t = 0; t < logprobs.rows(); ++t) {
    int best = 0;
    double best_v = logprobs(t, 0);
    for (int k = 1; k < logprobs.cols(); ++k) {
      if (logprobs(t, k) > best_v) {
        best_v = logprobs(t, k);
        best = k;
      }
    }
    if (best != prev && best != kBlankId) out.push_back(best);
    prev = best;
  }
  return out;
}

}  // namespace strata::ctc
