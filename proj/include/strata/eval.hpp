// strata/eval.hpp
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

#include <string>
#include <vector>

#include "strata/corpus.hpp"
#include "strata/dsp.hpp"
#include "strata/net.hpp"

namespace strata::eval {

enum class EditOp { kMatch, kSubstitute, kInsert, kDelete };

struct AlignedPair {
  EditOp op;
  int ref_token;  // -1 for insertions
  int hyp_token;  // -1 for deletions
};

struct Alignment {
  std::vector<AlignedPair> pairs;
  long insertions = 0;
  long deletions = 0;
  long substitutions = 0;
  long matches = 0;

  long ref_length() const { return matches + substitutions + deletions; }
  long edits() const { return insertions + deletions + substitutions; }
};

// Minimal-cost Levenshtein alignment with unit costs. Ties break
// deterministically: match > substitute > delete > insert.
Alignment align(const std::vector<int>& ref, const std::vector<int>& hyp);

// 100 * (I + D + S) / N; errors on an empty reference.
double per(const std::vector<int>& ref, const std::vector<int>& hyp);

// Fraction of ground-truth boundary tokens whose aligned hypothesis token
// is a boundary, over the minimal alignment of the full sequences.
double wba(const std::vector<int>& ref, const std::vector<int>& hyp, int boundary_id);

// Clipped multiset intersection of trigrams, relative to the reference
// trigram count; capped at 100.
double trigram_acc(const std::vector<int>& ref, const std::vector<int>& hyp);

struct UtteranceEval {
  std::string id;
  double per = 0.0;
  double wba = 0.0;
  double trigram = 0.0;
  bool has_wba = false;
  bool has_trigram = false;
  long insertions = 0, deletions = 0, substitutions = 0, ref_length = 0;
  long boundaries_correct = 0, boundaries_total = 0;
  long trigrams_hit = 0, trigrams_total = 0;
  std::string error;  // non-empty when this utterance failed to evaluate
};

struct EvalReport {
  std::vector<UtteranceEval> utterances;
  // Corpus aggregates pool raw counts; they are not averages of ratios.
  double per = 0.0;
  double wba = 0.0;
  double trigram = 0.0;
  bool has_wba = false;
  bool has_trigram = false;
  long evaluated = 0;
  long failed = 0;
};

UtteranceEval evaluate_tokens(const std::string& id, const std::vector<int>& ref,
                              const std::vector<int>& hyp, int boundary_id);

// Pools per-utterance counts into corpus aggregates.
EvalReport pool(std::vector<UtteranceEval> utterances);

// Decodes every manifest entry with the model and pools the counts.
// boundary_id <= 0 disables the WBA column (boundary-less inventories).
EvalReport evaluate_corpus(const net::Model& model, const corpus::Manifest& manifest,
                           const corpus::PhonemeInventory& inv, const dsp::DspConfig& dsp_cfg);

// Line-delimited report: one record per utterance plus a summary record.
void write_report(const EvalReport& report, const std::string& path);
// Human-readable table.
std::string format_report(const EvalReport& report);

}  // namespace strata::eval
