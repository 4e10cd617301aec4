// strata/augment.hpp
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
#include <string>
#include <vector>

#include "strata/corpus.hpp"

namespace strata::augment {

enum class Kind {
  kCrop,       // removes one contiguous section; length shrinks by the drawn fraction
  kLoudness,   // scales the loudest 100 ms window by a gain in [0.5, 0.9]
  kMask,       // replaces one section with white noise at signal RMS
  kNoise,      // adds white noise at an SNR drawn from [10, 30] dB
  kPitch,      // +-2 semitones by resample-then-length-restore
  kShift,      // moves content by up to +-10% of duration, zero-padding the gap
  kSpeed,      // resamples the time axis by a factor in [0.9, 1.1]
  kVtlp,       // piecewise-linear warp of the STFT frequency axis
  kNormalize,  // scales so the peak |sample| is exactly 1.0
};

inline constexpr int kKindCount = 9;

const char* kind_name(Kind kind);
Kind kind_from_name(const std::string& name);
std::vector<Kind> all_kinds();

// One planned transform: the magnitude is drawn from [lo, hi] and every
// position/noise draw comes from the seed, so the output is a pure function
// of (spec, input).
struct Spec {
  Kind kind = Kind::kNormalize;
  double lo = 0.0;
  double hi = 0.0;
  uint64_t seed = 0;
};

Spec default_spec(Kind kind, uint64_t seed);

corpus::AudioSignal apply(const Spec& spec, const corpus::AudioSignal& signal);

struct PlanItem {
  std::string source_id;
  int copy_index = 0;  // 1-based
  std::vector<Spec> specs;
};

struct Plan {
  uint64_t seed = 0;
  int copies_per_utterance = 10;
  std::vector<PlanItem> items;
};

// Deterministically selects 1-3 distinct transform kinds and their
// parameters for every (utterance, copy) pair. The plan depends only on
// (seed, utterance ids, copies, kinds).
Plan plan(uint64_t seed, const corpus::Manifest& manifest, int copies,
          const std::vector<Kind>& kinds = all_kinds());

struct AugmentResult {
  corpus::Manifest manifest;  // originals plus augmented copies
  long failures = 0;
  std::vector<std::string> errors;
};

// Writes the augmented copies as 16-bit PCM WAVs under out_dir and returns
// the merged manifest. Copies keep their source transcripts. Per-utterance
// failures are reported and skipped.
AugmentResult augment_corpus(const Plan& p, const corpus::Manifest& manifest,
                             const std::string& out_dir);

std::string kinds_label(const std::vector<Spec>& specs);

}  // namespace strata::augment
