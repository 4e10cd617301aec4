// strata/synth.hpp
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
#include "strata/rng.hpp"

namespace strata::synth {

// Tone-coded corpora for smoke training and the transfer experiments:
// every label id maps to a fixed two-harmonic tone, the boundary token to
// a noise burst, so the label is recoverable from any single frame.
struct SynthConfig {
  int utterances = 3;
  int sample_rate = 16000;
  int frames_per_token = 3;  // 25 ms frames per emitted token
  int min_words = 1, max_words = 3;
  int min_word_len = 2, max_word_len = 4;
  int min_labels = 4, max_labels = 7;  // boundary-less inventories
  uint64_t seed = 7;
};

std::vector<int> random_tokens(const corpus::PhonemeInventory& inv, const SynthConfig& cfg,
                               Rng& rng);

corpus::AudioSignal tone_audio(const std::vector<int>& tokens, const SynthConfig& cfg,
                               const corpus::PhonemeInventory& inv, uint64_t seed);

struct SynthUtterance {
  std::string id;
  std::vector<int> tokens;
  std::string transcript;
  corpus::AudioSignal audio;
};

std::vector<SynthUtterance> generate(const corpus::PhonemeInventory& inv, const SynthConfig& cfg);

// Writes WAVs plus a manifest under out_dir; returns the manifest.
corpus::Manifest generate_corpus(const corpus::PhonemeInventory& inv, const SynthConfig& cfg,
                                 const std::string& out_dir);

}  // namespace strata::synth
