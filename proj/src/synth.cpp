// strata/synth.cpp
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

#include "strata/synth.hpp"

#include <cmath>
#include <filesystem>

#include "strata/error.hpp"

namespace strata::synth {

namespace {

double tone_frequency(int id, int sample_rate) {
  // Spread ids over roughly 200..2600 Hz, well under Nyquist for 16 kHz,
  // with the second harmonic still in band.
  const double base = 200.0 + 34.0 * id;
  const double cap = sample_rate / 2.0 / 2.2;
  return std::min(base, cap);
}

}  // namespace

std::vector<int> random_tokens(const corpus::PhonemeInventory& inv, const SynthConfig& cfg,
                               Rng& rng) {
  std::vector<int> tokens;
  const int p = static_cast<int>(inv.phoneme_count());
  if (inv.has_boundary()) {
    const int bid = inv.boundary_id();
    const int words = rng.uniform_int(cfg.min_words, cfg.max_words);
    tokens.push_back(bid);
    for (int w = 0; w < words; ++w) {
      const int len = rng.uniform_int(cfg.min_word_len, cfg.max_word_len);
      for (int i = 0; i < len; ++i) tokens.push_back(rng.uniform_int(1, p));
      tokens.push_back(bid);
    }
  } else {
    const int len = rng.uniform_int(cfg.min_labels, cfg.max_labels);
    for (int i = 0; i < len; ++i) tokens.push_back(rng.uniform_int(1, p));
  }
  return tokens;
}

corpus::AudioSignal tone_audio(const std::vector<int>& tokens, const SynthConfig& cfg,
                               const corpus::PhonemeInventory& inv, uint64_t seed) {
  const int frame = cfg.sample_rate * 25 / 1000;
  const int per_token = cfg.frames_per_token * frame;
  const int boundary = inv.has_boundary() ? inv.boundary_id() : -1;

  corpus::AudioSignal out;
  out.sample_rate = cfg.sample_rate;
  out.samples.assign(static_cast<size_t>(tokens.size()) * per_token, 0.0);

  Rng rng(seed);
  size_t pos = 0;
  const int ramp = cfg.sample_rate * 3 / 1000;  // 3 ms fade against clicks
  for (int token : tokens) {
    if (token == boundary) {
      for (int i = 0; i < per_token; ++i) out.samples[pos + i] = 0.25 * rng.normal();
    } else {
      const double f0 = tone_frequency(token, cfg.sample_rate);
      for (int i = 0; i < per_token; ++i) {
        const double t = static_cast<double>(i) / cfg.sample_rate;
        double v = 0.45 * std::sin(2.0 * M_PI * f0 * t) +
                   0.15 * std::sin(2.0 * M_PI * 2.0 * f0 * t);
        if (i < ramp) v *= static_cast<double>(i) / ramp;
        if (per_token - 1 - i < ramp) v *= static_cast<double>(per_token - 1 - i) / ramp;
        out.samples[pos + i] = v;
      }
    }
    pos += per_token;
  }
  for (double& v : out.samples) {
    v = std::clamp(v + 0.003 * rng.normal(), -1.0, 1.0);
  }
  return out;
}

std::vector<SynthUtterance> generate(const corpus::PhonemeInventory& inv, const SynthConfig& cfg) {
  if (cfg.utterances < 1) fail(Errc::bad_config, "need at least one synthetic utterance");
  std::vector<SynthUtterance> utts(cfg.utterances);
  for (int i = 0; i < cfg.utterances; ++i) {
    Rng rng(mix_seed(cfg.seed, static_cast<uint64_t>(i + 1)));
    SynthUtterance& u = utts[i];
    u.id = "synth" + std::to_string(i + 1);
    u.tokens = random_tokens(inv, cfg, rng);
    if (inv.has_boundary()) {
      corpus::Transcript t;
      t.tokens = u.tokens;
      u.transcript = corpus::render_cisampa(t, inv);
    } else {
      u.transcript = corpus::render_tokens(u.tokens, inv);
    }
    u.audio = tone_audio(u.tokens, cfg, inv, rng.next_u64());
    u.audio.id = u.id;
  }
  return utts;
}

corpus::Manifest generate_corpus(const corpus::PhonemeInventory& inv, const SynthConfig& cfg,
                                 const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    fail(Errc::io_error, "cannot create output directory: " + out_dir);
  }
  corpus::Manifest m;
  for (const auto& u : generate(inv, cfg)) {
    const std::string path = (fs::path(out_dir) / (u.id + ".wav")).string();
    corpus::write_wav16(u.audio, path);
    m.entries.push_back({path, u.transcript, "train", "original", u.id});
  }
  return m;
}

}  // namespace strata::synth
