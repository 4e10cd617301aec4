// strata/corpus.hpp
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
#include <string_view>
#include <unordered_map>
#include <vector>

namespace strata::corpus {

struct AudioSignal {
  std::vector<double> samples;  // mono, amplitudes in [-1, 1]
  int sample_rate = 0;          // Hz
  std::string id;

  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

// Reads RIFF/PCM WAV (8/16/24-bit integer or 32-bit float, little-endian).
// Samples are normalized to [-1, 1]; multi-channel input is downmixed by
// channel average. Distinct error codes: missing_file, malformed_riff,
// unsupported_encoding.
AudioSignal load_wav(const std::string& path);

// Writes mono 16-bit PCM; samples are clipped to [-1, 1] before quantizing.
void write_wav16(const AudioSignal& signal, const std::string& path);

// Ordered phoneme symbol table. Ids are 1..P in load order; the word
// boundary "##" (when present) is id P+1; id 0 is reserved for the CTC
// blank and never maps to a symbol.
class PhonemeInventory {
 public:
  static constexpr int kBlankId = 0;
  static constexpr const char* kBoundarySymbol = "##";

  static PhonemeInventory from_symbols(const std::vector<std::string>& symbols,
                                       bool with_boundary = true);

  size_t phoneme_count() const { return symbols_.size(); }
  bool has_boundary() const { return has_boundary_; }
  int boundary_id() const;  // requires has_boundary()
  int max_id() const { return static_cast<int>(symbols_.size()) + (has_boundary_ ? 1 : 0); }
  // Distribution width of a model over this inventory: phonemes
  // (+ boundary) + blank.
  int n_classes() const { return max_id() + 1; }

  // Returns 0 if the symbol is unknown (0 never names a phoneme).
  int id_of(std::string_view symbol) const;
  const std::string& symbol_of(int id) const;
  bool valid_id(int id) const { return id >= 1 && id <= max_id(); }

  const std::vector<std::string>& symbols() const { return symbols_; }
  uint64_t fingerprint() const;

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> ids_;
  bool has_boundary_ = true;
  mutable std::string boundary_symbol_ = kBoundarySymbol;
};

// One symbol per line; '#'-prefixed lines and blank lines are ignored.
// Ids follow file order starting at 1; the boundary is appended as the
// last id unless with_boundary is false (character-level donor models).
PhonemeInventory load_inventory(const std::string& path, bool with_boundary = true);

// A validated token sequence: starts and ends with a boundary id, no two
// adjacent boundaries, never contains the blank id.
struct Transcript {
  std::vector<int> tokens;
  std::string source_text;
};

Transcript parse_cisampa(std::string_view text, const PhonemeInventory& inv);
std::string render_cisampa(const Transcript& t, const PhonemeInventory& inv);

// Plain space-separated label sequence without boundary machinery, for
// boundary-less (character-level) inventories.
std::vector<int> parse_labels(std::string_view text, const PhonemeInventory& inv);

// Dispatches on the inventory kind; returns raw token ids either way.
std::vector<int> parse_tokens(std::string_view text, const PhonemeInventory& inv);

// Lenient rendering of arbitrary decoder output: collapses boundary runs
// and completes the <s>##...##</s> envelope. Never throws on valid ids.
std::string render_tokens(const std::vector<int>& tokens, const PhonemeInventory& inv);

struct ManifestEntry {
  std::string audio_path;
  std::string transcript;  // inline text, or "@path" to read from a file
  std::string split;       // train | dev | test
  std::string origin;      // original | augmented:<kinds>
  std::string id;          // unique per split; defaults to the audio stem
};

struct Manifest {
  std::vector<ManifestEntry> entries;
};

// Line format: audio_path <TAB> transcript <TAB> split <TAB> origin
Manifest load_manifest(const std::string& path);
void save_manifest(const Manifest& m, const std::string& path);

// Resolves "@path" transcript references; inline text is returned as is.
std::string transcript_text(const ManifestEntry& entry);

std::string id_from_path(std::string_view audio_path);

}  // namespace strata::corpus
