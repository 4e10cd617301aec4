// strata/corpus.cpp
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

#include "strata/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "strata/error.hpp"
#include "strata/rng.hpp"

namespace strata::corpus {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool valid_symbol(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

void check_transcript_tokens(const std::vector<int>& tokens, const PhonemeInventory& inv) {
  if (tokens.empty()) fail(Errc::empty_transcript, "transcript has no tokens");
  const int bid = inv.boundary_id();
  if (tokens.front() != bid || tokens.back() != bid) {
    fail(Errc::invalid_transcript, "transcript must start and end with a boundary");
  }
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (!inv.valid_id(tokens[i])) {
      fail(Errc::invalid_transcript,
           "invalid token id " + std::to_string(tokens[i]) + " at position " + std::to_string(i));
    }
    if (i > 0 && tokens[i] == bid && tokens[i - 1] == bid) {
      fail(Errc::invalid_transcript, "adjacent boundary tokens at position " + std::to_string(i));
    }
  }
  if (tokens.size() < 3) fail(Errc::empty_transcript, "transcript has no words");
}

}  // namespace

PhonemeInventory PhonemeInventory::from_symbols(const std::vector<std::string>& symbols,
                                                bool with_boundary) {
  PhonemeInventory inv;
  inv.has_boundary_ = with_boundary;
  if (symbols.empty()) fail(Errc::empty_inventory, "inventory has no symbols");
  for (const auto& sym : symbols) {
    if (!valid_symbol(sym)) fail(Errc::unknown_symbol, "invalid symbol \"" + sym + "\"");
    if (sym == kBoundarySymbol) {
      fail(Errc::duplicate_symbol, "boundary symbol cannot appear in the inventory body");
    }
    if (inv.ids_.count(sym) != 0) fail(Errc::duplicate_symbol, "duplicate symbol \"" + sym + "\"");
    inv.symbols_.push_back(sym);
    inv.ids_.emplace(sym, static_cast<int>(inv.symbols_.size()));
  }
  return inv;
}

int PhonemeInventory::boundary_id() const {
  if (!has_boundary_) fail(Errc::no_boundaries, "inventory has no boundary class");
  return static_cast<int>(symbols_.size()) + 1;
}

int PhonemeInventory::id_of(std::string_view symbol) const {
  if (has_boundary_ && symbol == kBoundarySymbol) return boundary_id();
  auto it = ids_.find(std::string(symbol));
  return it == ids_.end() ? 0 : it->second;
}

const std::string& PhonemeInventory::symbol_of(int id) const {
  if (id >= 1 && id <= static_cast<int>(symbols_.size())) return symbols_[id - 1];
  if (has_boundary_ && id == boundary_id()) return boundary_symbol_;
  fail(Errc::unknown_symbol, "no symbol for id " + std::to_string(id));
}

uint64_t PhonemeInventory::fingerprint() const {
  uint64_t h = kFnvOffset;
  for (const auto& s : symbols_) {
    h = fnv1a64(s, h);
    h = fnv1a64("\n", h);
  }
  h = fnv1a64(has_boundary_ ? "##" : "-", h);
  return h;
}

PhonemeInventory load_inventory(const std::string& path, bool with_boundary) {
  std::ifstream in(path);
  if (!in) fail(Errc::missing_file, "cannot open inventory: " + path);
  std::vector<std::string> symbols;
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    symbols.emplace_back(t);
  }
  if (symbols.empty()) fail(Errc::empty_inventory, "inventory file is empty: " + path);
  return PhonemeInventory::from_symbols(symbols, with_boundary);
}

Transcript parse_cisampa(std::string_view text, const PhonemeInventory& inv) {
  if (!inv.has_boundary()) {
    fail(Errc::no_boundaries, "CISAMPA parsing needs an inventory with a boundary class");
  }
  Transcript out;
  out.source_text = std::string(text);

  auto body = trim(text);
  if (body.starts_with("<s>")) body.remove_prefix(3);
  if (body.ends_with("</s>")) body.remove_suffix(4);
  body = trim(body);

  const int bid = inv.boundary_id();
  std::vector<int>& tokens = out.tokens;
  tokens.push_back(bid);

  size_t i = 0;
  bool after_boundary = true;
  while (i < body.size()) {
    if (body[i] == '#') {
      size_t j = i;
      while (j < body.size() && body[j] == '#') ++j;
      // Any run of '#' acts as one word boundary.
      if (!after_boundary) tokens.push_back(bid);
      else if (tokens.size() > 1) {
        fail(Errc::empty_word, "empty word between boundaries near position " + std::to_string(i));
      }
      after_boundary = true;
      i = j;
      continue;
    }
    size_t j = i;
    while (j < body.size() && body[j] != '#') ++j;
    auto word = trim(body.substr(i, j - i));
    if (word.empty()) {
      if (!after_boundary) tokens.push_back(bid);
      after_boundary = true;
      i = j;
      continue;
    }
    // Split the word into space-separated symbols.
    std::istringstream ws{std::string(word)};
    std::string sym;
    bool any = false;
    while (ws >> sym) {
      const int id = inv.id_of(sym);
      if (id == 0) {
        fail(Errc::unknown_symbol, "unknown symbol \"" + sym + "\" at token position " +
                                       std::to_string(tokens.size()));
      }
      if (id == bid) fail(Errc::invalid_transcript, "boundary symbol inside a word");
      tokens.push_back(id);
      any = true;
    }
    if (any) after_boundary = false;
    i = j;
  }

  if (!after_boundary) tokens.push_back(bid);
  check_transcript_tokens(tokens, inv);
  return out;
}

std::string render_cisampa(const Transcript& t, const PhonemeInventory& inv) {
  check_transcript_tokens(t.tokens, inv);
  const int bid = inv.boundary_id();
  std::string out = "<s>";
  bool word_open = false;
  for (int id : t.tokens) {
    if (id == bid) {
      out += "##";
      word_open = false;
    } else {
      if (word_open) out += ' ';
      out += inv.symbol_of(id);
      word_open = true;
    }
  }
  out += "</s>";
  return out;
}

std::vector<int> parse_labels(std::string_view text, const PhonemeInventory& inv) {
  std::istringstream in{std::string(text)};
  std::vector<int> tokens;
  std::string sym;
  size_t pos = 0;
  while (in >> sym) {
    const int id = inv.id_of(sym);
    if (id == 0) {
      fail(Errc::unknown_symbol,
           "unknown symbol \"" + sym + "\" at position " + std::to_string(pos));
    }
    tokens.push_back(id);
    ++pos;
  }
  if (tokens.empty()) fail(Errc::empty_transcript, "label sequence is empty");
  return tokens;
}

std::vector<int> parse_tokens(std::string_view text, const PhonemeInventory& inv) {
  return inv.has_boundary() ? parse_cisampa(text, inv).tokens : parse_labels(text, inv);
}

std::string render_tokens(const std::vector<int>& tokens, const PhonemeInventory& inv) {
  if (!inv.has_boundary()) {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
      if (i > 0) out += ' ';
      out += inv.symbol_of(tokens[i]);
    }
    return out;
  }
  const int bid = inv.boundary_id();
  std::string out = "<s>##";
  bool word_open = false;
  bool at_boundary = true;
  for (int id : tokens) {
    if (id == bid) {
      if (!at_boundary) out += "##";
      word_open = false;
      at_boundary = true;
    } else {
      if (word_open) out += ' ';
      out += inv.symbol_of(id);
      word_open = true;
      at_boundary = false;
    }
  }
  if (!at_boundary) out += "##";
  out += "</s>";
  return out;
}

Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::missing_file, "cannot open manifest: " + path);
  Manifest m;
  std::string line;
  size_t line_no = 0;
  std::set<std::pair<std::string, std::string>> seen;  // (split, id)
  while (std::getline(in, line)) {
    ++line_no;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    ManifestEntry e;
    std::string fields[4];
    size_t start = 0, field = 0;
    const std::string row(t);
    for (size_t i = 0; i <= row.size(); ++i) {
      if (i == row.size() || row[i] == '\t') {
        if (field < 4) fields[field] = row.substr(start, i - start);
        ++field;
        start = i + 1;
      }
    }
    if (field != 4) {
      fail(Errc::bad_manifest,
           "manifest line " + std::to_string(line_no) + ": expected 4 tab-separated fields");
    }
    e.audio_path = fields[0];
    e.transcript = fields[1];
    e.split = fields[2];
    e.origin = fields[3];
    if (e.audio_path.empty()) {
      fail(Errc::bad_manifest, "manifest line " + std::to_string(line_no) + ": empty audio path");
    }
    if (e.split != "train" && e.split != "dev" && e.split != "test") {
      fail(Errc::bad_manifest, "manifest line " + std::to_string(line_no) + ": bad split \"" +
                                   e.split + "\"");
    }
    e.id = id_from_path(e.audio_path);
    if (!seen.insert({e.split, e.id}).second) {
      fail(Errc::bad_manifest,
           "duplicate utterance id \"" + e.id + "\" in split " + e.split);
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

void save_manifest(const Manifest& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::io_error, "cannot write manifest: " + path);
  for (const auto& e : m.entries) {
    out << e.audio_path << '\t' << e.transcript << '\t' << e.split << '\t' << e.origin << '\n';
  }
  if (!out) fail(Errc::io_error, "short write to manifest: " + path);
}

std::string transcript_text(const ManifestEntry& entry) {
  if (!entry.transcript.empty() && entry.transcript.front() == '@') {
    const std::string ref = entry.transcript.substr(1);
    std::ifstream in(ref);
    if (!in) fail(Errc::missing_file, "cannot open transcript file: " + ref);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  return entry.transcript;
}

std::string id_from_path(std::string_view audio_path) {
  return std::filesystem::path(audio_path).stem().string();
}

}  // namespace strata::corpus
