// strata/eval.cpp
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

#include "strata/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "strata/ctc.hpp"
#include "strata/error.hpp"
#include "strata/parallel.hpp"

namespace strata::eval {

namespace {

// Backtrace direction per DP cell, chosen with the fixed tie-break.
enum class Dir : unsigned char { kDone, kDiag, kUp, kLeft };

}  // namespace

Alignment align(const std::vector<int>& ref, const std::vector<int>& hyp) {
  const size_t n = ref.size(), m = hyp.size();
  std::vector<int> cost((n + 1) * (m + 1));
  std::vector<Dir> dir((n + 1) * (m + 1));
  auto at = [m](size_t i, size_t j) { return i * (m + 1) + j; };

  for (size_t i = 0; i <= n; ++i) cost[at(i, 0)] = static_cast<int>(i);
  for (size_t j = 0; j <= m; ++j) cost[at(0, j)] = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i) dir[at(i, 0)] = Dir::kUp;
  for (size_t j = 1; j <= m; ++j) dir[at(0, j)] = Dir::kLeft;

  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      const bool same = ref[i - 1] == hyp[j - 1];
      const int diag = cost[at(i - 1, j - 1)] + (same ? 0 : 1);
      const int up = cost[at(i - 1, j)] + 1;    // delete ref token
      const int left = cost[at(i, j - 1)] + 1;  // insert hyp token
      // Tie-break priority: match > substitute > delete > insert.
      int best = diag;
      Dir d = Dir::kDiag;
      if (up < best) {
        best = up;
        d = Dir::kUp;
      }
      if (left < best) {
        best = left;
        d = Dir::kLeft;
      }
      cost[at(i, j)] = best;
      dir[at(i, j)] = d;
    }
  }

  Alignment out;
  size_t i = n, j = m;
  while (i > 0 || j > 0) {
    switch (dir[at(i, j)]) {
      case Dir::kDiag: {
        const bool same = ref[i - 1] == hyp[j - 1];
        out.pairs.push_back({same ? EditOp::kMatch : EditOp::kSubstitute,
                             ref[i - 1], hyp[j - 1]});
        same ? ++out.matches : ++out.substitutions;
        --i;
        --j;
        break;
      }
      case Dir::kUp:
        out.pairs.push_back({EditOp::kDelete, ref[i - 1], -1});
        ++out.deletions;
        --i;
        break;
      case Dir::kLeft:
        out.pairs.push_back({EditOp::kInsert, -1, hyp[j - 1]});
        ++out.insertions;
        --j;
        break;
      case Dir::kDone:
        fail(Errc::shape_mismatch, "alignment backtrace escaped the grid");
    }
  }
  std::reverse(out.pairs.begin(), out.pairs.end());
  return out;
}

double per(const std::vector<int>& ref, const std::vector<int>& hyp) {
  if (ref.empty()) fail(Errc::empty_reference, "PER needs a non-empty reference");
  const Alignment a = align(ref, hyp);
  return 100.0 * static_cast<double>(a.edits()) / static_cast<double>(ref.size());
}

double wba(const std::vector<int>& ref, const std::vector<int>& hyp, int boundary_id) {
  long total = 0;
  for (int id : ref) total += id == boundary_id ? 1 : 0;
  if (total == 0) fail(Errc::no_boundaries, "WBA needs at least one boundary in the reference");
  const Alignment a = align(ref, hyp);
  long correct = 0;
  for (const auto& pair : a.pairs) {
    if (pair.op == EditOp::kMatch && pair.ref_token == boundary_id) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

namespace {

struct Trigram {
  int a, b, c;
  bool operator<(const Trigram& o) const {
    return std::tie(a, b, c) < std::tie(o.a, o.b, o.c);
  }
};

std::map<Trigram, long> trigram_counts(const std::vector<int>& tokens) {
  std::map<Trigram, long> counts;
  for (size_t i = 0; i + 2 < tokens.size(); ++i) {
    ++counts[{tokens[i], tokens[i + 1], tokens[i + 2]}];
  }
  return counts;
}

std::pair<long, long> trigram_hits(const std::vector<int>& ref, const std::vector<int>& hyp) {
  const auto ref_counts = trigram_counts(ref);
  const auto hyp_counts = trigram_counts(hyp);
  long total = 0, hit = 0;
  for (const auto& [gram, count] : ref_counts) total += count;
  for (const auto& [gram, count] : hyp_counts) {
    auto it = ref_counts.find(gram);
    if (it != ref_counts.end()) hit += std::min(count, it->second);
  }
  return {hit, total};
}

}  // namespace

double trigram_acc(const std::vector<int>& ref, const std::vector<int>& hyp) {
  if (ref.size() < 3) fail(Errc::empty_reference, "trigram accuracy needs a reference of length >= 3");
  const auto [hit, total] = trigram_hits(ref, hyp);
  return std::min(100.0, 100.0 * static_cast<double>(hit) / static_cast<double>(total));
}

UtteranceEval evaluate_tokens(const std::string& id, const std::vector<int>& ref,
                              const std::vector<int>& hyp, int boundary_id) {
  UtteranceEval e;
  e.id = id;
  if (ref.empty()) {
    e.error = "empty reference";
    return e;
  }
  const Alignment a = align(ref, hyp);
  e.insertions = a.insertions;
  e.deletions = a.deletions;
  e.substitutions = a.substitutions;
  e.ref_length = static_cast<long>(ref.size());
  e.per = 100.0 * static_cast<double>(a.edits()) / static_cast<double>(ref.size());
  if (boundary_id > 0) {
    for (int token : ref) e.boundaries_total += token == boundary_id ? 1 : 0;
    if (e.boundaries_total > 0) {
      for (const auto& pair : a.pairs) {
        if (pair.op == EditOp::kMatch && pair.ref_token == boundary_id) ++e.boundaries_correct;
      }
      e.wba = 100.0 * static_cast<double>(e.boundaries_correct) /
              static_cast<double>(e.boundaries_total);
      e.has_wba = true;
    }
  }
  if (ref.size() >= 3) {
    const auto [hit, total] = trigram_hits(ref, hyp);
    e.trigrams_hit = hit;
    e.trigrams_total = total;
    e.trigram = std::min(100.0, 100.0 * static_cast<double>(hit) / static_cast<double>(total));
    e.has_trigram = true;
  }
  return e;
}

EvalReport pool(std::vector<UtteranceEval> utterances) {
  EvalReport report;
  report.utterances = std::move(utterances);
  long edits = 0, ref_len = 0, b_correct = 0, b_total = 0, t_hit = 0, t_total = 0;
  for (const auto& u : report.utterances) {
    if (!u.error.empty()) {
      ++report.failed;
      continue;
    }
    ++report.evaluated;
    edits += u.insertions + u.deletions + u.substitutions;
    ref_len += u.ref_length;
    b_correct += u.boundaries_correct;
    b_total += u.boundaries_total;
    t_hit += u.trigrams_hit;
    t_total += u.trigrams_total;
  }
  report.per = ref_len > 0 ? 100.0 * static_cast<double>(edits) / static_cast<double>(ref_len) : 0.0;
  report.has_wba = b_total > 0;
  report.wba = b_total > 0 ? 100.0 * static_cast<double>(b_correct) / static_cast<double>(b_total) : 0.0;
  report.has_trigram = t_total > 0;
  report.trigram =
      t_total > 0 ? std::min(100.0, 100.0 * static_cast<double>(t_hit) / static_cast<double>(t_total))
                  : 0.0;
  return report;
}

EvalReport evaluate_corpus(const net::Model& model, const corpus::Manifest& manifest,
                           const corpus::PhonemeInventory& inv, const dsp::DspConfig& dsp_cfg) {
  if (manifest.entries.empty()) fail(Errc::bad_manifest, "cannot evaluate an empty manifest");

  const int boundary = inv.has_boundary() ? inv.boundary_id() : 0;
  EvalReport report;
  report.utterances.resize(manifest.entries.size());

  const int n = static_cast<int>(manifest.entries.size());
  const bool go_par = par::enabled() && n > 1;
#pragma omp parallel for schedule(dynamic) if (go_par)
  for (int i = 0; i < n; ++i) {
    const auto& entry = manifest.entries[i];
    UtteranceEval& result = report.utterances[i];
    try {
      const auto ref = corpus::parse_tokens(corpus::transcript_text(entry), inv);
      const auto audio = corpus::load_wav(entry.audio_path);
      const auto feats = dsp::mfcc(audio, dsp_cfg);
      const Matrix logprobs = net::forward(model, feats.matrix);
      const auto hyp = ctc::greedy_decode(logprobs);
      result = evaluate_tokens(entry.id, ref, hyp, boundary);
    } catch (const Error& err) {
      result.id = entry.id;
      result.error = err.what();
    }
  }
  return pool(std::move(report.utterances));
}

namespace {

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

void write_report(const EvalReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::io_error, "cannot write report: " + path);
  out << "id\tper\twba\ttrigram\tI\tD\tS\tN\n";
  for (const auto& u : report.utterances) {
    if (!u.error.empty()) {
      out << u.id << "\tERROR\t" << u.error << "\n";
      continue;
    }
    out << u.id << '\t' << fmt2(u.per) << '\t' << (u.has_wba ? fmt2(u.wba) : "-") << '\t'
        << (u.has_trigram ? fmt2(u.trigram) : "-") << '\t' << u.insertions << '\t' << u.deletions
        << '\t' << u.substitutions << '\t' << u.ref_length << '\n';
  }
  out << "SUMMARY\t" << fmt2(report.per) << '\t' << (report.has_wba ? fmt2(report.wba) : "-")
      << '\t' << (report.has_trigram ? fmt2(report.trigram) : "-") << "\t-\t-\t-\t-\n";
  if (!out) fail(Errc::io_error, "short write to report: " + path);
}

std::string format_report(const EvalReport& report) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-24s %8s %8s %8s %5s %5s %5s %6s\n", "utterance", "PER",
                "WBA", "3gram", "I", "D", "S", "N");
  out << line;
  for (const auto& u : report.utterances) {
    if (!u.error.empty()) {
      std::snprintf(line, sizeof(line), "%-24s ERROR: %s\n", u.id.c_str(), u.error.c_str());
      out << line;
      continue;
    }
    std::snprintf(line, sizeof(line), "%-24s %8.2f %8s %8s %5ld %5ld %5ld %6ld\n", u.id.c_str(),
                  u.per, u.has_wba ? fmt2(u.wba).c_str() : "-",
                  u.has_trigram ? fmt2(u.trigram).c_str() : "-", u.insertions, u.deletions,
                  u.substitutions, u.ref_length);
    out << line;
  }
  std::snprintf(line, sizeof(line), "%-24s %8.2f %8s %8s  (%ld utterances, %ld failed)\n",
                "TOTAL", report.per, report.has_wba ? fmt2(report.wba).c_str() : "-",
                report.has_trigram ? fmt2(report.trigram).c_str() : "-", report.evaluated,
                report.failed);
  out << line;
  return out.str();
}

}  // namespace strata::eval
