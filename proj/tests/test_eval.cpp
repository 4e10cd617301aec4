#include <doctest.h>

#include "oracles.hpp"
#include "strata/error.hpp"
#include "strata/eval.hpp"
#include "test_util.hpp"

using namespace strata;
using eval::Alignment;
using eval::EditOp;

namespace {

std::vector<int> random_tokens(Rng& rng, int max_len, int alphabet) {
  const int len = rng.uniform_int(0, max_len);
  std::vector<int> out;
  for (int i = 0; i < len; ++i) out.push_back(rng.uniform_int(1, alphabet));
  return out;
}

}  // namespace

TEST_CASE("align identity and degenerate cases") {
  const std::vector<int> par{1, 2, 3};
  const Alignment same = eval::align(par, par);
  CHECK(same.edits() == 0);
  CHECK(same.matches == 3);

  const Alignment all_del = eval::align(par, {});
  CHECK(all_del.deletions == 3);
  CHECK(all_del.insertions == 0);
  CHECK(all_del.substitutions == 0);

  const Alignment all_ins = eval::align({}, par);
  CHECK(all_ins.insertions == 3);

  const Alignment sub = eval::align({1, 2, 3}, {1, 9, 3});
  CHECK(sub.substitutions == 1);
  CHECK(sub.insertions == 0);
  CHECK(sub.deletions == 0);
}

TEST_CASE("alignment counts stay consistent with the pair list") {
  Rng rng(2024);
  for (int iter = 0; iter < 300; ++iter) {
    const auto ref = random_tokens(rng, 8, 3);
    const auto hyp = random_tokens(rng, 8, 3);
    const Alignment a = eval::align(ref, hyp);
    long i = 0, d = 0, s = 0, m = 0;
    for (const auto& pair : a.pairs) {
      switch (pair.op) {
        case EditOp::kMatch:
          ++m;
          break;
        case EditOp::kSubstitute:
          ++s;
          break;
        case EditOp::kInsert:
          ++i;
          break;
        case EditOp::kDelete:
          ++d;
          break;
      }
    }
    CHECK(i == a.insertions);
    CHECK(d == a.deletions);
    CHECK(s == a.substitutions);
    CHECK(m == a.matches);
    CHECK(a.ref_length() == static_cast<long>(ref.size()));
    CHECK(m + s + i == static_cast<long>(hyp.size()));
  }
}

TEST_CASE("align cost equals the enumerated brute-force distance") {
  Rng rng(555);
  for (int iter = 0; iter < 400; ++iter) {
    const auto ref = random_tokens(rng, 8, 3);
    const auto hyp = random_tokens(rng, 8, 3);
    const Alignment a = eval::align(ref, hyp);
    CHECK(a.edits() == oracle::edit_distance_enumerated(ref, hyp));
  }
}

TEST_CASE("per formula and error path") {
  CHECK(eval::per({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(eval::per({1, 2, 3}, {1, 9, 3}) == doctest::Approx(100.0 / 3.0).epsilon(1e-12));
  // ref=[A], hyp=[B,C]: one substitution plus one insertion over N=1.
  CHECK(eval::per({1}, {2, 3}) == doctest::Approx(200.0).epsilon(1e-12));
  CHECK_THROWS_AS((void)eval::per({}, {1}), Error);
}

TEST_CASE("per(x, x) is zero for random x") {
  Rng rng(77);
  for (int iter = 0; iter < 100; ++iter) {
    auto x = random_tokens(rng, 10, 5);
    if (x.empty()) x.push_back(1);
    CHECK(eval::per(x, x) == 0.0);
  }
}

TEST_CASE("wba basics") {
  const int b = 9;
  const std::vector<int> ref{b, 1, b, 2, b};
  CHECK(eval::wba(ref, ref, b) == 100.0);

  // Every boundary deleted.
  CHECK(eval::wba(ref, {1, 2}, b) == 0.0);

  // Spec example: one of three boundaries lost under minimal alignment.
  CHECK(eval::wba({b, 1, b, 2, b}, {b, 1, 2, b}, b) ==
        doctest::Approx(200.0 / 3.0).epsilon(1e-12));

  CHECK_THROWS_AS((void)eval::wba({1, 2}, {1, 2}, b), Error);
}

TEST_CASE("wba ignores substitutions among interior phonemes") {
  const int b = 9;
  const std::vector<int> ref{b, 1, 2, b, 3, 4, b};
  const std::vector<int> hyp{b, 5, 6, b, 7, 8, b};  // all phonemes wrong, bounds intact
  CHECK(eval::wba(ref, hyp, b) == 100.0);
}

TEST_CASE("trigram accuracy") {
  const std::vector<int> ref{1, 2, 3, 4};
  CHECK(eval::trigram_acc(ref, ref) == 100.0);
  CHECK(eval::trigram_acc(ref, {5, 6, 7, 8}) == 0.0);
  CHECK(eval::trigram_acc({1, 2, 3, 4}, {1, 2, 3}) == 50.0);
  CHECK_THROWS_AS((void)eval::trigram_acc({1, 2}, {1, 2}), Error);

  // Clipped multiset counts: a hypothesis with the same trigram repeated
  // cannot score above the reference count, and the value caps at 100.
  const std::vector<int> rep_ref{1, 1, 1, 1};  // trigram (1,1,1) twice
  const std::vector<int> rep_hyp{1, 1, 1, 1, 1, 1};
  CHECK(eval::trigram_acc(rep_ref, rep_hyp) == 100.0);
  Rng rng(3);
  for (int iter = 0; iter < 100; ++iter) {
    auto ref2 = random_tokens(rng, 9, 3);
    if (ref2.size() < 3) continue;
    const auto hyp2 = random_tokens(rng, 9, 3);
    const double acc = eval::trigram_acc(ref2, hyp2);
    CHECK(acc >= 0.0);
    CHECK(acc <= 100.0);
  }
}

TEST_CASE("pooled aggregation uses counts, not ratio averages") {
  std::vector<eval::UtteranceEval> utts;
  utts.push_back(eval::evaluate_tokens("a", {1}, {1}, 0));          // N=1, PER 0
  utts.push_back(eval::evaluate_tokens("b", {1, 2, 3}, {}, 0));     // N=3, PER 100
  const auto report = eval::pool(std::move(utts));
  CHECK(report.per == doctest::Approx(75.0).epsilon(1e-12));
  CHECK(report.evaluated == 2);
}

TEST_CASE("single-utterance aggregate equals the per-utterance values") {
  const int b = 9;
  auto u = eval::evaluate_tokens("solo", {b, 1, 2, b}, {b, 1, b}, b);
  const double per_u = u.per, wba_u = u.wba, tri_u = u.trigram;
  std::vector<eval::UtteranceEval> utts{u};
  const auto report = eval::pool(std::move(utts));
  CHECK(report.per == per_u);
  CHECK(report.wba == wba_u);
  CHECK(report.trigram == tri_u);
}

TEST_CASE("report writer emits one record per utterance plus a summary") {
  testutil::TempDir tmp("report");
  std::vector<eval::UtteranceEval> utts;
  utts.push_back(eval::evaluate_tokens("u1", {1, 2, 3}, {1, 2, 3}, 0));
  eval::UtteranceEval broken;
  broken.id = "u2";
  broken.error = "decode failed";
  utts.push_back(broken);
  const auto report = eval::pool(std::move(utts));
  CHECK(report.failed == 1);
  eval::write_report(report, tmp.str("r.tsv"));
  const std::string text = testutil::read_file_bytes(tmp.str("r.tsv"));
  CHECK(text.find("u1\t0.00") != std::string::npos);
  CHECK(text.find("u2\tERROR") != std::string::npos);
  CHECK(text.find("SUMMARY\t0.00") != std::string::npos);
  const std::string table = eval::format_report(report);
  CHECK(table.find("TOTAL") != std::string::npos);
}
