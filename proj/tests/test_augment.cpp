#include <doctest.h>

#include <cmath>

#include "strata/augment.hpp"
#include "strata/error.hpp"
#include "test_util.hpp"

using namespace strata;
using augment::Kind;
using augment::Spec;
using corpus::AudioSignal;

namespace {

AudioSignal random_signal(size_t n, uint64_t seed, int rate = 16000) {
  AudioSignal s;
  s.sample_rate = rate;
  s.id = "u" + std::to_string(seed);
  Rng rng(seed);
  for (size_t i = 0; i < n; ++i) s.samples.push_back(rng.uniform(-0.6, 0.6));
  return s;
}

bool samples_equal(const AudioSignal& a, const AudioSignal& b) {
  return a.samples == b.samples;
}

}  // namespace

TEST_CASE("normalize scales the peak to exactly 1.0") {
  AudioSignal s = random_signal(4000, 1);
  for (double& v : s.samples) v *= 0.25 / 0.6;
  const auto out = augment::apply(augment::default_spec(Kind::kNormalize, 0), s);
  double peak = 0.0;
  for (double v : out.samples) peak = std::max(peak, std::abs(v));
  CHECK(peak == 1.0);
  CHECK(out.samples.size() == s.samples.size());
}

TEST_CASE("speed length law: out = round(in / factor)") {
  Spec spec = augment::default_spec(Kind::kSpeed, 77);
  for (int iter = 0; iter < 20; ++iter) {
    spec.seed = 1000 + iter;
    const auto s = random_signal(16000, iter + 1);
    const auto out = augment::apply(spec, s);
    // Recover the drawn factor the same way apply does.
    Rng rng(spec.seed);
    const double factor = rng.uniform(spec.lo, spec.hi);
    CHECK(static_cast<long>(out.samples.size()) == std::llround(16000.0 / factor));
  }
  // A factor pinned to 2.0 via a narrowed range is out of documented bounds.
  spec.lo = spec.hi = 2.0;
  CHECK_THROWS_AS((void)augment::apply(spec, random_signal(16000, 5)), Error);
}

TEST_CASE("crop length law: out = in - round(f * in)") {
  Spec spec = augment::default_spec(Kind::kCrop, 3);
  for (int iter = 0; iter < 20; ++iter) {
    spec.seed = 2000 + iter;
    const auto s = random_signal(16000, iter + 41);
    const auto out = augment::apply(spec, s);
    Rng rng(spec.seed);
    const double f = rng.uniform(spec.lo, spec.hi);
    CHECK(static_cast<long>(out.samples.size()) == 16000 - std::llround(f * 16000.0));
  }
}

TEST_CASE("shift moves content and zero-pads the vacated region") {
  // Pin the shift to +10% via the range.
  Spec spec = augment::default_spec(Kind::kShift, 9);
  spec.lo = spec.hi = 0.10;
  const auto s = random_signal(16000, 17);
  const auto out = augment::apply(spec, s);
  REQUIRE(out.samples.size() == s.samples.size());
  for (int i = 0; i < 1600; ++i) CHECK(out.samples[i] == 0.0);
  for (int i = 1600; i < 16000; ++i) CHECK(out.samples[i] == s.samples[i - 1600]);

  Spec left = augment::default_spec(Kind::kShift, 10);
  left.lo = left.hi = -0.10;
  const auto out_left = augment::apply(left, s);
  for (int i = 0; i < 14400; ++i) CHECK(out_left.samples[i] == s.samples[i + 1600]);
  for (int i = 14400; i < 16000; ++i) CHECK(out_left.samples[i] == 0.0);
}

TEST_CASE("length-preserving transforms preserve length exactly") {
  for (Kind kind : {Kind::kLoudness, Kind::kMask, Kind::kNoise, Kind::kShift, Kind::kVtlp,
                    Kind::kNormalize, Kind::kPitch}) {
    Spec spec = augment::default_spec(kind, 4242);
    const auto s = random_signal(12000, 99);
    const auto out = augment::apply(spec, s);
    CHECK(out.samples.size() == s.samples.size());
    CHECK(out.sample_rate == s.sample_rate);
  }
}

TEST_CASE("every transform maps finite input to finite capped output") {
  for (Kind kind : augment::all_kinds()) {
    for (uint64_t seed : {1ull, 2ull, 3ull}) {
      const auto out = augment::apply(augment::default_spec(kind, seed), random_signal(8000, seed));
      for (double v : out.samples) {
        CHECK(std::isfinite(v));
        CHECK(std::abs(v) <= 1.05);
      }
    }
  }
}

TEST_CASE("apply is reproducible from the spec seed") {
  for (Kind kind : augment::all_kinds()) {
    const Spec spec = augment::default_spec(kind, 31337);
    const auto s = random_signal(9000, 8);
    CHECK(samples_equal(augment::apply(spec, s), augment::apply(spec, s)));
  }
}

TEST_CASE("apply rejects empty and too-short signals") {
  AudioSignal empty;
  empty.sample_rate = 16000;
  try {
    (void)augment::apply(augment::default_spec(Kind::kNoise, 1), empty);
    FAIL("expected empty_signal");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_signal);
  }
  try {
    (void)augment::apply(augment::default_spec(Kind::kCrop, 1), random_signal(800, 2));
    FAIL("expected signal_too_short");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::signal_too_short);
  }
}

TEST_CASE("loudness attenuates the loudest window only") {
  AudioSignal s;
  s.sample_rate = 16000;
  s.samples.assign(16000, 0.05);
  for (int i = 6000; i < 7600; ++i) s.samples[i] = 0.8;  // loud 100 ms
  const auto out = augment::apply(augment::default_spec(Kind::kLoudness, 5), s);
  CHECK(out.samples[6500] < 0.8 * 0.95);
  CHECK(out.samples[100] == s.samples[100]);
  CHECK(out.samples[15000] == s.samples[15000]);
}

TEST_CASE("mask replaces a section at roughly signal RMS") {
  AudioSignal s;
  s.sample_rate = 16000;
  s.samples.assign(16000, 0.0);
  for (size_t i = 0; i < s.samples.size(); ++i) {
    s.samples[i] = 0.4 * std::sin(2.0 * M_PI * 440.0 * i / 16000.0);
  }
  const auto out = augment::apply(augment::default_spec(Kind::kMask, 6), s);
  size_t changed = 0;
  for (size_t i = 0; i < s.samples.size(); ++i) changed += out.samples[i] != s.samples[i];
  CHECK(changed >= 700);   // at least 5% replaced
  CHECK(changed <= 2500);  // at most 15% (and nothing else)
}

TEST_CASE("noise keeps the clean signal recognizable at 10-30 dB SNR") {
  const auto s = random_signal(16000, 12);
  const auto out = augment::apply(augment::default_spec(Kind::kNoise, 7), s);
  double err = 0.0, sig = 0.0;
  for (size_t i = 0; i < s.samples.size(); ++i) {
    const double d = out.samples[i] - s.samples[i];
    err += d * d;
    sig += s.samples[i] * s.samples[i];
  }
  const double snr_db = 10.0 * std::log10(sig / err);
  CHECK(snr_db > 9.0);
  CHECK(snr_db < 31.0);
}

TEST_CASE("plan is deterministic and counts copies") {
  corpus::Manifest m;
  m.entries.push_back({"/a/u1.wav", "x", "train", "original", "u1"});
  m.entries.push_back({"/a/u2.wav", "x", "train", "original", "u2"});
  m.entries.push_back({"/a/u3.wav", "x", "train", "original", "u3"});
  m.entries.push_back({"/a/u4.wav", "x", "train", "original", "u4"});
  m.entries.push_back({"/a/u5.wav", "x", "train", "original", "u5"});

  const auto p1 = augment::plan(42, m, 10);
  const auto p2 = augment::plan(42, m, 10);
  CHECK(p1.items.size() == 50);
  REQUIRE(p1.items.size() == p2.items.size());
  for (size_t i = 0; i < p1.items.size(); ++i) {
    CHECK(p1.items[i].source_id == p2.items[i].source_id);
    CHECK(p1.items[i].copy_index == p2.items[i].copy_index);
    REQUIRE(p1.items[i].specs.size() == p2.items[i].specs.size());
    CHECK(p1.items[i].specs.size() >= 1);
    CHECK(p1.items[i].specs.size() <= 3);
    for (size_t k = 0; k < p1.items[i].specs.size(); ++k) {
      CHECK(p1.items[i].specs[k].kind == p2.items[i].specs[k].kind);
      CHECK(p1.items[i].specs[k].seed == p2.items[i].specs[k].seed);
    }
    // Kinds within one copy are distinct.
    for (size_t a = 0; a < p1.items[i].specs.size(); ++a) {
      for (size_t b = a + 1; b < p1.items[i].specs.size(); ++b) {
        CHECK(p1.items[i].specs[a].kind != p1.items[i].specs[b].kind);
      }
    }
  }
  CHECK_THROWS_AS((void)augment::plan(42, m, 0), Error);
}

TEST_CASE("augment_corpus writes copies, keeps transcripts, stays reproducible") {
  testutil::TempDir tmp("aug");
  // One real utterance on disk.
  const auto s = random_signal(16000, 70);
  const std::string wav = tmp.str("u1.wav");
  corpus::write_wav16(s, wav);
  corpus::Manifest m;
  m.entries.push_back({wav, "<s>##P A##</s>", "train", "original", "u1"});

  const auto p = augment::plan(7, m, 10);
  const auto r1 = augment::augment_corpus(p, m, tmp.str("out1"));
  CHECK(r1.failures == 0);
  CHECK(r1.manifest.entries.size() == 11);
  CHECK(r1.manifest.entries[0].origin == "original");
  for (size_t i = 1; i < r1.manifest.entries.size(); ++i) {
    const auto& e = r1.manifest.entries[i];
    CHECK(e.origin.rfind("augmented:", 0) == 0);
    CHECK(e.transcript == "<s>##P A##</s>");
    CHECK(e.split == "train");
  }

  // Byte-level reproducibility of the generated WAVs.
  const auto r2 = augment::augment_corpus(p, m, tmp.str("out2"));
  for (size_t i = 1; i < r1.manifest.entries.size(); ++i) {
    CHECK(testutil::read_file_bytes(r1.manifest.entries[i].audio_path) ==
          testutil::read_file_bytes(r2.manifest.entries[i].audio_path));
  }
}

TEST_CASE("augment_corpus reports failures per utterance and keeps going") {
  testutil::TempDir tmp("augf");
  const auto s = random_signal(16000, 71);
  corpus::write_wav16(s, tmp.str("ok.wav"));
  corpus::Manifest m;
  m.entries.push_back({tmp.str("gone.wav"), "x", "train", "original", "gone"});
  m.entries.push_back({tmp.str("ok.wav"), "x", "train", "original", "ok"});
  const auto p = augment::plan(9, m, 2);
  const auto result = augment::augment_corpus(p, m, tmp.str("out"));
  CHECK(result.failures == 2);              // both copies of the missing file
  CHECK(result.manifest.entries.size() == 4);  // 2 originals + 2 good copies
  CHECK(result.errors.size() == 2);
}
