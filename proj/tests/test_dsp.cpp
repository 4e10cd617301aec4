#include <doctest.h>

#include <cmath>

#include "strata/dsp.hpp"
#include "strata/error.hpp"
#include "test_util.hpp"

using namespace strata;
using corpus::AudioSignal;
using dsp::DspConfig;

namespace {

AudioSignal make_signal(std::vector<double> samples, int rate = 16000) {
  AudioSignal s;
  s.samples = std::move(samples);
  s.sample_rate = rate;
  s.id = "t";
  return s;
}

AudioSignal random_signal(size_t n, int rate, uint64_t seed) {
  AudioSignal s;
  s.sample_rate = rate;
  s.id = "r";
  Rng rng(seed);
  for (size_t i = 0; i < n; ++i) s.samples.push_back(rng.uniform(-0.8, 0.8));
  return s;
}

}  // namespace

TEST_CASE("pre_emphasize recurrence") {
  const auto y = dsp::pre_emphasize(make_signal({1.0, 1.0, 1.0}), 0.97);
  CHECK(y.samples[0] == doctest::Approx(1.0));
  CHECK(y.samples[1] == doctest::Approx(0.03));
  CHECK(y.samples[2] == doctest::Approx(0.03));

  const auto id = dsp::pre_emphasize(make_signal({0.3, -0.2, 0.5}), 0.0);
  CHECK(id.samples == std::vector<double>{0.3, -0.2, 0.5});

  const auto z = dsp::pre_emphasize(make_signal(std::vector<double>(10, 0.0)), 0.97);
  for (double v : z.samples) CHECK(v == 0.0);
}

TEST_CASE("framing arithmetic and errors") {
  DspConfig cfg;
  CHECK(dsp::make_frames(random_signal(16000, 16000, 1), cfg).size() == 40);
  CHECK(dsp::make_frames(random_signal(16399, 16000, 2), cfg).size() == 40);
  try {
    (void)dsp::make_frames(random_signal(399, 16000, 3), cfg);
    FAIL("expected signal_too_short");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::signal_too_short);
  }
}

TEST_CASE("frame count formula holds for random lengths and rates") {
  Rng rng(17);
  DspConfig cfg;
  for (int iter = 0; iter < 50; ++iter) {
    const int rate = 1000 * rng.uniform_int(4, 48);
    const int frame_samples = cfg.frame_samples(rate);
    const size_t n = static_cast<size_t>(rng.uniform_int(frame_samples, 8 * frame_samples));
    const auto frames = dsp::make_frames(random_signal(n, rate, iter), cfg);
    CHECK(frames.size() == n / static_cast<size_t>(frame_samples));
    for (const auto& f : frames) CHECK(f.size() == static_cast<size_t>(frame_samples));
  }
}

TEST_CASE("periodic Hann window") {
  std::vector<double> ones(4, 1.0);
  dsp::apply_hann(ones);
  CHECK(ones[0] == doctest::Approx(0.0));
  CHECK(ones[1] == doctest::Approx(0.5));
  CHECK(ones[2] == doctest::Approx(1.0));
  CHECK(ones[3] == doctest::Approx(0.5));

  std::vector<double> zeros(16, 0.0);
  dsp::apply_hann(zeros);
  for (double v : zeros) CHECK(v == 0.0);
}

TEST_CASE("power spectrum of a bin-aligned cosine concentrates at that bin") {
  const int n = 256;
  const int bin = 19;
  std::vector<double> frame(n);
  for (int i = 0; i < n; ++i) frame[i] = std::cos(2.0 * M_PI * bin * i / n);
  const auto power = dsp::power_spectrum(frame, n);
  REQUIRE(static_cast<int>(power.size()) == n / 2 + 1);
  // Analytic DFT of a bin-aligned cosine: |X[bin]| = n/2, so the
  // 1/n-scaled power is n/4.
  CHECK(power[bin] == doctest::Approx(n / 4.0).epsilon(1e-12));
  for (int k = 0; k <= n / 2; ++k) {
    if (k != bin) CHECK(power[k] < 1e-10 * power[bin]);
  }
}

TEST_CASE("power spectrum zero input and error path") {
  const auto zero = dsp::power_spectrum(std::vector<double>(128, 0.0), 128);
  for (double v : zero) CHECK(v == 0.0);
  CHECK_THROWS_AS((void)dsp::power_spectrum(std::vector<double>(10, 1.0), 48), Error);
}

TEST_CASE("Parseval identity for the scaled power spectrum") {
  // With P[k] = |X[k]|^2 / n, mirroring the interior bins recovers
  // sum_k |X[k]|^2 / n = sum_n x[n]^2 exactly.
  Rng rng(5);
  for (int iter = 0; iter < 10; ++iter) {
    const int n = 512;
    std::vector<double> frame(n);
    for (double& v : frame) v = rng.uniform(-1.0, 1.0);
    const auto power = dsp::power_spectrum(frame, n);
    double full = power[0] + power[n / 2];
    for (int k = 1; k < n / 2; ++k) full += 2.0 * power[k];
    double energy = 0.0;
    for (double v : frame) energy += v * v;
    CHECK(full == doctest::Approx(energy).epsilon(1e-9));
  }
}

TEST_CASE("mel scale formula") {
  CHECK(dsp::hz_to_mel(0.0) == doctest::Approx(0.0));
  CHECK(dsp::hz_to_mel(700.0) == doctest::Approx(2595.0 * std::log10(2.0)).epsilon(1e-12));
  CHECK(dsp::hz_to_mel(700.0) == doctest::Approx(781.17).epsilon(1e-4));
  CHECK(dsp::mel_to_hz(dsp::hz_to_mel(1234.5)) == doctest::Approx(1234.5).epsilon(1e-12));
}

TEST_CASE("mel filterbank triangles stay inside their neighbors' centers") {
  DspConfig cfg;
  const int rate = 16000;
  const Matrix fb = dsp::mel_filterbank(cfg, rate);
  REQUIRE(fb.rows() == cfg.n_mel_filters);
  REQUIRE(fb.cols() == cfg.resolved_fft_size(rate) / 2 + 1);

  const double mel_lo = dsp::hz_to_mel(0.0);
  const double mel_hi = dsp::hz_to_mel(rate / 2.0);
  const int m = cfg.n_mel_filters;
  const double bin_hz = static_cast<double>(rate) / cfg.resolved_fft_size(rate);
  for (int f = 0; f < m; ++f) {
    const double left = dsp::mel_to_hz(mel_lo + (mel_hi - mel_lo) * f / (m + 1));
    const double right = dsp::mel_to_hz(mel_lo + (mel_hi - mel_lo) * (f + 2) / (m + 1));
    bool any = false;
    for (int k = 0; k < fb.cols(); ++k) {
      if (fb(f, k) > 0.0) {
        any = true;
        const double hz = k * bin_hz;
        CHECK(hz > left);
        CHECK(hz < right);
      }
      CHECK(fb(f, k) >= 0.0);
    }
    CHECK(any);
  }
}

TEST_CASE("mel filterbank degenerates with too many filters") {
  DspConfig cfg;
  cfg.n_mel_filters = 2000;
  cfg.n_mfcc = 13;
  try {
    (void)dsp::mel_filterbank(cfg, 16000);
    FAIL("expected degenerate_filterbank");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::degenerate_filterbank);
  }
}

TEST_CASE("mfcc shape and determinism") {
  DspConfig cfg;
  const auto signal = random_signal(16000, 16000, 21);
  const auto f1 = dsp::mfcc(signal, cfg);
  CHECK(f1.matrix.rows() == 40);
  CHECK(f1.matrix.cols() == 13);
  CHECK(f1.matrix.all_finite());
  REQUIRE(f1.frame_times.size() == 40);
  CHECK(f1.frame_times[1] == doctest::Approx(0.025));

  const auto f2 = dsp::mfcc(signal, cfg);
  CHECK(f1.matrix == f2.matrix);
}

TEST_CASE("mfcc of digital silence is the constant-vector DCT") {
  DspConfig cfg;
  const auto feats = dsp::mfcc(make_signal(std::vector<double>(8000, 0.0)), cfg);
  REQUIRE(feats.matrix.rows() == 20);
  // Orthonormal DCT-II of a constant vector v: c0 = sqrt(M) * v, rest 0.
  const double expected0 = std::sqrt(static_cast<double>(cfg.n_mel_filters)) * std::log(1e-10);
  for (int t = 0; t < feats.matrix.rows(); ++t) {
    CHECK(feats.matrix(t, 0) == doctest::Approx(expected0).epsilon(1e-12));
    for (int k = 1; k < feats.matrix.cols(); ++k) {
      CHECK(std::abs(feats.matrix(t, k)) < 1e-9);
    }
    for (int k = 0; k < feats.matrix.cols(); ++k) {
      CHECK(feats.matrix(t, k) == feats.matrix(0, k));  // frames identical
    }
  }
}

TEST_CASE("time shift by whole frames permutes mfcc rows (no pre-emphasis)") {
  DspConfig cfg;
  cfg.pre_emphasis = 0.0;
  const int frame = cfg.frame_samples(16000);
  auto base = random_signal(static_cast<size_t>(frame) * 8, 16000, 33);
  const auto feats = dsp::mfcc(base, cfg);

  const int shift_frames = 3;
  AudioSignal rotated = base;
  std::rotate(rotated.samples.begin(), rotated.samples.begin() + shift_frames * frame,
              rotated.samples.end());
  const auto rotated_feats = dsp::mfcc(rotated, cfg);
  REQUIRE(rotated_feats.matrix.rows() == feats.matrix.rows());
  for (int t = 0; t < feats.matrix.rows(); ++t) {
    const int src = (t + shift_frames) % feats.matrix.rows();
    for (int k = 0; k < feats.matrix.cols(); ++k) {
      CHECK(rotated_feats.matrix(t, k) == feats.matrix(src, k));
    }
  }
}

TEST_CASE("log_mel exposes the pre-DCT matrix") {
  DspConfig cfg;
  const auto signal = random_signal(8000, 16000, 8);
  const auto lm = dsp::log_mel(signal, cfg);
  CHECK(lm.matrix.rows() == 20);
  CHECK(lm.matrix.cols() == cfg.n_mel_filters);
  CHECK(lm.matrix.all_finite());
}

TEST_CASE("feature files round trip") {
  testutil::TempDir tmp("feat");
  DspConfig cfg;
  const auto feats = dsp::mfcc(random_signal(8000, 16000, 55), cfg);
  dsp::write_features(feats, tmp.str("u.feat"));
  const auto back = dsp::read_features(tmp.str("u.feat"));
  CHECK(back.matrix == feats.matrix);
  CHECK_THROWS_AS((void)dsp::read_features(tmp.str("missing.feat")), Error);
}

TEST_CASE("mfcc stays finite on extreme inputs") {
  DspConfig cfg;
  Rng rng(3);
  AudioSignal s;
  s.sample_rate = 16000;
  for (int i = 0; i < 4000; ++i) {
    const double r = rng.uniform();
    s.samples.push_back(r < 0.3 ? 0.0 : (r < 0.6 ? 1.0 : -1.0));
  }
  CHECK(dsp::mfcc(s, cfg).matrix.all_finite());
}
