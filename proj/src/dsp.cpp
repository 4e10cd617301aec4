// strata/dsp.cpp
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

#include "strata/dsp.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "strata/error.hpp"
#include "strata/parallel.hpp"

namespace strata::dsp {

namespace {

constexpr char kFeatureMagic[8] = {'S', 'T', 'R', 'A', 'F', 'E', 'A', 'T'};
constexpr uint32_t kFeatureVersion = 1;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Orthonormal DCT-II of x, keeping the first n_keep coefficients.
void dct2_ortho(const std::vector<double>& x, int n_keep, double* out) {
  const int n = static_cast<int>(x.size());
  const double s0 = std::sqrt(1.0 / n);
  const double sk = std::sqrt(2.0 / n);
  for (int k = 0; k < n_keep; ++k) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      acc += x[i] * std::cos(M_PI * (2.0 * i + 1.0) * k / (2.0 * n));
    }
    out[k] = (k == 0 ? s0 : sk) * acc;
  }
}

// Shared front of mfcc() and log_mel(): framing through log-mel energies.
Matrix log_mel_matrix(const corpus::AudioSignal& s, const DspConfig& cfg,
                      std::vector<double>* frame_times) {
  cfg.validate(s.sample_rate);
  const auto emphasized = pre_emphasize(s, cfg.pre_emphasis);
  auto frames = make_frames(emphasized, cfg);
  const int fft_size = cfg.resolved_fft_size(s.sample_rate);
  const Matrix fb = mel_filterbank(cfg, s.sample_rate);
  const int t_total = static_cast<int>(frames.size());

  Matrix out(t_total, cfg.n_mel_filters);
  frame_times->resize(t_total);
  const double frame_sec = cfg.frame_samples(s.sample_rate) / static_cast<double>(s.sample_rate);

  const bool go_par = par::enabled() && t_total >= 8;
#pragma omp parallel for schedule(static) if (go_par)
  for (int t = 0; t < t_total; ++t) {
    auto frame = frames[t];
    apply_hann(frame);
    const auto power = power_spectrum(frame, fft_size);
    for (int m = 0; m < cfg.n_mel_filters; ++m) {
      double e = 0.0;
      const double* w = fb.data() + static_cast<size_t>(m) * fb.cols();
      for (size_t k = 0; k < power.size(); ++k) e += w[k] * power[k];
      out(t, m) = std::log(e + kLogFloor);
    }
    (*frame_times)[t] = t * frame_sec;
  }
  return out;
}

}  // namespace

int DspConfig::frame_samples(int sample_rate) const {
  return static_cast<int>(static_cast<long>(sample_rate) * frame_ms / 1000);
}

int DspConfig::resolved_fft_size(int sample_rate) const {
  return fft_size > 0 ? fft_size : next_pow2(frame_samples(sample_rate));
}

double DspConfig::resolved_fmax(int sample_rate) const {
  return fmax_hz > 0.0 ? fmax_hz : sample_rate / 2.0;
}

void DspConfig::validate(int sample_rate) const {
  if (sample_rate <= 0) fail(Errc::bad_config, "sample rate must be positive");
  if (frame_ms <= 0) fail(Errc::bad_config, "frame_ms must be positive");
  if (step_ms != frame_ms) {
    fail(Errc::bad_config, "step_ms must equal frame_ms (non-overlapping frames)");
  }
  if (pre_emphasis < 0.0 || pre_emphasis >= 1.0) {
    fail(Errc::bad_config, "pre_emphasis must lie in [0, 1)");
  }
  const int fs = resolved_fft_size(sample_rate);
  if (!is_pow2(fs)) fail(Errc::bad_config, "fft_size must be a power of two");
  if (fs < frame_samples(sample_rate)) {
    fail(Errc::bad_config, "fft_size smaller than the frame length");
  }
  if (n_mel_filters <= 0) fail(Errc::bad_config, "n_mel_filters must be positive");
  if (n_mfcc <= 0 || n_mfcc > n_mel_filters) {
    fail(Errc::bad_config, "n_mfcc must lie in [1, n_mel_filters]");
  }
  const double fmax = resolved_fmax(sample_rate);
  if (!(fmin_hz >= 0.0) || !(fmin_hz < fmax)) fail(Errc::bad_config, "need 0 <= fmin < fmax");
  if (fmax > sample_rate / 2.0 + 1e-9) fail(Errc::bad_config, "fmax above Nyquist");
}

corpus::AudioSignal pre_emphasize(const corpus::AudioSignal& s, double coeff) {
  if (coeff < 0.0 || coeff >= 1.0) fail(Errc::bad_config, "pre-emphasis coeff must be in [0, 1)");
  corpus::AudioSignal out;
  out.sample_rate = s.sample_rate;
  out.id = s.id;
  out.samples.resize(s.samples.size());
  if (s.samples.empty()) return out;
  out.samples[0] = s.samples[0];
  for (size_t n = 1; n < s.samples.size(); ++n) {
    out.samples[n] = s.samples[n] - coeff * s.samples[n - 1];
  }
  return out;
}

std::vector<std::vector<double>> make_frames(const corpus::AudioSignal& s, const DspConfig& cfg) {
  const int width = cfg.frame_samples(s.sample_rate);
  if (width <= 0) fail(Errc::bad_config, "frame length resolves to zero samples");
  if (s.samples.size() < static_cast<size_t>(width)) {
    fail(Errc::signal_too_short, "signal shorter than one frame (" +
                                     std::to_string(s.samples.size()) + " < " +
                                     std::to_string(width) + " samples)");
  }
  const size_t count = s.samples.size() / width;
  std::vector<std::vector<double>> frames(count);
  for (size_t t = 0; t < count; ++t) {
    frames[t].assign(s.samples.begin() + t * width, s.samples.begin() + (t + 1) * width);
  }
  return frames;
}

void apply_hann(std::vector<double>& frame) {
  const size_t n = frame.size();
  if (n == 0) fail(Errc::empty_signal, "cannot window an empty frame");
  for (size_t i = 0; i < n; ++i) {
    frame[i] *= 0.5 * (1.0 - std::cos(2.0 * M_PI * i / n));
  }
}

void fft_inplace(std::vector<double>& re, std::vector<double>& im) {
  const size_t n = re.size();
  if (n != im.size() || !is_pow2(static_cast<int>(n))) {
    fail(Errc::bad_config, "FFT size must be a power of two");
  }
  // Bit-reversal permutation.
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) {
      std::swap(re[i], re[j]);
      std::swap(im[i], im[j]);
    }
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * M_PI / static_cast<double>(len);
    const double wr = std::cos(ang), wi = std::sin(ang);
    for (size_t i = 0; i < n; i += len) {
      double cur_r = 1.0, cur_i = 0.0;
      for (size_t k = 0; k < len / 2; ++k) {
        const size_t a = i + k, b = i + k + len / 2;
        const double ur = re[a], ui = im[a];
        const double vr = re[b] * cur_r - im[b] * cur_i;
        const double vi = re[b] * cur_i + im[b] * cur_r;
        re[a] = ur + vr;
        im[a] = ui + vi;
        re[b] = ur - vr;
        im[b] = ui - vi;
        const double nr = cur_r * wr - cur_i * wi;
        cur_i = cur_r * wi + cur_i * wr;
        cur_r = nr;
      }
    }
  }
}

std::vector<double> power_spectrum(const std::vector<double>& frame, int fft_size) {
  if (!is_pow2(fft_size)) fail(Errc::bad_config, "fft_size must be a power of two");
  if (frame.size() > static_cast<size_t>(fft_size)) {
    fail(Errc::bad_config, "frame longer than fft_size");
  }
  std::vector<double> re(fft_size, 0.0), im(fft_size, 0.0);
  std::copy(frame.begin(), frame.end(), re.begin());
  fft_inplace(re, im);
  std::vector<double> power(fft_size / 2 + 1);
  for (int k = 0; k <= fft_size / 2; ++k) {
    power[k] = (re[k] * re[k] + im[k] * im[k]) / fft_size;
  }
  return power;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Matrix mel_filterbank(const DspConfig& cfg, int sample_rate) {
  const int fft_size = cfg.resolved_fft_size(sample_rate);
  const int n_bins = fft_size / 2 + 1;
  const int m = cfg.n_mel_filters;
  const double fmin = cfg.fmin_hz;
  const double fmax = cfg.resolved_fmax(sample_rate);

  // Filter edge frequencies: m+2 points uniformly spaced on the mel axis.
  std::vector<double> edges(m + 2);
  const double mel_lo = hz_to_mel(fmin), mel_hi = hz_to_mel(fmax);
  for (int i = 0; i < m + 2; ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (m + 1));
  }

  Matrix fb(m, n_bins);
  const double bin_hz = static_cast<double>(sample_rate) / fft_size;
  for (int f = 0; f < m; ++f) {
    const double left = edges[f], center = edges[f + 1], right = edges[f + 2];
    bool any = false;
    for (int k = 0; k < n_bins; ++k) {
      const double hz = k * bin_hz;
      double w = 0.0;
      if (hz > left && hz < center) {
        w = (hz - left) / (center - left);
      } else if (hz >= center && hz < right) {
        w = (right - hz) / (right - center);
      }
      if (w > 0.0) any = true;
      fb(f, k) = w;
    }
    if (!any) {
      fail(Errc::degenerate_filterbank,
           "mel filter " + std::to_string(f) + " covers no FFT bin; too many filters for fft_size " +
               std::to_string(fft_size));
    }
  }
  return fb;
}

MfccFeatures mfcc(const corpus::AudioSignal& s, const DspConfig& cfg) {
  MfccFeatures out;
  out.id = s.id;
  const Matrix lm = log_mel_matrix(s, cfg, &out.frame_times);
  out.matrix = Matrix(lm.rows(), cfg.n_mfcc);
  std::vector<double> row(cfg.n_mel_filters);
  for (int t = 0; t < lm.rows(); ++t) {
    for (int m = 0; m < cfg.n_mel_filters; ++m) row[m] = lm(t, m);
    dct2_ortho(row, cfg.n_mfcc, out.matrix.data() + static_cast<size_t>(t) * cfg.n_mfcc);
  }
  return out;
}

MfccFeatures log_mel(const corpus::AudioSignal& s, const DspConfig& cfg) {
  MfccFeatures out;
  out.id = s.id;
  out.matrix = log_mel_matrix(s, cfg, &out.frame_times);
  return out;
}

void write_features(const MfccFeatures& f, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io_error, "cannot write feature file: " + path);
  out.write(kFeatureMagic, 8);
  const uint32_t version = kFeatureVersion;
  const uint32_t t = static_cast<uint32_t>(f.matrix.rows());
  const uint32_t width = static_cast<uint32_t>(f.matrix.cols());
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&t), 4);
  out.write(reinterpret_cast<const char*>(&width), 4);
  out.write(reinterpret_cast<const char*>(f.matrix.data()),
            static_cast<std::streamsize>(f.matrix.size() * sizeof(double)));
  if (!out) fail(Errc::io_error, "short write to feature file: " + path);
}

MfccFeatures read_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::missing_file, "cannot open feature file: " + path);
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kFeatureMagic, 8) != 0) {
    fail(Errc::corrupt_checkpoint, "bad feature file magic: " + path);
  }
  uint32_t version = 0, t = 0, width = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&t), 4);
  in.read(reinterpret_cast<char*>(&width), 4);
  if (!in) fail(Errc::truncated_file, "truncated feature header: " + path);
  if (version != kFeatureVersion) {
    fail(Errc::version_mismatch, "unsupported feature file version: " + path);
  }
  MfccFeatures f;
  f.id = corpus::id_from_path(path);
  f.matrix = Matrix(static_cast<int>(t), static_cast<int>(width));
  in.read(reinterpret_cast<char*>(f.matrix.data()),
          static_cast<std::streamsize>(f.matrix.size() * sizeof(double)));
  if (!in) fail(Errc::truncated_file, "truncated feature payload: " + path);
  f.frame_times.resize(t);
  for (uint32_t i = 0; i < t; ++i) f.frame_times[i] = 0.0;
  return f;
}

}  // namespace strata::dsp
