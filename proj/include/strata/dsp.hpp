// strata/dsp.hpp
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

#include <string>
#include <vector>

#include "strata/corpus.hpp"
#include "strata/matrix.hpp"

namespace strata::dsp {

// 25 ms frames with a 25 ms step: frames are contiguous and non-overlapping.
struct DspConfig {
  int frame_ms = 25;
  int step_ms = 25;
  double pre_emphasis = 0.97;
  int fft_size = 0;  // 0: next power of two >= frame length
  int n_mel_filters = 26;
  int n_mfcc = 13;
  double fmin_hz = 0.0;
  double fmax_hz = 0.0;  // 0: sample_rate / 2

  int frame_samples(int sample_rate) const;
  int resolved_fft_size(int sample_rate) const;
  double resolved_fmax(int sample_rate) const;
  void validate(int sample_rate) const;
};

struct MfccFeatures {
  Matrix matrix;                    // T x n_mfcc (or T x n_mel for log-mel)
  std::vector<double> frame_times;  // start time of each frame, seconds
  std::string id;
};

inline constexpr double kLogFloor = 1e-10;

corpus::AudioSignal pre_emphasize(const corpus::AudioSignal& s, double coeff);

// Non-overlapping contiguous frames; the trailing partial frame is dropped.
// Errors if the signal is shorter than one frame.
std::vector<std::vector<double>> make_frames(const corpus::AudioSignal& s, const DspConfig& cfg);

// Periodic Hann window w[n] = 0.5 * (1 - cos(2 pi n / N)), in place.
void apply_hann(std::vector<double>& frame);

// |FFT|^2 / fft_size over bins 0..fft_size/2; the frame is zero-padded to
// fft_size. Errors if fft_size is not a power of two.
std::vector<double> power_spectrum(const std::vector<double>& frame, int fft_size);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular filters with uniformly spaced mel centers,
// n_mel_filters x (fft_size/2 + 1). Errors if the spacing degenerates
// (more filters than the FFT grid can separate).
Matrix mel_filterbank(const DspConfig& cfg, int sample_rate);

// Full pipeline: pre-emphasis, framing, Hann, power spectrum, mel
// filterbank, log(x + 1e-10), orthonormal DCT-II, first n_mfcc
// coefficients.
MfccFeatures mfcc(const corpus::AudioSignal& s, const DspConfig& cfg);

// The pre-DCT log-mel matrix (T x n_mel_filters), as an alternative input
// representation.
MfccFeatures log_mel(const corpus::AudioSignal& s, const DspConfig& cfg);

// In-place radix-2 FFT; sizes must be powers of two.
void fft_inplace(std::vector<double>& re, std::vector<double>& im);

// Per-utterance binary feature record: magic, version, T, width, row-major
// 64-bit floats.
void write_features(const MfccFeatures& f, const std::string& path);
MfccFeatures read_features(const std::string& path);

}  // namespace strata::dsp
