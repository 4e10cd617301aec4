// strata/augment.cpp
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

#include "strata/augment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "strata/dsp.hpp"
#include "strata/error.hpp"
#include "strata/parallel.hpp"
#include "strata/rng.hpp"

namespace strata::augment {

namespace {

using corpus::AudioSignal;

constexpr double kAmplitudeCap = 1.05;

void check_signal(const Spec& spec, const AudioSignal& s) {
  if (s.samples.empty()) fail(Errc::empty_signal, "cannot augment an empty signal");
  if (s.sample_rate <= 0) fail(Errc::bad_config, "signal has no sample rate");
  const size_t min_samples = static_cast<size_t>(s.sample_rate) / 10;  // 100 ms
  if ((spec.kind == Kind::kCrop || spec.kind == Kind::kMask) && s.samples.size() < min_samples) {
    fail(Errc::signal_too_short, "signal too short for crop/mask (need >= 100 ms)");
  }
}

void cap_amplitude(std::vector<double>& x) {
  for (double& v : x) v = std::clamp(v, -kAmplitudeCap, kAmplitudeCap);
}

double rms(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return x.empty() ? 0.0 : std::sqrt(acc / static_cast<double>(x.size()));
}

std::vector<double> resample_linear(const std::vector<double>& x, double step, size_t out_len) {
  std::vector<double> y(out_len);
  const size_t last = x.size() - 1;
  for (size_t i = 0; i < out_len; ++i) {
    const double pos = std::min(static_cast<double>(i) * step, static_cast<double>(last));
    const size_t i0 = static_cast<size_t>(pos);
    const size_t i1 = std::min(i0 + 1, last);
    const double frac = pos - static_cast<double>(i0);
    y[i] = x[i0] * (1.0 - frac) + x[i1] * frac;
  }
  return y;
}

// Restores a signal to target_len via overlap-add of triangular grains.
// No similarity search; good enough for augmentation.
std::vector<double> ola_stretch(const std::vector<double>& x, size_t target_len, int sample_rate) {
  if (x.size() == target_len) return x;
  const size_t grain = std::min(x.size(), static_cast<size_t>(sample_rate) / 20);  // 50 ms
  if (grain < 4 || x.size() <= grain || target_len <= grain) {
    return resample_linear(x, static_cast<double>(x.size()) / target_len, target_len);
  }
  const size_t hop = grain / 2;
  std::vector<double> out(target_len, 0.0), weight(target_len, 0.0);
  const double src_span = static_cast<double>(x.size() - grain);
  const double dst_span = static_cast<double>(target_len - grain);
  for (size_t p = 0;; p += hop) {
    if (p > target_len - grain) p = target_len - grain;
    const size_t src = static_cast<size_t>(std::llround(src_span * static_cast<double>(p) / dst_span));
    for (size_t i = 0; i < grain; ++i) {
      // Triangular fade.
      const double w = 1.0 - std::abs(2.0 * static_cast<double>(i) / (grain - 1) - 1.0);
      out[p + i] += w * x[src + i];
      weight[p + i] += w;
    }
    if (p == target_len - grain) break;
  }
  for (size_t i = 0; i < target_len; ++i) {
    if (weight[i] > 1e-12) out[i] /= weight[i];
  }
  return out;
}

AudioSignal apply_crop(const Spec& spec, const AudioSignal& s, Rng& rng) {
  const double f = rng.uniform(spec.lo, spec.hi);
  const auto len = static_cast<long>(s.samples.size());
  const long crop_len = std::llround(f * static_cast<double>(len));
  const long start = crop_len >= len ? 0 : rng.uniform_int(0, static_cast<int>(len - crop_len));
  AudioSignal out = s;
  out.samples.erase(out.samples.begin() + start, out.samples.begin() + start + crop_len);
  return out;
}

AudioSignal apply_loudness(const Spec& spec, const AudioSignal& s, Rng& rng) {
  const double gain = rng.uniform(spec.lo, spec.hi);
  const size_t window = std::max<size_t>(1, static_cast<size_t>(s.sample_rate) / 10);  // 100 ms
  const size_t step = std::max<size_t>(1, window / 10);
  // Find the highest-energy window.
  size_t best_start = 0;
  double best_energy = -1.0;
  const size_t len = s.samples.size();
  for (size_t start = 0; start + window <= len || start == 0; start += step) {
    const size_t end = std::min(start + window, len);
    double energy = 0.0;
    for (size_t i = start; i < end; ++i) energy += s.samples[i] * s.samples[i];
    if (energy > best_energy) {
      best_energy = energy;
      best_start = start;
    }
    if (start + window >= len) break;
  }
  AudioSignal out = s;
  const size_t end = std::min(best_start + window, len);
  for (size_t i = best_start; i < end; ++i) out.samples[i] *= gain;
  return out;
}

AudioSignal apply_mask(const Spec& spec, const AudioSignal& s, Rng& rng) {
  const double f = rng.uniform(spec.lo, spec.hi);
  const auto len = static_cast<long>(s.samples.size());
  const long mask_len = std::min(len, static_cast<long>(std::llround(f * static_cast<double>(len))));
  const long start = mask_len >= len ? 0 : rng.uniform_int(0, static_cast<int>(len - mask_len));
  const double level = rms(s.samples);
  AudioSignal out = s;
  for (long i = start; i < start + mask_len; ++i) out.samples[i] = level * rng.normal();
  cap_amplitude(out.samples);
  return out;
}

AudioSignal apply_noise(const Spec& spec, const AudioSignal& s, Rng& rng) {
  const double snr_db = rng.uniform(spec.lo, spec.hi);
  double power = 0.0;
  for (double v : s.samples) power += v * v;
  power /= static_cast<double>(s.samples.size());
  const double noise_std = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
  AudioSignal out = s;
  for (double& v : out.samples) v += noise_std * rng.normal();
  cap_amplitude(out.samples);
  return out;
}

AudioSignal apply_speed(const Spec& spec, const AudioSignal& s, Rng& rng) {
  const double factor = rng.uniform(spec.lo, spec.hi);
  const auto out_len =
      static_cast<size_t>(std::llround(static_cast<double>(s.samples.size()) / factor));
  AudioSignal out = s;
  out.samples = resample_linear(s.samples, factor, out_len);
  return out;
}

AudioSignal apply_pitch(const Spec& spec, const AudioSignal& s, Rng& rng) {
  const double semitones = rng.uniform(spec.lo, spec.hi);
  const double factor = std::pow(2.0, semitones / 12.0);
  const auto mid_len =
      static_cast<size_t>(std::llround(static_cast<double>(s.samples.size()) / factor));
  // Resampling alone shifts pitch and length together; the grain stretch
  // puts the length back.
  AudioSignal out = s;
  out.samples = ola_stretch(resample_linear(s.samples, factor, mid_len), s.samples.size(),
                            s.sample_rate);
  return out;
}

AudioSignal apply_shift(const Spec& spec, const AudioSignal& s, Rng& rng) {
  const double frac = rng.uniform(spec.lo, spec.hi);
  const auto len = static_cast<long>(s.samples.size());
  const long k = std::llround(frac * static_cast<double>(len));
  AudioSignal out = s;
  std::fill(out.samples.begin(), out.samples.end(), 0.0);
  if (k >= 0) {
    for (long i = k; i < len; ++i) out.samples[i] = s.samples[i - k];
  } else {
    for (long i = 0; i < len + k; ++i) out.samples[i] = s.samples[i - k];
  }
  return out;
}

AudioSignal apply_normalize(const AudioSignal& s) {
  double peak = 0.0;
  for (double v : s.samples) peak = std::max(peak, std::abs(v));
  AudioSignal out = s;
  if (peak > 0.0) {
    for (double& v : out.samples) v /= peak;
  }
  return out;
}

// Piecewise-linear frequency warp (two segments meeting at a knee at 7/8 of
// the usable band), applied to the STFT and resynthesized by overlap-add.
AudioSignal apply_vtlp(const Spec& spec, const AudioSignal& s, Rng& rng) {
  const double alpha = rng.uniform(spec.lo, spec.hi);
  const double nyq = s.sample_rate / 2.0;
  const double knee = 0.875 * nyq * std::min(1.0, 1.0 / alpha);
  const double knee_out = alpha * knee;

  auto inverse_warp = [&](double f) {
    if (f <= knee_out) return f / alpha;
    return nyq - (nyq - f) * (nyq - knee) / (nyq - knee_out);
  };

  size_t win = static_cast<size_t>(s.sample_rate) * 25 / 1000;
  win &= ~static_cast<size_t>(1);  // even, for the half-window hop
  if (win < 8) win = 8;
  const size_t hop = win / 2;
  size_t fft_size = 1;
  while (fft_size < win) fft_size <<= 1;
  const size_t half = fft_size / 2;
  const double bin_hz = static_cast<double>(s.sample_rate) / static_cast<double>(fft_size);

  // Pad half a window on both sides so the first/last samples get full
  // analysis-window coverage.
  std::vector<double> padded(s.samples.size() + 2 * hop, 0.0);
  std::copy(s.samples.begin(), s.samples.end(), padded.begin() + hop);
  const size_t padded_len = padded.size();
  std::vector<double> acc(padded_len, 0.0);

  std::vector<double> window(win);
  for (size_t i = 0; i < win; ++i) window[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / win));

  std::vector<double> re(fft_size), im(fft_size), wre(fft_size), wim(fft_size);
  for (size_t start = 0; start + win <= padded_len; start += hop) {
    std::fill(re.begin(), re.end(), 0.0);
    std::fill(im.begin(), im.end(), 0.0);
    for (size_t i = 0; i < win; ++i) re[i] = padded[start + i] * window[i];
    dsp::fft_inplace(re, im);

    // Warp the half spectrum, mirror the rest.
    for (size_t k = 0; k <= half; ++k) {
      const double src = inverse_warp(static_cast<double>(k) * bin_hz) / bin_hz;
      const double clamped = std::clamp(src, 0.0, static_cast<double>(half));
      const size_t k0 = static_cast<size_t>(clamped);
      const size_t k1 = std::min(k0 + 1, half);
      const double frac = clamped - static_cast<double>(k0);
      wre[k] = re[k0] * (1.0 - frac) + re[k1] * frac;
      wim[k] = im[k0] * (1.0 - frac) + im[k1] * frac;
    }
    for (size_t k = half + 1; k < fft_size; ++k) {
      wre[k] = wre[fft_size - k];
      wim[k] = -wim[fft_size - k];
    }

    // Inverse FFT via conjugation.
    for (size_t k = 0; k < fft_size; ++k) wim[k] = -wim[k];
    dsp::fft_inplace(wre, wim);
    for (size_t i = 0; i < win; ++i) {
      acc[start + i] += wre[i] / static_cast<double>(fft_size);
    }
  }

  AudioSignal out = s;
  for (size_t i = 0; i < s.samples.size(); ++i) out.samples[i] = acc[i + hop];
  cap_amplitude(out.samples);
  return out;
}

void check_spec_ranges(const Spec& spec) {
  const Spec bounds = default_spec(spec.kind, 0);
  if (!(spec.lo <= spec.hi)) fail(Errc::bad_config, "augment spec range is empty");
  if (spec.lo < bounds.lo - 1e-12 || spec.hi > bounds.hi + 1e-12) {
    fail(Errc::bad_config, std::string("augment spec range outside documented bounds for ") +
                               kind_name(spec.kind));
  }
}

}  // namespace

const char* kind_name(Kind kind) {
  switch (kind) {
    case Kind::kCrop:
      return "crop";
    case Kind::kLoudness:
      return "loudness";
    case Kind::kMask:
      return "mask";
    case Kind::kNoise:
      return "noise";
    case Kind::kPitch:
      return "pitch";
    case Kind::kShift:
      return "shift";
    case Kind::kSpeed:
      return "speed";
    case Kind::kVtlp:
      return "vtlp";
    case Kind::kNormalize:
      return "normalize";
  }
  return "?";
}

Kind kind_from_name(const std::string& name) {
  for (Kind kind : all_kinds()) {
    if (name == kind_name(kind)) return kind;
  }
  fail(Errc::bad_config, "unknown augmentation kind \"" + name + "\"");
}

std::vector<Kind> all_kinds() {
  return {Kind::kCrop,  Kind::kLoudness, Kind::kMask, Kind::kNoise,    Kind::kPitch,
          Kind::kShift, Kind::kSpeed,    Kind::kVtlp, Kind::kNormalize};
}

Spec default_spec(Kind kind, uint64_t seed) {
  Spec spec;
  spec.kind = kind;
  spec.seed = seed;
  switch (kind) {
    case Kind::kCrop:
    case Kind::kMask:
      spec.lo = 0.05;
      spec.hi = 0.15;
      break;
    case Kind::kLoudness:
      spec.lo = 0.5;
      spec.hi = 0.9;
      break;
    case Kind::kNoise:
      spec.lo = 10.0;
      spec.hi = 30.0;
      break;
    case Kind::kPitch:
      spec.lo = -2.0;
      spec.hi = 2.0;
      break;
    case Kind::kShift:
      spec.lo = -0.10;
      spec.hi = 0.10;
      break;
    case Kind::kSpeed:
    case Kind::kVtlp:
      spec.lo = 0.9;
      spec.hi = 1.1;
      break;
    case Kind::kNormalize:
      spec.lo = 1.0;
      spec.hi = 1.0;
      break;
  }
  return spec;
}

corpus::AudioSignal apply(const Spec& spec, const corpus::AudioSignal& signal) {
  check_signal(spec, signal);
  check_spec_ranges(spec);
  Rng rng(spec.seed);
  switch (spec.kind) {
    case Kind::kCrop:
      return apply_crop(spec, signal, rng);
    case Kind::kLoudness:
      return apply_loudness(spec, signal, rng);
    case Kind::kMask:
      return apply_mask(spec, signal, rng);
    case Kind::kNoise:
      return apply_noise(spec, signal, rng);
    case Kind::kPitch:
      return apply_pitch(spec, signal, rng);
    case Kind::kShift:
      return apply_shift(spec, signal, rng);
    case Kind::kSpeed:
      return apply_speed(spec, signal, rng);
    case Kind::kVtlp:
      return apply_vtlp(spec, signal, rng);
    case Kind::kNormalize:
      return apply_normalize(signal);
  }
  fail(Errc::bad_config, "unhandled augmentation kind");
}

Plan plan(uint64_t seed, const corpus::Manifest& manifest, int copies,
          const std::vector<Kind>& kinds) {
  if (copies < 1) fail(Errc::bad_config, "copies_per_utterance must be >= 1");
  if (kinds.empty()) fail(Errc::bad_config, "augmentation kind list is empty");

  Plan p;
  p.seed = seed;
  p.copies_per_utterance = copies;
  for (const auto& entry : manifest.entries) {
    const uint64_t utt_seed = mix_seed(seed, entry.id);
    for (int copy = 1; copy <= copies; ++copy) {
      Rng rng(mix_seed(utt_seed, static_cast<uint64_t>(copy)));
      const int max_kinds = std::min<int>(3, static_cast<int>(kinds.size()));
      const int n_kinds = rng.uniform_int(1, max_kinds);
      // Partial Fisher-Yates for distinct kinds.
      std::vector<int> order(kinds.size());
      std::iota(order.begin(), order.end(), 0);
      PlanItem item;
      item.source_id = entry.id;
      item.copy_index = copy;
      for (int k = 0; k < n_kinds; ++k) {
        const int pick = rng.uniform_int(k, static_cast<int>(order.size()) - 1);
        std::swap(order[k], order[pick]);
        item.specs.push_back(default_spec(kinds[order[k]], rng.next_u64()));
      }
      p.items.push_back(std::move(item));
    }
  }
  return p;
}

std::string kinds_label(const std::vector<Spec>& specs) {
  std::string label;
  for (const auto& spec : specs) {
    if (!label.empty()) label += '+';
    label += kind_name(spec.kind);
  }
  return label;
}

AugmentResult augment_corpus(const Plan& p, const corpus::Manifest& manifest,
                             const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    fail(Errc::io_error, "cannot create output directory: " + out_dir);
  }

  // Group the plan per source utterance, keeping copy order.
  std::vector<std::vector<const PlanItem*>> grouped(manifest.entries.size());
  for (size_t e = 0; e < manifest.entries.size(); ++e) {
    for (const auto& item : p.items) {
      if (item.source_id == manifest.entries[e].id) grouped[e].push_back(&item);
    }
  }

  struct CopyOut {
    corpus::ManifestEntry entry;
    std::string error;
  };
  std::vector<std::vector<CopyOut>> results(manifest.entries.size());

  const int n = static_cast<int>(manifest.entries.size());
  const bool go_par = par::enabled() && n > 1;
#pragma omp parallel for schedule(dynamic) if (go_par)
  for (int e = 0; e < n; ++e) {
    const auto& source = manifest.entries[e];
    results[e].resize(grouped[e].size());
    corpus::AudioSignal audio;
    bool loaded = false;
    for (size_t c = 0; c < grouped[e].size(); ++c) {
      const PlanItem& item = *grouped[e][c];
      CopyOut& slot = results[e][c];
      try {
        if (!loaded) {
          audio = corpus::load_wav(source.audio_path);
          loaded = true;
        }
        corpus::AudioSignal copy = audio;
        for (const auto& spec : item.specs) copy = apply(spec, copy);
        const std::string id = source.id + "_aug" + std::to_string(item.copy_index);
        const std::string path = (fs::path(out_dir) / (id + ".wav")).string();
        copy.id = id;
        corpus::write_wav16(copy, path);
        slot.entry = corpus::ManifestEntry{path, source.transcript, source.split,
                                           "augmented:" + kinds_label(item.specs), id};
      } catch (const Error& err) {
        slot.error = source.id + " copy " + std::to_string(item.copy_index) + ": " + err.what();
      }
    }
  }

  AugmentResult result;
  for (size_t e = 0; e < manifest.entries.size(); ++e) {
    corpus::ManifestEntry original = manifest.entries[e];
    original.origin = "original";
    result.manifest.entries.push_back(std::move(original));
    for (const auto& slot : results[e]) {
      if (!slot.error.empty()) {
        ++result.failures;
        result.errors.push_back(slot.error);
      } else {
        result.manifest.entries.push_back(slot.entry);
      }
    }
  }
  return result;
}

}  // namespace strata::augment
