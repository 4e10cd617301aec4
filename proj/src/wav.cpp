// strata/wav.cpp
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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "strata/corpus.hpp"
#include "strata/error.hpp"

namespace strata::corpus {

namespace {

constexpr uint16_t kFormatPcm = 0x0001;
constexpr uint16_t kFormatFloat = 0x0003;
constexpr uint16_t kFormatExtensible = 0xFFFE;

struct FmtChunk {
  uint16_t format = 0;
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t bits_per_sample = 0;
  uint16_t effective_format = 0;  // resolved for extensible files
};

uint32_t read_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

double decode_sample(const unsigned char* p, uint16_t bits, uint16_t format) {
  if (format == kFormatFloat) {
    float f;
    std::memcpy(&f, p, 4);
    return static_cast<double>(f);
  }
  switch (bits) {
    case 8:
      // 8-bit PCM is unsigned.
      return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16: {
      const auto v = static_cast<int16_t>(p[0] | (p[1] << 8));
      return v / 32768.0;
    }
    case 24: {
      int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v |= ~0xFFFFFF;  // sign extend
      return v / 8388608.0;
    }
    default:
      return 0.0;
  }
}

}  // namespace

AudioSignal load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::missing_file, "cannot open WAV file: " + path);

  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    fail(Errc::malformed_riff, "not a RIFF/WAVE file: " + path);
  }

  FmtChunk fmt;
  bool have_fmt = false;
  size_t data_offset = 0, data_size = 0;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    const uint32_t chunk_size = read_u32(hdr + 4);
    const size_t body = pos + 8;
    if (body + chunk_size > bytes.size()) {
      fail(Errc::malformed_riff, "truncated chunk in WAV file: " + path);
    }
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (chunk_size < 16) fail(Errc::malformed_riff, "fmt chunk too small: " + path);
      const unsigned char* f = bytes.data() + body;
      fmt.format = read_u16(f);
      fmt.channels = read_u16(f + 2);
      fmt.sample_rate = read_u32(f + 4);
      fmt.bits_per_sample = read_u16(f + 14);
      fmt.effective_format = fmt.format;
      if (fmt.format == kFormatExtensible) {
        // Sub-format GUID starts at offset 24; first two bytes carry the tag.
        if (chunk_size < 40) fail(Errc::malformed_riff, "extensible fmt chunk too small: " + path);
        fmt.effective_format = read_u16(f + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data_offset = body;
      data_size = chunk_size;
    }
    pos = body + chunk_size + (chunk_size & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data_offset == 0) {
    fail(Errc::malformed_riff, "missing fmt or data chunk: " + path);
  }
  if (fmt.channels == 0 || fmt.sample_rate == 0) {
    fail(Errc::malformed_riff, "fmt chunk has zero channels or rate: " + path);
  }

  const uint16_t format = fmt.effective_format;
  const uint16_t bits = fmt.bits_per_sample;
  const bool ok_pcm = format == kFormatPcm && (bits == 8 || bits == 16 || bits == 24);
  const bool ok_float = format == kFormatFloat && bits == 32;
  if (!ok_pcm && !ok_float) {
    fail(Errc::unsupported_encoding,
         "unsupported WAV encoding (format " + std::to_string(format) + ", " +
             std::to_string(bits) + " bits): " + path);
  }

  const size_t bytes_per_sample = bits / 8;
  const size_t stride = bytes_per_sample * fmt.channels;
  const size_t n_frames = stride > 0 ? data_size / stride : 0;

  AudioSignal out;
  out.sample_rate = static_cast<int>(fmt.sample_rate);
  out.id = id_from_path(path);
  out.samples.resize(n_frames);
  const unsigned char* p = bytes.data() + data_offset;
  for (size_t i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    for (uint16_t c = 0; c < fmt.channels; ++c) {
      acc += decode_sample(p + i * stride + c * bytes_per_sample, bits, format);
    }
    out.samples[i] = acc / fmt.channels;
  }
  return out;
}

void write_wav16(const AudioSignal& signal, const std::string& path) {
  if (signal.sample_rate <= 0) fail(Errc::bad_config, "write_wav16: sample rate must be positive");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io_error, "cannot write WAV file: " + path);

  const uint32_t n = static_cast<uint32_t>(signal.samples.size());
  const uint32_t data_size = n * 2;
  const uint32_t riff_size = 36 + data_size;
  const uint32_t rate = static_cast<uint32_t>(signal.sample_rate);
  const uint32_t byte_rate = rate * 2;

  auto put_u32 = [&](uint32_t v) {
    char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8), static_cast<char>(v >> 16),
                 static_cast<char>(v >> 24)};
    out.write(b, 4);
  };
  auto put_u16 = [&](uint16_t v) {
    char b[2] = {static_cast<char>(v), static_cast<char>(v >> 8)};
    out.write(b, 2);
  };

  out.write("RIFF", 4);
  put_u32(riff_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put_u32(16);
  put_u16(kFormatPcm);
  put_u16(1);  // mono
  put_u32(rate);
  put_u32(byte_rate);
  put_u16(2);   // block align
  put_u16(16);  // bits per sample
  out.write("data", 4);
  put_u32(data_size);

  for (double s : signal.samples) {
    const double clipped = std::clamp(s, -1.0, 1.0);
    const auto q = static_cast<int16_t>(std::llround(clipped * 32767.0));
    put_u16(static_cast<uint16_t>(q));
  }
  if (!out) fail(Errc::io_error, "short write to WAV file: " + path);
}

}  // namespace strata::corpus
