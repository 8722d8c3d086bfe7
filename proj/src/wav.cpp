// Copyright 2026 The fsed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fsed/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace fsed {
namespace {

constexpr uint16_t kFormatPcm = 0x0001;
constexpr uint16_t kFormatFloat = 0x0003;
constexpr uint16_t kFormatExtensible = 0xFFFE;

struct Cursor {
  const unsigned char* data;
  size_t size;
  size_t pos = 0;

  void require(size_t n) const {
    if (pos + n > size) throw ParseError("truncated WAV container");
  }
  uint16_t u16() {
    require(2);
    uint16_t v = static_cast<uint16_t>(data[pos] | (data[pos + 1] << 8));
    pos += 2;
    return v;
  }
  uint32_t u32() {
    require(4);
    uint32_t v = static_cast<uint32_t>(data[pos]) |
                 (static_cast<uint32_t>(data[pos + 1]) << 8) |
                 (static_cast<uint32_t>(data[pos + 2]) << 16) |
                 (static_cast<uint32_t>(data[pos + 3]) << 24);
    pos += 4;
    return v;
  }
  void tag(char out[4]) {
    require(4);
    std::memcpy(out, data + pos, 4);
    pos += 4;
  }
  void skip(size_t n) {
    require(n);
    pos += n;
  }
};

struct FmtChunk {
  uint16_t format = 0;
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t bits = 0;
};

double decode_sample(const unsigned char* p, uint16_t format, uint16_t bits) {
  if (format == kFormatPcm && bits == 16) {
    int16_t v = static_cast<int16_t>(p[0] | (p[1] << 8));
    return v / 32768.0;
  }
  if (format == kFormatPcm && bits == 24) {
    int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
    if (v & 0x800000) v |= ~0xFFFFFF;  // sign extend
    return v / 8388608.0;
  }
  // 32-bit float
  float f;
  std::memcpy(&f, p, 4);
  return std::clamp(static_cast<double>(f), -1.0, 1.0);
}

}  // namespace

Waveform read_wav(const std::string& bytes) {
  Cursor c{reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()};
  char tag[4];
  c.tag(tag);
  if (std::memcmp(tag, "RIFF", 4) != 0) throw ParseError("not a RIFF container");
  c.u32();  // declared RIFF size, not trusted
  c.tag(tag);
  if (std::memcmp(tag, "WAVE", 4) != 0) throw ParseError("not a WAVE file");

  FmtChunk fmt;
  bool have_fmt = false;
  size_t data_pos = 0;
  size_t data_size = 0;
  bool have_data = false;
  while (c.pos + 8 <= c.size) {
    c.tag(tag);
    uint32_t chunk_size = c.u32();
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw ParseError("fmt chunk too small");
      size_t chunk_start = c.pos;
      fmt.format = c.u16();
      fmt.channels = c.u16();
      fmt.sample_rate = c.u32();
      c.u32();  // byte rate
      c.u16();  // block align
      fmt.bits = c.u16();
      if (fmt.format == kFormatExtensible) {
        if (chunk_size < 40) throw ParseError("extensible fmt chunk too small");
        c.u16();  // cbSize
        c.u16();  // valid bits
        c.u32();  // channel mask
        fmt.format = c.u16();  // first two bytes of the subformat GUID
      }
      c.pos = chunk_start;
      c.skip(chunk_size);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      data_pos = c.pos;
      data_size = chunk_size;
      c.skip(chunk_size);
      have_data = true;
    } else {
      c.skip(chunk_size);
    }
    if (chunk_size % 2 == 1 && c.pos < c.size) c.skip(1);  // chunk padding
  }
  if (!have_fmt) throw ParseError("missing fmt chunk");
  if (!have_data) throw ParseError("missing data chunk");
  if (fmt.channels == 0 || fmt.sample_rate == 0) throw ParseError("malformed fmt chunk");

  const bool supported = (fmt.format == kFormatPcm && (fmt.bits == 16 || fmt.bits == 24)) ||
                         (fmt.format == kFormatFloat && fmt.bits == 32);
  if (!supported) {
    throw Error("unsupported WAV codec (format " + std::to_string(fmt.format) +
                ", " + std::to_string(fmt.bits) + " bits)");
  }

  const size_t bytes_per_sample = fmt.bits / 8;
  const size_t frame_bytes = bytes_per_sample * fmt.channels;
  if (data_size % frame_bytes != 0) throw ParseError("truncated WAV container");
  const size_t n_frames = data_size / frame_bytes;
  if (n_frames == 0) throw ParseError("WAV file contains no samples");

  Waveform w;
  w.sample_rate = static_cast<int>(fmt.sample_rate);
  w.samples.resize(static_cast<Index>(n_frames));
  const unsigned char* p = c.data + data_pos;
  for (size_t i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    for (uint16_t ch = 0; ch < fmt.channels; ++ch) {
      acc += decode_sample(p, fmt.format, fmt.bits);
      p += bytes_per_sample;
    }
    w.samples[static_cast<Index>(i)] = acc / fmt.channels;
  }
  return w;
}

Waveform read_wav(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return read_wav(buf.str());
}

Waveform read_wav_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return read_wav(in);
}

void write_wav16(std::ostream& out, const Waveform& w) {
  if (w.samples.size() == 0 || w.sample_rate <= 0) throw Error("empty waveform");
  const uint32_t n = static_cast<uint32_t>(w.samples.size());
  const uint32_t data_size = n * 2;

  auto put_u16 = [&](uint16_t v) {
    char b[2] = {static_cast<char>(v & 0xFF), static_cast<char>(v >> 8)};
    out.write(b, 2);
  };
  auto put_u32 = [&](uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                 static_cast<char>((v >> 16) & 0xFF), static_cast<char>(v >> 24)};
    out.write(b, 4);
  };

  out.write("RIFF", 4);
  put_u32(36 + data_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put_u32(16);
  put_u16(kFormatPcm);
  put_u16(1);  // mono
  put_u32(static_cast<uint32_t>(w.sample_rate));
  put_u32(static_cast<uint32_t>(w.sample_rate) * 2);
  put_u16(2);   // block align
  put_u16(16);  // bits
  out.write("data", 4);
  put_u32(data_size);
  for (Index i = 0; i < w.samples.size(); ++i) {
    double x = std::clamp(w.samples[i], -1.0, 1.0);
    int16_t v = static_cast<int16_t>(std::llround(x * 32767.0));
    put_u16(static_cast<uint16_t>(v));
  }
  if (!out) throw Error("WAV write failed");
}

void write_wav16_file(const std::filesystem::path& path, const Waveform& w) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  write_wav16(out, w);
}

}  // namespace fsed
