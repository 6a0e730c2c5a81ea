// Copyright 2026 The nnmm Authors. All Rights Reserved.
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

#include "nnmm/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "nnmm/errors.h"

namespace nnmm {
namespace {

uint32_t read_u32(const uint8_t* p) {
  return uint32_t{p[0]} | uint32_t{p[1]} << 8 | uint32_t{p[2]} << 16 |
         uint32_t{p[3]} << 24;
}

uint16_t read_u16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | p[1] << 8);
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v));
  out.push_back(static_cast<uint8_t>(v >> 8));
}

void put_tag(std::vector<uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace

Waveform read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw DataError(path + ": not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  int sample_rate = 0;
  const uint8_t* data = nullptr;
  size_t data_size = 0;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const uint8_t* chunk = bytes.data() + pos;
    const uint32_t size = read_u32(chunk + 4);
    const size_t body = pos + 8;
    if (body + size > bytes.size()) {
      // Tolerate a data chunk whose header overstates its length.
      if (std::memcmp(chunk, "data", 4) == 0) {
        data = bytes.data() + body;
        data_size = bytes.size() - body;
        break;
      }
      throw DataError(path + ": truncated chunk");
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw DataError(path + ": malformed fmt chunk");
      const uint16_t format = read_u16(chunk + 8);
      const uint16_t channels = read_u16(chunk + 10);
      sample_rate = static_cast<int>(read_u32(chunk + 12));
      const uint16_t bits = read_u16(chunk + 22);
      if (format != 1 || bits != 16) {
        throw DataError(path + ": only 16-bit PCM is supported");
      }
      if (channels != 1) {
        throw DataError(path + ": only mono audio is supported, got " +
                        std::to_string(channels) + " channels");
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = size;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt) throw DataError(path + ": missing fmt chunk");
  if (data == nullptr) throw DataError(path + ": missing data chunk");

  Waveform w;
  w.sample_rate = sample_rate;
  const size_t n = data_size / 2;
  w.samples.resize(n);
  for (size_t i = 0; i < n; ++i) {
    const auto v = static_cast<int16_t>(read_u16(data + 2 * i));
    w.samples[i] = v / 32768.0;
  }
  w.validate();
  return w;
}

Waveform read_wav(const std::string& path, int expected_rate) {
  Waveform w = read_wav(path);
  if (w.sample_rate != expected_rate) {
    throw DataError(path + ": sample rate " + std::to_string(w.sample_rate) +
                    " Hz, expected " + std::to_string(expected_rate) +
                    " Hz (resampling is not supported)");
  }
  return w;
}

void write_wav(const std::string& path, const Waveform& w) {
  w.validate();
  const uint32_t data_size = static_cast<uint32_t>(w.size() * 2);
  std::vector<uint8_t> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_size);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<uint32_t>(w.sample_rate));
  put_u32(out, static_cast<uint32_t>(w.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_size);
  for (double s : w.samples) {
    const double scaled = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
    put_u16(out, static_cast<uint16_t>(static_cast<int16_t>(scaled)));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path);
  f.write(reinterpret_cast<const char*>(out.data()),
          static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("failed writing " + path);
}

}  // namespace nnmm
