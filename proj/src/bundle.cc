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

#include "nnmm/bundle.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "nnmm/errors.h"
#include "nnmm/features.h"

namespace nnmm {
namespace {

constexpr char kMagic[4] = {'N', 'N', 'M', 'M'};
constexpr uint32_t kTagMog = 1;
constexpr uint32_t kTagNet = 2;
constexpr uint32_t kTagNoise = 3;
// Sanity bound on any single dimension read from a file.
constexpr uint32_t kMaxDim = 1u << 24;

class Writer {
 public:
  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }
  void raw(const void* p, size_t n) {
    const auto* b = static_cast<const uint8_t*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  template <typename M>
  void matrix(const M& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
    }
  }
  std::vector<uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  uint32_t dim(const char* what) {
    const uint32_t v = u32();
    if (v == 0 || v > kMaxDim) {
      throw DataError(std::string("model file has invalid ") + what + " " +
                      std::to_string(v));
    }
    return v;
  }
  std::string str(size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  RowMatrix matrix(uint32_t rows, uint32_t cols) {
    need(size_t{rows} * cols * 8);
    RowMatrix m(rows, cols);
    for (uint32_t r = 0; r < rows; ++r) {
      for (uint32_t c = 0; c < cols; ++c) m(r, c) = f64();
    }
    return m;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(size_t n) const {
    if (bytes_.size() - pos_ < n) throw DataError("unexpected end of model file");
  }
  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

}  // namespace

void ModelBundle::validate() const {
  const int bins = frame_length / 2 + 1;
  if (mog) {
    mog->validate();
    if (mog->num_bins() != bins) {
      throw DataError("speech model has " + std::to_string(mog->num_bins()) +
                      " bins but frame length " + std::to_string(frame_length) +
                      " implies " + std::to_string(bins));
    }
  }
  if (net) {
    net->validate();
    if (net->input_dim() != kStackedDim) {
      throw DataError("classifier input dimension " +
                      std::to_string(net->input_dim()) + " != " +
                      std::to_string(kStackedDim));
    }
    if (mog && net->num_classes() != mog->num_components()) {
      throw DataError("classifier has " + std::to_string(net->num_classes()) +
                      " classes but the speech model has " +
                      std::to_string(mog->num_components()) + " components");
    }
  }
  if (noise && (noise->num_bins() != bins || noise->stddev.size() != bins)) {
    throw DataError("noise model bin count does not match frame length");
  }
}

uint64_t config_hash(std::string_view canonical_text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : canonical_text) {
    h ^= static_cast<uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<uint8_t> serialize_bundle(const ModelBundle& bundle) {
  bundle.validate();
  Writer w;
  w.raw(kMagic, 4);
  w.u32(kBundleVersion);
  w.u32(static_cast<uint32_t>(bundle.sample_rate));
  w.u32(static_cast<uint32_t>(bundle.frame_length));
  w.u64(bundle.config_hash);
  w.u32(static_cast<uint32_t>(bundle.mog.has_value() + bundle.net.has_value() +
                              bundle.noise.has_value()));
  if (bundle.mog) {
    const PhonemeMog& mog = *bundle.mog;
    w.u32(kTagMog);
    w.u32(static_cast<uint32_t>(mog.num_components()));
    w.u32(static_cast<uint32_t>(mog.num_bins()));
    for (Eigen::Index i = 0; i < mog.weights.size(); ++i) w.f64(mog.weights[i]);
    w.matrix(mog.means);
    w.matrix(mog.stds);
    w.u32(static_cast<uint32_t>(mog.labels.size()));
    for (const auto& label : mog.labels) {
      w.u32(static_cast<uint32_t>(label.size()));
      w.raw(label.data(), label.size());
    }
  }
  if (bundle.net) {
    const NnClassifier& net = *bundle.net;
    w.u32(kTagNet);
    w.u32(static_cast<uint32_t>(net.w1.rows()));
    w.u32(static_cast<uint32_t>(net.w1.cols()));
    w.u32(static_cast<uint32_t>(net.w2.rows()));
    w.u32(static_cast<uint32_t>(net.w2.cols()));
    w.matrix(net.w1);
    w.matrix(net.w2);
  }
  if (bundle.noise) {
    w.u32(kTagNoise);
    w.u32(static_cast<uint32_t>(bundle.noise->num_bins()));
    for (double v : bundle.noise->mean) w.f64(v);
    for (double v : bundle.noise->stddev) w.f64(v);
  }
  return w.take();
}

ModelBundle deserialize_bundle(std::span<const uint8_t> bytes) {
  if (bytes.size() < 4) throw DataError("unexpected end of model file");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw DataError("not a model file (bad magic)");
  }
  Reader r(bytes.subspan(4));
  const uint32_t version = r.u32();
  if (version != kBundleVersion) {
    throw DataError("unsupported model file version " + std::to_string(version) +
                    " (supported versions: " + std::to_string(kBundleVersion) +
                    ")");
  }
  ModelBundle b;
  b.sample_rate = static_cast<int>(r.dim("sample rate"));
  b.frame_length = static_cast<int>(r.dim("frame length"));
  b.config_hash = r.u64();
  const uint32_t sections = r.u32();
  for (uint32_t s = 0; s < sections; ++s) {
    const uint32_t tag = r.u32();
    if (tag == kTagMog && !b.mog) {
      PhonemeMog mog;
      const uint32_t m = r.dim("component count");
      const uint32_t k = r.dim("bin count");
      mog.weights = r.matrix(m, 1).col(0);
      mog.means = r.matrix(m, k);
      mog.stds = r.matrix(m, k);
      const uint32_t n_labels = r.u32();
      if (n_labels != 0 && n_labels != m) {
        throw DataError("model file label count does not match components");
      }
      for (uint32_t i = 0; i < n_labels; ++i) {
        const uint32_t len = r.u32();
        mog.labels.push_back(r.str(len));
      }
      b.mog = std::move(mog);
    } else if (tag == kTagNet && !b.net) {
      NnClassifier net;
      const uint32_t h = r.dim("hidden units");
      const uint32_t d1 = r.dim("input width");
      const uint32_t m = r.dim("class count");
      const uint32_t h1 = r.dim("hidden width");
      if (h1 != h + 1) throw DataError("model file classifier shapes disagree");
      net.w1 = r.matrix(h, d1);
      net.w2 = r.matrix(m, h1);
      b.net = std::move(net);
    } else if (tag == kTagNoise && !b.noise) {
      NoiseModel noise;
      const uint32_t k = r.dim("bin count");
      noise.mean = r.matrix(k, 1).col(0);
      noise.stddev = r.matrix(k, 1).col(0);
      b.noise = std::move(noise);
    } else {
      throw DataError("model file has an unknown or repeated section tag " +
                      std::to_string(tag));
    }
  }
  if (!r.done()) throw DataError("trailing bytes after model file sections");
  b.validate();
  return b;
}

void save_bundle(const ModelBundle& bundle, const std::string& path) {
  const std::vector<uint8_t> bytes = serialize_bundle(bundle);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path);
}

ModelBundle load_bundle(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  const std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return deserialize_bundle(bytes);
}

}  // namespace nnmm
