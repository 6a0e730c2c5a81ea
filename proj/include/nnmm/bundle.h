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

#ifndef NNMM_BUNDLE_H_
#define NNMM_BUNDLE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nnmm/mog.h"
#include "nnmm/nn_classifier.h"
#include "nnmm/noise_model.h"

namespace nnmm {

inline constexpr uint32_t kBundleVersion = 1;

// Trained models plus the front-end settings they were trained with.
//
// File layout, all integers and floats little-endian:
//   "NNMM" u32 version u32 sample_rate u32 frame_length u64 config_hash
//   u32 section_count, then per section a u32 tag followed by
//   explicit u32 dimensions and f64 values in row-major order.
struct ModelBundle {
  int sample_rate = 16000;
  int frame_length = 512;
  uint64_t config_hash = 0;
  std::optional<PhonemeMog> mog;
  std::optional<NnClassifier> net;
  std::optional<NoiseModel> noise;

  // Throws DataError if the parts disagree on class count or bin count.
  void validate() const;

  bool operator==(const ModelBundle&) const = default;
};

// FNV-1a 64-bit.
uint64_t config_hash(std::string_view canonical_text);

std::vector<uint8_t> serialize_bundle(const ModelBundle& bundle);
// Throws DataError on bad magic, unknown version, truncation, or
// inconsistent dimensions.
ModelBundle deserialize_bundle(std::span<const uint8_t> bytes);

void save_bundle(const ModelBundle& bundle, const std::string& path);
ModelBundle load_bundle(const std::string& path);

}  // namespace nnmm

#endif  // NNMM_BUNDLE_H_
