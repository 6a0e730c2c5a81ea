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

#include "nnmm/metrics.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "nnmm/errors.h"

namespace nnmm {
namespace {

void check_pair(const Waveform& clean, const Waveform& enhanced) {
  if (clean.size() != enhanced.size()) {
    throw DataError("reference and test signals differ in length (" +
                    std::to_string(clean.size()) + " vs " +
                    std::to_string(enhanced.size()) + ")");
  }
}

double silence_threshold(double loudest) {
  return loudest * std::pow(10.0, kSilenceRelativeDb / 10.0);
}

}  // namespace

double segmental_snr(const Waveform& clean, const Waveform& enhanced,
                     double frame_ms) {
  check_pair(clean, enhanced);
  const auto frame = static_cast<size_t>(
      std::max(1L, std::lround(frame_ms * clean.sample_rate / 1000.0)));
  const size_t num_frames = clean.size() / frame;
  std::vector<double> signal(num_frames, 0.0), residual(num_frames, 0.0);
  for (size_t f = 0; f < num_frames; ++f) {
    for (size_t i = f * frame; i < (f + 1) * frame; ++i) {
      const double d = clean.samples[i] - enhanced.samples[i];
      signal[f] += clean.samples[i] * clean.samples[i];
      residual[f] += d * d;
    }
  }
  const double loudest =
      num_frames ? *std::max_element(signal.begin(), signal.end()) : 0.0;
  if (loudest <= 0.0) throw DataError("reference signal is silent");
  const double threshold = silence_threshold(loudest);

  double sum = 0.0;
  size_t used = 0;
  for (size_t f = 0; f < num_frames; ++f) {
    if (signal[f] < threshold) continue;
    const double snr = residual[f] > 0.0
                           ? 10.0 * std::log10(signal[f] / residual[f])
                           : kSegSnrCeilingDb;
    sum += std::clamp(snr, kSegSnrFloorDb, kSegSnrCeilingDb);
    ++used;
  }
  return sum / static_cast<double>(used);
}

double log_spectral_distance(const Waveform& clean, const Waveform& enhanced,
                             int frame_length) {
  check_pair(clean, enhanced);
  const StftOptions options{.frame_length = frame_length};
  const ComplexSpectrogram ref = stft(clean, options);
  const ComplexSpectrogram test = stft(enhanced, options);

  std::vector<double> energy(ref.num_frames());
  for (size_t n = 0; n < ref.num_frames(); ++n) {
    energy[n] = ref.frames[n].squaredNorm();
  }
  const double loudest = *std::max_element(energy.begin(), energy.end());
  if (loudest <= 0.0) return 0.0;
  const double threshold = silence_threshold(loudest);
  const double to_db = 20.0 / std::numbers::ln10;

  double sq = 0.0;
  size_t count = 0;
  for (size_t n = 0; n < ref.num_frames(); ++n) {
    if (energy[n] < threshold) continue;
    const LogSpectrum a = log_magnitude(ref.frames[n]);
    const LogSpectrum b = log_magnitude(test.frames[n]);
    sq += ((a - b) * to_db).squaredNorm();
    count += static_cast<size_t>(a.size());
  }
  return count ? std::sqrt(sq / static_cast<double>(count)) : 0.0;
}

}  // namespace nnmm
