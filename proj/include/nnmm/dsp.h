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

#ifndef NNMM_DSP_H_
#define NNMM_DSP_H_

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace nnmm {

// Magnitudes are clamped to this before taking the log so log-spectra stay
// finite on digital silence.
inline constexpr double kMagnitudeFloor = 1e-10;

using ComplexFrame = Eigen::VectorXcd;
// One frame's natural-log magnitude spectrum, K = L/2 + 1 bins.
using LogSpectrum = Eigen::VectorXd;

struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;

  size_t size() const { return samples.size(); }
  // Throws DataError on a non-positive rate or non-finite samples.
  void validate() const;
};

enum class WindowType { kSqrtHann, kRectangular };

// Periodic window of the given length. sqrt-Hann squared is a periodic Hann,
// which overlap-adds to a constant at hop L/4.
std::vector<double> make_window(WindowType type, int length);

struct StftOptions {
  int frame_length = 512;
  WindowType window = WindowType::kSqrtHann;
  // Zero-pad by L - hop at both ends so every input sample is covered by a
  // full set of overlapping windows.
  bool pad_edges = true;
};

struct ComplexSpectrogram {
  std::vector<ComplexFrame> frames;
  int frame_length = 0;
  int hop = 0;
  WindowType window = WindowType::kSqrtHann;
  int sample_rate = 0;
  // Leading zero padding (samples) and the original input length, used to
  // map the overlap-add output back onto the input time axis.
  int padding = 0;
  size_t signal_length = 0;

  size_t num_frames() const { return frames.size(); }
  int num_bins() const { return frame_length / 2 + 1; }
  // First sample of frame n in input coordinates (negative inside padding).
  long frame_start(size_t n) const {
    return static_cast<long>(n) * hop - padding;
  }
};

// Frames of length L at hop L/4, one-sided DFT of each windowed segment.
// Throws DataError("utterance too short") if the input is shorter than L.
ComplexSpectrogram stft(const Waveform& w, const StftOptions& options = {});

// Weighted overlap-add with per-sample squared-window normalization. Output
// has (num_frames - 1) * hop + L samples in padded coordinates.
Waveform istft(const ComplexSpectrogram& s);

// istft cropped back to the original input span.
Waveform istft_signal(const ComplexSpectrogram& s);

// ln(max(|frame_k|, kMagnitudeFloor)) per bin.
LogSpectrum log_magnitude(const ComplexFrame& frame);

// exp(xhat_k) with the noisy phase of frame_k. Zero-magnitude bins map to 0.
ComplexFrame reconstruct_frame(const LogSpectrum& xhat,
                               const ComplexFrame& noisy_frame);

}  // namespace nnmm

#endif  // NNMM_DSP_H_
