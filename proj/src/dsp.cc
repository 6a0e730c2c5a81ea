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

#include "nnmm/dsp.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "nnmm/errors.h"

namespace nnmm {
namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    time_ = fftw_alloc_real(n);
    freq_ = fftw_alloc_complex(n / 2 + 1);
    forward_ = fftw_plan_dft_r2c_1d(n, time_, freq_, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(n, freq_, time_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
    fftw_free(time_);
    fftw_free(freq_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* time() { return time_; }

  ComplexFrame forward() {
    fftw_execute(forward_);
    ComplexFrame out(n_ / 2 + 1);
    for (int k = 0; k <= n_ / 2; ++k) {
      out[k] = {freq_[k][0], freq_[k][1]};
    }
    return out;
  }

  // Unnormalized inverse into time().
  void inverse(const ComplexFrame& spectrum) {
    for (int k = 0; k <= n_ / 2; ++k) {
      freq_[k][0] = spectrum[k].real();
      freq_[k][1] = spectrum[k].imag();
    }
    // c2r ignores the imaginary parts of DC and Nyquist, matching a
    // Hermitian-symmetric full spectrum.
    fftw_execute(inverse_);
  }

 private:
  int n_;
  double* time_ = nullptr;
  fftw_complex* freq_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

}  // namespace

void Waveform::validate() const {
  if (sample_rate <= 0) {
    throw DataError("invalid sample rate " + std::to_string(sample_rate));
  }
  for (double s : samples) {
    if (!std::isfinite(s)) throw DataError("waveform has non-finite samples");
  }
}

std::vector<double> make_window(WindowType type, int length) {
  std::vector<double> w(length, 1.0);
  if (type == WindowType::kSqrtHann) {
    for (int n = 0; n < length; ++n) {
      const double hann =
          0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / length);
      w[n] = std::sqrt(hann);
    }
  }
  return w;
}

ComplexSpectrogram stft(const Waveform& w, const StftOptions& options) {
  const int frame_length = options.frame_length;
  if (frame_length < 4 || frame_length % 4 != 0) {
    throw std::invalid_argument("frame length must be a positive multiple of 4");
  }
  if (w.size() < static_cast<size_t>(frame_length)) {
    throw DataError("utterance too short");
  }
  const int hop = frame_length / 4;

  ComplexSpectrogram s;
  s.frame_length = frame_length;
  s.hop = hop;
  s.window = options.window;
  s.sample_rate = w.sample_rate;
  s.signal_length = w.size();
  s.padding = options.pad_edges ? frame_length - hop : 0;

  size_t num_frames;
  if (options.pad_edges) {
    // Trailing pad of at least L - hop, rounded up to a whole hop.
    const size_t min_total = w.size() + 2 * static_cast<size_t>(s.padding);
    num_frames = (min_total - frame_length + hop - 1) / hop + 1;
  } else {
    num_frames = (w.size() - frame_length) / hop + 1;
  }

  const std::vector<double> window = make_window(options.window, frame_length);
  RealFft fft(frame_length);
  s.frames.reserve(num_frames);
  const long n_samples = static_cast<long>(w.size());
  for (size_t n = 0; n < num_frames; ++n) {
    const long start = s.frame_start(n);
    double* buf = fft.time();
    for (int j = 0; j < frame_length; ++j) {
      const long idx = start + j;
      const double x = (idx >= 0 && idx < n_samples) ? w.samples[idx] : 0.0;
      buf[j] = x * window[j];
    }
    s.frames.push_back(fft.forward());
  }
  return s;
}

Waveform istft(const ComplexSpectrogram& s) {
  if (s.frames.empty()) throw DataError("empty spectrogram");
  const int frame_length = s.frame_length;
  for (const auto& f : s.frames) {
    if (f.size() != s.num_bins()) {
      throw std::invalid_argument("inconsistent spectrogram frame size");
    }
  }
  const size_t out_len = (s.frames.size() - 1) * s.hop + frame_length;
  std::vector<double> out(out_len, 0.0);
  std::vector<double> norm(out_len, 0.0);
  const std::vector<double> window = make_window(s.window, frame_length);

  RealFft fft(frame_length);
  const double scale = 1.0 / frame_length;
  for (size_t n = 0; n < s.frames.size(); ++n) {
    fft.inverse(s.frames[n]);
    const double* buf = fft.time();
    const size_t start = n * s.hop;
    for (int j = 0; j < frame_length; ++j) {
      out[start + j] += buf[j] * scale * window[j];
      norm[start + j] += window[j] * window[j];
    }
  }
  for (size_t i = 0; i < out_len; ++i) {
    out[i] = norm[i] > 1e-12 ? out[i] / norm[i] : 0.0;
  }
  return Waveform{std::move(out), s.sample_rate};
}

Waveform istft_signal(const ComplexSpectrogram& s) {
  Waveform full = istft(s);
  const size_t begin = static_cast<size_t>(s.padding);
  const size_t end = std::min(full.size(), begin + s.signal_length);
  Waveform out;
  out.sample_rate = s.sample_rate;
  out.samples.assign(full.samples.begin() + begin, full.samples.begin() + end);
  out.samples.resize(s.signal_length, 0.0);
  return out;
}

LogSpectrum log_magnitude(const ComplexFrame& frame) {
  LogSpectrum out(frame.size());
  for (Eigen::Index k = 0; k < frame.size(); ++k) {
    out[k] = std::log(std::max(std::abs(frame[k]), kMagnitudeFloor));
  }
  return out;
}

ComplexFrame reconstruct_frame(const LogSpectrum& xhat,
                               const ComplexFrame& noisy_frame) {
  if (xhat.size() != noisy_frame.size()) {
    throw std::invalid_argument("reconstruct_frame: length mismatch");
  }
  ComplexFrame out(noisy_frame.size());
  for (Eigen::Index k = 0; k < noisy_frame.size(); ++k) {
    const double mag = std::abs(noisy_frame[k]);
    out[k] = mag > 0.0 ? std::exp(xhat[k]) * (noisy_frame[k] / mag)
                       : std::complex<double>(0.0, 0.0);
  }
  return out;
}

}  // namespace nnmm
