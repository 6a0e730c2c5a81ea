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

#include "nnmm/features.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nnmm/errors.h"

namespace nnmm {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

MfccExtractor::MfccExtractor(int num_bins, int sample_rate, int num_filters)
    : filterbank_(Eigen::MatrixXd::Zero(num_filters, num_bins)),
      dct_(kNumCepstra, num_filters) {
  if (num_bins < 2 || sample_rate <= 0 || num_filters < kNumCepstra) {
    throw std::invalid_argument("MfccExtractor: bad dimensions");
  }
  const int frame_length = 2 * (num_bins - 1);
  const double top = hz_to_mel(sample_rate / 2.0);
  std::vector<double> edges(num_filters + 2);
  for (int j = 0; j < num_filters + 2; ++j) {
    edges[j] = top * j / (num_filters + 1);
  }
  for (int k = 0; k < num_bins; ++k) {
    const double mel =
        hz_to_mel(static_cast<double>(k) * sample_rate / frame_length);
    for (int j = 0; j < num_filters; ++j) {
      const double left = edges[j];
      const double centre = edges[j + 1];
      const double right = edges[j + 2];
      if (mel > left && mel <= centre) {
        filterbank_(j, k) = (mel - left) / (centre - left);
      } else if (mel > centre && mel < right) {
        filterbank_(j, k) = (right - mel) / (right - centre);
      }
    }
  }
  const double norm = std::sqrt(2.0 / num_filters);
  for (int i = 0; i < kNumCepstra; ++i) {
    for (int j = 0; j < num_filters; ++j) {
      dct_(i, j) =
          norm * std::cos(std::numbers::pi * i * (j + 0.5) / num_filters);
    }
  }
}

Eigen::VectorXd MfccExtractor::compute(const ComplexFrame& frame) const {
  if (frame.size() != filterbank_.cols()) {
    throw std::invalid_argument("mfcc: frame has the wrong number of bins");
  }
  const Eigen::VectorXd power = frame.cwiseAbs2();
  Eigen::VectorXd log_energy = filterbank_ * power;
  for (Eigen::Index j = 0; j < log_energy.size(); ++j) {
    log_energy[j] = std::log(std::max(log_energy[j], kMelEnergyFloor));
  }
  return dct_ * log_energy;
}

Eigen::VectorXd mfcc(const ComplexFrame& frame, int sample_rate) {
  return MfccExtractor(static_cast<int>(frame.size()), sample_rate)
      .compute(frame);
}

namespace {

std::vector<Eigen::VectorXd> regression(
    const std::vector<Eigen::VectorXd>& seq) {
  const long n = static_cast<long>(seq.size());
  double denom = 0.0;
  for (int d = 1; d <= kDeltaWindow; ++d) denom += 2.0 * d * d;
  std::vector<Eigen::VectorXd> out;
  out.reserve(seq.size());
  for (long t = 0; t < n; ++t) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(seq[t].size());
    for (int d = 1; d <= kDeltaWindow; ++d) {
      const long ahead = std::min(t + d, n - 1);
      const long behind = std::max(t - d, 0L);
      acc += d * (seq[ahead] - seq[behind]);
    }
    out.push_back(acc / denom);
  }
  return out;
}

}  // namespace

std::vector<FeatureFrame> deltas(const std::vector<Eigen::VectorXd>& seq) {
  if (seq.empty()) throw std::invalid_argument("deltas: empty sequence");
  const auto d1 = regression(seq);
  const auto d2 = regression(d1);
  std::vector<FeatureFrame> out;
  out.reserve(seq.size());
  for (size_t t = 0; t < seq.size(); ++t) {
    const Eigen::Index c = seq[t].size();
    FeatureFrame f(3 * c);
    f << seq[t], d1[t], d2[t];
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<FeatureFrame> cmvn(const std::vector<FeatureFrame>& seq) {
  if (seq.size() < 2) {
    throw DataError("CMVN undefined for an utterance of fewer than 2 frames");
  }
  const double n = static_cast<double>(seq.size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(seq[0].size());
  for (const auto& f : seq) mean += f;
  mean /= n;
  Eigen::VectorXd var = Eigen::VectorXd::Zero(mean.size());
  for (const auto& f : seq) var += (f - mean).cwiseAbs2();
  var /= n;

  // Variance at rounding-noise level counts as constant.
  Eigen::VectorXd inv_std(mean.size());
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    const double scale = std::max(1.0, mean[i] * mean[i]);
    inv_std[i] = var[i] > 1e-24 * scale ? 1.0 / std::sqrt(var[i]) : 0.0;
  }
  std::vector<FeatureFrame> out;
  out.reserve(seq.size());
  for (const auto& f : seq) {
    out.push_back((f - mean).cwiseProduct(inv_std));
  }
  return out;
}

StackedFeature stack_context(const std::vector<FeatureFrame>& seq, size_t n) {
  if (n >= seq.size()) throw std::out_of_range("stack_context: bad frame");
  const Eigen::Index dim = seq[0].size();
  const long last = static_cast<long>(seq.size()) - 1;
  StackedFeature out((2 * kContextFrames + 1) * dim);
  for (int j = 0; j < 2 * kContextFrames + 1; ++j) {
    const long idx =
        std::clamp(static_cast<long>(n) - kContextFrames + j, 0L, last);
    out.segment(j * dim, dim) = seq[idx];
  }
  return out;
}

std::vector<StackedFeature> utterance_features(const ComplexSpectrogram& s) {
  const MfccExtractor extractor(s.num_bins(), s.sample_rate);
  std::vector<Eigen::VectorXd> cepstra;
  cepstra.reserve(s.num_frames());
  for (const auto& frame : s.frames) cepstra.push_back(extractor.compute(frame));
  const auto normalized = cmvn(deltas(cepstra));
  std::vector<StackedFeature> out;
  out.reserve(normalized.size());
  for (size_t n = 0; n < normalized.size(); ++n) {
    out.push_back(stack_context(normalized, n));
  }
  return out;
}

}  // namespace nnmm
