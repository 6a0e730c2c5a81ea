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

#ifndef NNMM_FEATURES_H_
#define NNMM_FEATURES_H_

#include <vector>

#include <Eigen/Dense>

#include "nnmm/dsp.h"

namespace nnmm {

inline constexpr int kNumMelFilters = 26;
inline constexpr int kNumCepstra = 13;
// Static + delta + delta-delta.
inline constexpr int kFeatureDim = 3 * kNumCepstra;
inline constexpr int kContextFrames = 4;
inline constexpr int kStackedDim = (2 * kContextFrames + 1) * kFeatureDim;
inline constexpr int kDeltaWindow = 2;
inline constexpr double kMelEnergyFloor = 1e-10;

using FeatureFrame = Eigen::VectorXd;    // kFeatureDim
using StackedFeature = Eigen::VectorXd;  // kStackedDim

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// HTK-style filterbank: triangles equally spaced on the mel scale from 0 Hz
// to Nyquist, evaluated at the DFT bin frequencies, then log + DCT-II.
class MfccExtractor {
 public:
  MfccExtractor(int num_bins, int sample_rate,
                int num_filters = kNumMelFilters);

  // 13 cepstra (c0..c12) of one spectrum frame.
  Eigen::VectorXd compute(const ComplexFrame& frame) const;

  // num_filters x num_bins.
  const Eigen::MatrixXd& filterbank() const { return filterbank_; }

 private:
  Eigen::MatrixXd filterbank_;
  Eigen::MatrixXd dct_;  // kNumCepstra x num_filters
};

// One-off convenience; builds the filterbank on every call.
Eigen::VectorXd mfcc(const ComplexFrame& frame, int sample_rate);

// Appends regression deltas (half-window 2, edge replication) and deltas of
// the deltas to each 13-dim frame.
std::vector<FeatureFrame> deltas(const std::vector<Eigen::VectorXd>& seq);

// Per-utterance mean/variance normalization of every coefficient. Constant
// coefficients come out as 0. Throws DataError for fewer than two frames.
std::vector<FeatureFrame> cmvn(const std::vector<FeatureFrame>& seq);

// [f(n-4) ... f(n) ... f(n+4)], indices clamped to the sequence.
StackedFeature stack_context(const std::vector<FeatureFrame>& seq, size_t n);

// Full classifier front end for one utterance: MFCC, deltas, CMVN, context
// stacking. One stacked vector per spectrogram frame.
std::vector<StackedFeature> utterance_features(const ComplexSpectrogram& s);

}  // namespace nnmm

#endif  // NNMM_FEATURES_H_
