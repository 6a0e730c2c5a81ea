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

#include <gtest/gtest.h>

#include "nnmm/dsp.h"
#include "nnmm/errors.h"
#include "nnmm/random.h"

namespace nnmm {
namespace {

ComplexFrame random_frame(int bins, uint64_t seed) {
  Rng rng(seed);
  ComplexFrame f(bins);
  for (int k = 0; k < bins; ++k) f[k] = {rng.normal(), rng.normal()};
  return f;
}

// Direct summation: triangle weights evaluated per (filter, bin) pair.
Eigen::VectorXd naive_mfcc(const ComplexFrame& frame, int sample_rate) {
  const int bins = static_cast<int>(frame.size());
  const int L = 2 * (bins - 1);
  const int nf = kNumMelFilters;
  const double top = 2595.0 * std::log10(1.0 + sample_rate / 2.0 / 700.0);
  std::vector<double> log_e(nf);
  for (int j = 0; j < nf; ++j) {
    const double l = top * j / (nf + 1);
    const double c = top * (j + 1) / (nf + 1);
    const double r = top * (j + 2) / (nf + 1);
    double e = 0.0;
    for (int k = 0; k < bins; ++k) {
      const double hz = static_cast<double>(k) * sample_rate / L;
      const double m = 2595.0 * std::log10(1.0 + hz / 700.0);
      const double w = std::max(0.0, std::min((m - l) / (c - l), (r - m) / (r - c)));
      e += w * std::norm(frame[k]);
    }
    log_e[j] = std::log(std::max(e, 1e-10));
  }
  Eigen::VectorXd out(kNumCepstra);
  for (int i = 0; i < kNumCepstra; ++i) {
    double acc = 0.0;
    for (int j = 0; j < nf; ++j) {
      acc += log_e[j] * std::cos(std::numbers::pi * i * (2 * j + 1) / (2.0 * nf));
    }
    out[i] = std::sqrt(2.0 / nf) * acc;
  }
  return out;
}

TEST(MelScaleTest, RoundTrip) {
  for (double hz : {0.0, 100.0, 1000.0, 8000.0}) {
    EXPECT_NEAR(mel_to_hz(hz_to_mel(hz)), hz, 1e-9);
  }
  EXPECT_NEAR(hz_to_mel(1000.0), 1000.0, 0.5);
}

TEST(MfccTest, ZeroFrameGivesOnlyC0) {
  const Eigen::VectorXd c = mfcc(ComplexFrame::Zero(257), 16000);
  ASSERT_EQ(c.size(), kNumCepstra);
  EXPECT_NEAR(c[0], std::sqrt(2.0 / kNumMelFilters) * kNumMelFilters *
                        std::log(kMelEnergyFloor),
              1e-9);
  for (int i = 1; i < kNumCepstra; ++i) EXPECT_NEAR(c[i], 0.0, 1e-9);
}

TEST(MfccTest, MagnitudeScaleOnlyShiftsC0) {
  const ComplexFrame f = random_frame(257, 5);
  const Eigen::VectorXd a = mfcc(f, 16000);
  const Eigen::VectorXd b = mfcc(f * std::exp(1.0), 16000);
  // Power scales by e^2, so every log energy moves by 2.
  EXPECT_NEAR(b[0] - a[0], 2.0 * std::sqrt(2.0 / kNumMelFilters) * kNumMelFilters,
              1e-9);
  for (int i = 1; i < kNumCepstra; ++i) EXPECT_NEAR(b[i], a[i], 1e-9);
}

TEST(MfccTest, MatchesDirectSummation) {
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    const ComplexFrame f = random_frame(257, seed);
    const Eigen::VectorXd got = mfcc(f, 16000);
    const Eigen::VectorXd want = naive_mfcc(f, 16000);
    for (int i = 0; i < kNumCepstra; ++i) EXPECT_NEAR(got[i], want[i], 1e-8);
  }
}

TEST(MfccTest, EveryFilterSeesAtLeastOneBin) {
  const MfccExtractor ex(257, 16000);
  for (int j = 0; j < kNumMelFilters; ++j) {
    EXPECT_GT(ex.filterbank().row(j).sum(), 0.0) << "filter " << j;
  }
}

std::vector<Eigen::VectorXd> random_sequence(size_t n, int dim, uint64_t seed) {
  Rng rng(seed);
  std::vector<Eigen::VectorXd> seq(n, Eigen::VectorXd(dim));
  for (auto& v : seq) {
    for (int i = 0; i < dim; ++i) v[i] = rng.normal();
  }
  return seq;
}

TEST(DeltasTest, ConstantSequenceHasZeroDeltas) {
  const std::vector<Eigen::VectorXd> seq(10, Eigen::VectorXd::Constant(13, 3.5));
  for (const auto& f : deltas(seq)) {
    EXPECT_EQ(f.size(), kFeatureDim);
    EXPECT_NEAR(f.tail(26).cwiseAbs().maxCoeff(), 0.0, 1e-15);
  }
}

TEST(DeltasTest, LinearRampHasSlopeInInterior) {
  const double slope = 0.7;
  std::vector<Eigen::VectorXd> seq;
  for (int t = 0; t < 20; ++t) seq.push_back(Eigen::VectorXd::Constant(13, slope * t));
  const auto out = deltas(seq);
  for (int t = 2; t < 18; ++t) EXPECT_NEAR(out[t][13], slope, 1e-12);
  // Second-order deltas vanish where the first-order window is all interior.
  for (int t = 4; t < 16; ++t) EXPECT_NEAR(out[t][26], 0.0, 1e-12);
}

TEST(DeltasTest, MatchesBruteForceRegression) {
  const auto seq = random_sequence(15, 13, 3);
  const int n = static_cast<int>(seq.size());
  auto at = [n](const std::vector<Eigen::VectorXd>& s, int t) {
    return s[std::clamp(t, 0, n - 1)];
  };
  auto reg = [&](const std::vector<Eigen::VectorXd>& s) {
    std::vector<Eigen::VectorXd> d;
    for (int t = 0; t < n; ++t) {
      Eigen::VectorXd v = (1.0 * (at(s, t + 1) - at(s, t - 1)) +
                           2.0 * (at(s, t + 2) - at(s, t - 2))) /
                          10.0;
      d.push_back(v);
    }
    return d;
  };
  const auto d1 = reg(seq);
  const auto d2 = reg(d1);
  const auto out = deltas(seq);
  for (int t = 0; t < n; ++t) {
    for (int i = 0; i < 13; ++i) {
      EXPECT_NEAR(out[t][i], seq[t][i], 1e-12);
      EXPECT_NEAR(out[t][13 + i], d1[t][i], 1e-12);
      EXPECT_NEAR(out[t][26 + i], d2[t][i], 1e-12);
    }
  }
}

TEST(CmvnTest, ZeroMeanUnitVariance) {
  const auto out = cmvn(random_sequence(50, kFeatureDim, 9));
  for (int i = 0; i < kFeatureDim; ++i) {
    double mean = 0.0;
    for (const auto& f : out) mean += f[i];
    mean /= out.size();
    double var = 0.0;
    for (const auto& f : out) var += (f[i] - mean) * (f[i] - mean);
    var /= out.size();
    EXPECT_NEAR(mean, 0.0, 1e-10);
    EXPECT_NEAR(var, 1.0, 1e-10);
  }
}

TEST(CmvnTest, InvariantToPositiveAffineMaps) {
  const auto seq = random_sequence(30, 5, 4);
  Eigen::VectorXd a(5), b(5);
  a << 0.5, 2.0, 10.0, 1e-3, 7.0;
  b << -3.0, 0.0, 100.0, 2.0, -0.1;
  std::vector<FeatureFrame> mapped;
  for (const auto& f : seq) mapped.push_back(a.cwiseProduct(f) + b);
  const auto x = cmvn(seq);
  const auto y = cmvn(mapped);
  for (size_t t = 0; t < seq.size(); ++t) {
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(x[t][i], y[t][i], 1e-9);
  }
}

TEST(CmvnTest, TwoFrameExample) {
  const std::vector<FeatureFrame> seq = {Eigen::VectorXd::Constant(1, 0.0),
                                         Eigen::VectorXd::Constant(1, 2.0)};
  const auto out = cmvn(seq);
  EXPECT_DOUBLE_EQ(out[0][0], -1.0);
  EXPECT_DOUBLE_EQ(out[1][0], 1.0);
}

TEST(CmvnTest, ConstantCoefficientMapsToZeroAndShortInputThrows) {
  const std::vector<FeatureFrame> seq(4, Eigen::VectorXd::Constant(2, 0.1));
  for (const auto& f : cmvn(seq)) EXPECT_EQ(f.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(cmvn({seq[0]}), DataError);
}

TEST(StackContextTest, InteriorAndEdges) {
  const auto seq = random_sequence(12, kFeatureDim, 2);
  const StackedFeature mid = stack_context(seq, 6);
  ASSERT_EQ(mid.size(), kStackedDim);
  for (int j = 0; j < 9; ++j) {
    EXPECT_EQ(mid.segment(j * kFeatureDim, kFeatureDim), seq[6 - 4 + j]);
  }
  const StackedFeature first = stack_context(seq, 0);
  for (int j = 0; j < 5; ++j) {
    EXPECT_EQ(first.segment(j * kFeatureDim, kFeatureDim), seq[0]);
  }
  const StackedFeature last = stack_context(seq, 11);
  for (int j = 4; j < 9; ++j) {
    EXPECT_EQ(last.segment(j * kFeatureDim, kFeatureDim), seq[11]);
  }
  EXPECT_THROW(stack_context(seq, 12), std::out_of_range);
}

TEST(UtteranceFeaturesTest, OneStackedVectorPerFrame) {
  Rng rng(1);
  Waveform w;
  w.samples.resize(8000);
  for (double& s : w.samples) s = rng.normal();
  const ComplexSpectrogram s = stft(w);
  const auto feats = utterance_features(s);
  ASSERT_EQ(feats.size(), s.num_frames());
  for (const auto& f : feats) {
    EXPECT_EQ(f.size(), kStackedDim);
    EXPECT_TRUE(f.allFinite());
  }
}

TEST(CmvnTest, Idempotent) {
  const auto once = cmvn(random_sequence(40, kFeatureDim, 12));
  const auto twice = cmvn(once);
  for (size_t t = 0; t < once.size(); ++t) {
    EXPECT_LT((once[t] - twice[t]).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(UtteranceFeaturesTest, Deterministic) {
  Rng rng(2);
  Waveform w;
  w.samples.resize(6000);
  for (double& s : w.samples) s = rng.normal();
  const auto a = utterance_features(stft(w));
  const auto b = utterance_features(stft(w));
  for (size_t n = 0; n < a.size(); ++n) EXPECT_EQ(a[n], b[n]);
}

}  // namespace
}  // namespace nnmm
