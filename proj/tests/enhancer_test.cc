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

#include "nnmm/enhancer.h"

#include <cmath>

#include <gtest/gtest.h>

#include "nnmm/corpus.h"
#include "nnmm/errors.h"
#include "nnmm/random.h"

namespace nnmm {
namespace {

struct Models {
  std::vector<LabeledUtterance> corpus;
  PhonemeMog mog;
  NnClassifier net;
};

const Models& models() {
  static const Models m = [] {
    Models out;
    SyntheticCorpusSpec spec = SyntheticCorpusSpec::with_classes(3, 5);
    spec.num_utterances = 6;
    out.corpus = synthesize_corpus(spec);
    const TrainingFrames frames = extract_training_frames(out.corpus, 512);
    out.mog = train_supervised(frames.log_spectra, 3);
    out.net = train(TrainingBatch::from_features(frames.features, frames.labels), 3,
                    {.hidden_units = 16, .epochs = 5, .seed = 2})
                  .net;
    return out;
  }();
  return m;
}

Waveform white(size_t n, double sd, uint64_t seed) {
  Rng rng(seed);
  Waveform w;
  w.samples.resize(n);
  for (double& s : w.samples) s = rng.normal(0.0, sd);
  return w;
}

double rms(const std::vector<double>& v, size_t from, size_t to) {
  double acc = 0.0;
  for (size_t i = from; i < to; ++i) acc += v[i] * v[i];
  return std::sqrt(acc / static_cast<double>(to - from));
}

double interior_rms_diff(const Waveform& a, const Waveform& b) {
  double acc = 0.0;
  const size_t margin = 512;
  for (size_t i = margin; i + margin < a.size(); ++i) {
    acc += (a.samples[i] - b.samples[i]) * (a.samples[i] - b.samples[i]);
  }
  return std::sqrt(acc / static_cast<double>(a.size() - 2 * margin));
}

TEST(EnhancerConfigTest, ValidationAndNames) {
  EXPECT_NO_THROW(EnhancerConfig{}.validate());
  EXPECT_THROW((EnhancerConfig{.alpha = 0.0}).validate(), std::invalid_argument);
  EXPECT_THROW((EnhancerConfig{.alpha = 1.0}).validate(), std::invalid_argument);
  EXPECT_THROW((EnhancerConfig{.beta = -0.1}).validate(), std::invalid_argument);
  EXPECT_THROW((EnhancerConfig{.frame_length = 510}).validate(), std::invalid_argument);
  EXPECT_THROW((EnhancerConfig{.noise_prefix_seconds = 0.01}).validate(),
               std::invalid_argument);
  EXPECT_EQ(parse_estimator(to_string(Estimator::kMixMaxMmse)), Estimator::kMixMaxMmse);
  EXPECT_EQ(parse_posterior_source("generative"), PosteriorSource::kGenerative);
  EXPECT_THROW(parse_estimator("wiener"), std::invalid_argument);
}

TEST(NoisePrefixTest, FramesFullyInsidePrefix) {
  const ComplexSpectrogram s = stft(white(16000, 1.0, 1));
  const std::vector<size_t> idx = noise_prefix_frames(s, 0.25);
  ASSERT_FALSE(idx.empty());
  for (size_t n : idx) {
    EXPECT_GE(s.frame_start(n), 0);
    EXPECT_LE(s.frame_start(n) + 512, 4000);
  }
  EXPECT_EQ(idx.size(), 28u);
}

TEST(EnhanceTest, ZeroBetaIsNoOp) {
  const Models& m = models();
  const Waveform noisy =
      mix_at_snr(m.corpus[0].audio, white(m.corpus[0].audio.size(), 1.0, 3), 5.0);
  const EnhancementResult r =
      enhance_utterance(noisy, m.mog, m.net, {.beta = 0.0});
  ASSERT_EQ(r.audio.size(), noisy.size());
  EXPECT_LT(interior_rms_diff(r.audio, noisy), 1e-6);
}

TEST(EnhanceTest, NoiseOnlyInputIsSuppressed) {
  const Models& m = models();
  const Waveform noise = white(32000, 0.003, 4);
  const EnhancementResult r = enhance_utterance(noise, m.mog, m.net, {});
  EXPECT_LT(r.report.overall_mean_spp(), 0.35);
  EXPECT_LT(rms(r.audio.samples, 0, r.audio.size()),
            rms(noise.samples, 0, noise.size()));
  EXPECT_EQ(r.report.frames_processed, r.report.mean_spp.size());
}

TEST(EnhanceTest, NearlyCleanSpeechPassesThrough) {
  const Models& m = models();
  Waveform input = m.corpus[1].audio;
  const Waveform floor = white(input.size(), 1e-10, 5);
  for (size_t i = 0; i < input.size(); ++i) input.samples[i] += floor.samples[i];
  const EnhancementResult r = enhance_utterance(input, m.mog, m.net, {});
  const double in = rms(input.samples, 0, input.size());
  const double out = rms(r.audio.samples, 0, r.audio.size());
  EXPECT_NEAR(out / in, 1.0, 0.1);
}

TEST(EnhanceTest, ErrorsOnShortInputAndRateMismatch) {
  const Models& m = models();
  EXPECT_THROW(enhance_utterance(white(4000, 1.0, 1), m.mog, m.net, {}), DataError);
  Waveform w = white(16000, 1.0, 1);
  w.sample_rate = 8000;
  EXPECT_THROW(enhance_utterance(w, m.mog, m.net, {}), DataError);
  EXPECT_THROW(enhance(white(16000, 1.0, 1), m.mog, nullptr, {}), DataError);
}

TEST(MixMaxOriginalTest, FiniteOutputAndNegligibleNoise) {
  const Models& m = models();
  const Waveform& clean = m.corpus[2].audio;
  const Waveform noisy = mix_at_snr(clean, white(clean.size(), 1.0, 6), 5.0);
  const EnhancementResult r = enhance_mixmax_original(noisy, m.mog, {});
  for (double s : r.audio.samples) ASSERT_TRUE(std::isfinite(s));

  Waveform quiet = clean;
  const Waveform floor = white(clean.size(), 1e-10, 7);
  for (size_t i = 0; i < quiet.size(); ++i) quiet.samples[i] += floor.samples[i];
  const EnhancementResult q = enhance_mixmax_original(quiet, m.mog, {});
  EXPECT_LT(interior_rms_diff(q.audio, quiet), 1e-3);
}

TEST(EnhanceLogSpectraTest, MatchesManualComposition) {
  PhonemeMog mog;
  mog.weights = Eigen::Vector2d(0.4, 0.6);
  mog.means = RowMatrix(2, 1);
  mog.means << 0.0, 3.0;
  mog.stds = RowMatrix(2, 1);
  mog.stds << 1.0, 0.7;
  mog.labels = {"a", "b"};
  const NoiseModel init{LogSpectrum::Constant(1, 0.5), LogSpectrum::Constant(1, 0.8)};
  Rng rng(9);
  std::vector<LogSpectrum> z;
  for (int n = 0; n < 50; ++n) z.push_back(LogSpectrum::Constant(1, rng.uniform(-2, 5)));

  for (bool adapt : {false, true}) {
    const EnhancerConfig cfg{.estimator = Estimator::kMixMaxMmse,
                             .posterior_source = PosteriorSource::kGenerative,
                             .adapt_noise = adapt};
    const SpectralEnhancement out = enhance_log_spectra(z, {}, init, mog, nullptr, cfg);
    NoiseModel noise = init;
    for (size_t n = 0; n < z.size(); ++n) {
      const Eigen::VectorXd p = generative_posterior(z[n], mog, noise).p;
      const LogSpectrum xhat = mmse_estimate(z[n], p, mog, noise).xhat;
      const Eigen::VectorXd spp = hybrid_spp(p, z[n], mog, noise).rho;
      EXPECT_NEAR(out.enhanced[n][0], xhat[0], 1e-12) << n;
      EXPECT_NEAR(out.spp[n][0], spp[0], 1e-12) << n;
      if (adapt) noise = adapt_noise(noise, z[n], spp, cfg.alpha);
    }
    EXPECT_NEAR(out.report.final_noise.mean[0], noise.mean[0], 1e-12);
  }
}

TEST(EnhanceLogSpectraTest, SoftSubtractionUsesSpp) {
  PhonemeMog mog;
  mog.weights = Eigen::VectorXd::Ones(1);
  mog.means = RowMatrix::Constant(1, 2, 1.0);
  mog.stds = RowMatrix::Constant(1, 2, 1.0);
  mog.labels = {"a"};
  const NoiseModel noise{LogSpectrum::Constant(2, 0.0), LogSpectrum::Constant(2, 1.0)};
  const std::vector<LogSpectrum> z = {Eigen::Vector2d(0.3, 2.0)};
  const EnhancerConfig cfg{.beta = 2.0, .posterior_source = PosteriorSource::kGenerative};
  const SpectralEnhancement out = enhance_log_spectra(z, {}, noise, mog, nullptr, cfg);
  for (int k = 0; k < 2; ++k) {
    EXPECT_NEAR(out.enhanced[0][k], z[0][k] - (1 - out.spp[0][k]) * 2.0, 1e-15);
  }
}

TEST(EnhanceTest, DeterministicAndBoundedSuppression) {
  const Models& m = models();
  const Waveform& clean = m.corpus[3].audio;
  const Waveform noisy = mix_at_snr(clean, white(clean.size(), 1.0, 10), 5.0);
  const EnhancementResult a = enhance_utterance(noisy, m.mog, m.net, {});
  const EnhancementResult b = enhance_utterance(noisy, m.mog, m.net, {});
  EXPECT_EQ(a.audio.samples, b.audio.samples);
  EXPECT_EQ(a.audio.size(), noisy.size());

  const ComplexSpectrogram s = stft(noisy);
  std::vector<LogSpectrum> z;
  for (const auto& f : s.frames) z.push_back(log_magnitude(f));
  const NoiseModel init = init_noise_from_prefix({z.begin() + 3, z.begin() + 28});
  const EnhancerConfig cfg;
  const SpectralEnhancement out =
      enhance_log_spectra(z, utterance_features(s), init, m.mog, &m.net, cfg);
  for (size_t n = 0; n < z.size(); ++n) {
    for (Eigen::Index k = 0; k < z[n].size(); ++k) {
      ASSERT_LE(out.enhanced[n][k], z[n][k]);
      ASSERT_GE(out.enhanced[n][k], z[n][k] - cfg.beta);
    }
  }
}

TEST(EnhanceTest, StationaryNoiseModelStaysNearTruth) {
  const Models& m = models();
  const Waveform noise = white(48000, 0.003, 11);
  const EnhancementResult r = enhance_utterance(noise, m.mog, m.net, {});
  // Per-bin sample moments of the noise log-spectrum.
  const ComplexSpectrogram s = stft(noise);
  const int K = s.num_bins();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(K), sq = Eigen::VectorXd::Zero(K);
  for (const auto& f : s.frames) {
    const LogSpectrum z = log_magnitude(f);
    mean += z;
    sq += z.cwiseAbs2();
  }
  mean /= s.num_frames();
  const Eigen::VectorXd sd = (sq / s.num_frames() - mean.cwiseAbs2()).cwiseSqrt();
  // Edge bins are real-valued and have a different distribution; check the rest.
  for (int k = 1; k < K - 1; ++k) {
    EXPECT_LT(std::abs(r.report.final_noise.mean[k] - mean[k]), 3 * sd[k]) << k;
  }
}

}  // namespace
}  // namespace nnmm
