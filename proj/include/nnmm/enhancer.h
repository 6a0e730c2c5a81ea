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

#ifndef NNMM_ENHANCER_H_
#define NNMM_ENHANCER_H_

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nnmm/dsp.h"
#include "nnmm/features.h"
#include "nnmm/mixmax.h"
#include "nnmm/mog.h"
#include "nnmm/nn_classifier.h"
#include "nnmm/noise_model.h"

namespace nnmm {

enum class Estimator { kSoftSubtraction, kMixMaxMmse };
enum class PosteriorSource { kNeuralNet, kGenerative };

struct EnhancerConfig {
  int sample_rate = 16000;
  int frame_length = 512;
  // Maximum suppression in natural-log magnitude units (2.5 ~ 21.7 dB).
  double beta = 2.5;
  // Noise smoothing factor.
  double alpha = 0.1;
  // Leading noise-only span used to initialize the noise model.
  double noise_prefix_seconds = 0.25;
  Estimator estimator = Estimator::kSoftSubtraction;
  PosteriorSource posterior_source = PosteriorSource::kNeuralNet;
  // Off reproduces the fixed-noise MixMax behaviour.
  bool adapt_noise = true;

  int hop() const { return frame_length / 4; }
  // Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

std::string to_string(Estimator e);
std::string to_string(PosteriorSource p);
// Throw std::invalid_argument on unknown names.
Estimator parse_estimator(const std::string& name);
PosteriorSource parse_posterior_source(const std::string& name);

// Frames whose analysis window lies entirely inside the first `seconds` of
// the input.
std::vector<size_t> noise_prefix_frames(const ComplexSpectrogram& s,
                                        double seconds);

struct EnhancementReport {
  size_t frames_processed = 0;
  std::vector<double> mean_spp;   // per frame
  std::vector<int> frame_class;   // argmax posterior per frame
  MixMaxDiagnostics fallbacks;
  NoiseModel final_noise;

  double overall_mean_spp() const;
};

// Frame-level output of the enhancement loop, kept for analysis and tests.
struct SpectralEnhancement {
  std::vector<LogSpectrum> enhanced;
  std::vector<Eigen::VectorXd> spp;
  std::vector<Eigen::VectorXd> posteriors;
  EnhancementReport report;
};

// The per-frame loop on log-spectra: posterior (classifier or generative),
// per-bin SPP, estimate, then noise update. `features` may be empty when
// the posterior source is generative; `net` may then be null.
SpectralEnhancement enhance_log_spectra(
    const std::vector<LogSpectrum>& z,
    const std::vector<StackedFeature>& features, NoiseModel noise,
    const PhonemeMog& mog, const NnClassifier* net,
    const EnhancerConfig& config);

struct EnhancementResult {
  Waveform audio;  // same length as the input
  EnhancementReport report;
};

// Whole-utterance enhancement with the configured posterior source and
// estimator. Throws DataError if the input does not exceed the noise prefix
// plus one frame.
EnhancementResult enhance(const Waveform& noisy, const PhonemeMog& mog,
                          const NnClassifier* net,
                          const EnhancerConfig& config);

// Hybrid enhancer: classifier posteriors, SPP-driven estimate, adaptive
// noise (posterior source and estimator from config).
EnhancementResult enhance_utterance(const Waveform& noisy,
                                    const PhonemeMog& mog,
                                    const NnClassifier& net,
                                    const EnhancerConfig& config);

// Fixed-noise MixMax: generative posteriors, exact MMSE estimate, noise
// model frozen after prefix initialization.
EnhancementResult enhance_mixmax_original(const Waveform& noisy,
                                          const PhonemeMog& mog,
                                          const EnhancerConfig& config);

}  // namespace nnmm

#endif  // NNMM_ENHANCER_H_
