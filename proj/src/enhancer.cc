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
#include <numeric>
#include <stdexcept>
#include <string>

#include "nnmm/errors.h"

namespace nnmm {

void EnhancerConfig::validate() const {
  if (sample_rate <= 0) throw std::invalid_argument("sample_rate must be > 0");
  if (frame_length < 8 || frame_length % 4 != 0) {
    throw std::invalid_argument("frame_length must be a multiple of 4, >= 8");
  }
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1)");
  }
  if (!(noise_prefix_seconds * sample_rate >= frame_length + hop())) {
    throw std::invalid_argument(
        "noise_prefix must span at least two analysis frames");
  }
}

std::string to_string(Estimator e) {
  return e == Estimator::kSoftSubtraction ? "soft-subtraction" : "mixmax-mmse";
}

std::string to_string(PosteriorSource p) {
  return p == PosteriorSource::kNeuralNet ? "nn" : "generative";
}

Estimator parse_estimator(const std::string& name) {
  if (name == "soft-subtraction") return Estimator::kSoftSubtraction;
  if (name == "mixmax-mmse") return Estimator::kMixMaxMmse;
  throw std::invalid_argument("unknown estimator '" + name +
                              "' (expected soft-subtraction or mixmax-mmse)");
}

PosteriorSource parse_posterior_source(const std::string& name) {
  if (name == "nn") return PosteriorSource::kNeuralNet;
  if (name == "generative") return PosteriorSource::kGenerative;
  throw std::invalid_argument("unknown posterior source '" + name +
                              "' (expected nn or generative)");
}

std::vector<size_t> noise_prefix_frames(const ComplexSpectrogram& s,
                                        double seconds) {
  const long limit = std::lround(seconds * s.sample_rate);
  std::vector<size_t> out;
  for (size_t n = 0; n < s.num_frames(); ++n) {
    const long start = s.frame_start(n);
    if (start < 0) continue;
    if (start + s.frame_length > limit) break;
    out.push_back(n);
  }
  return out;
}

double EnhancementReport::overall_mean_spp() const {
  if (mean_spp.empty()) return 0.0;
  return std::accumulate(mean_spp.begin(), mean_spp.end(), 0.0) /
         static_cast<double>(mean_spp.size());
}

SpectralEnhancement enhance_log_spectra(
    const std::vector<LogSpectrum>& z,
    const std::vector<StackedFeature>& features, NoiseModel noise,
    const PhonemeMog& mog, const NnClassifier* net,
    const EnhancerConfig& config) {
  const bool use_net = config.posterior_source == PosteriorSource::kNeuralNet;
  const bool mmse = config.estimator == Estimator::kMixMaxMmse;
  if (use_net && (net == nullptr || features.size() != z.size())) {
    throw std::invalid_argument(
        "classifier posteriors need a network and one feature per frame");
  }

  SpectralEnhancement out;
  out.enhanced.reserve(z.size());
  out.spp.reserve(z.size());
  out.posteriors.reserve(z.size());
  EnhancementReport& report = out.report;
  for (size_t n = 0; n < z.size(); ++n) {
    const FrameEvaluation eval = evaluate_frame(z[n], mog, noise, mmse);
    report.fallbacks += eval.diagnostics;

    Eigen::VectorXd posterior;
    if (use_net) {
      posterior = forward(*net, features[n]);
    } else {
      PosteriorResult p = generative_posterior(mog, eval);
      report.fallbacks.posterior_fallbacks += p.fallback;
      posterior = std::move(p.p);
    }
    Eigen::VectorXd spp = hybrid_spp(posterior, eval);
    LogSpectrum xhat = mmse ? mmse_estimate(z[n], posterior, eval).xhat
                            : soft_subtract(z[n], spp, config.beta);
    if (config.adapt_noise) noise = adapt_noise(noise, z[n], spp, config.alpha);

    report.mean_spp.push_back(spp.mean());
    report.frame_class.push_back(argmax(posterior));
    out.enhanced.push_back(std::move(xhat));
    out.spp.push_back(std::move(spp));
    out.posteriors.push_back(std::move(posterior));
  }
  report.frames_processed = z.size();
  report.final_noise = std::move(noise);
  return out;
}

EnhancementResult enhance(const Waveform& noisy, const PhonemeMog& mog,
                          const NnClassifier* net,
                          const EnhancerConfig& config) {
  config.validate();
  noisy.validate();
  mog.validate();
  if (noisy.sample_rate != config.sample_rate) {
    throw DataError("input is " + std::to_string(noisy.sample_rate) +
                    " Hz but the models expect " +
                    std::to_string(config.sample_rate) + " Hz");
  }
  const int bins = config.frame_length / 2 + 1;
  if (mog.num_bins() != bins) {
    throw DataError("speech model has " + std::to_string(mog.num_bins()) +
                    " bins; frame length " +
                    std::to_string(config.frame_length) + " needs " +
                    std::to_string(bins));
  }
  const bool use_net = config.posterior_source == PosteriorSource::kNeuralNet;
  if (use_net) {
    if (net == nullptr) throw DataError("no classifier for nn posteriors");
    net->validate();
    if (net->input_dim() != kStackedDim ||
        net->num_classes() != mog.num_components()) {
      throw DataError("classifier shape does not match the speech model");
    }
  }
  const long prefix_samples =
      std::lround(config.noise_prefix_seconds * config.sample_rate);
  if (static_cast<long>(noisy.size()) <= prefix_samples + config.frame_length) {
    throw DataError("utterance too short for the noise-only prefix");
  }

  ComplexSpectrogram spec = stft(noisy, {.frame_length = config.frame_length});
  std::vector<LogSpectrum> z;
  z.reserve(spec.num_frames());
  for (const auto& f : spec.frames) z.push_back(log_magnitude(f));

  std::vector<LogSpectrum> prefix;
  for (size_t n : noise_prefix_frames(spec, config.noise_prefix_seconds)) {
    prefix.push_back(z[n]);
  }
  NoiseModel noise = init_noise_from_prefix(prefix);

  std::vector<StackedFeature> features;
  if (use_net) features = utterance_features(spec);

  SpectralEnhancement se =
      enhance_log_spectra(z, features, std::move(noise), mog, net, config);
  for (size_t n = 0; n < spec.num_frames(); ++n) {
    spec.frames[n] = reconstruct_frame(se.enhanced[n], spec.frames[n]);
  }
  return {istft_signal(spec), std::move(se.report)};
}

EnhancementResult enhance_utterance(const Waveform& noisy,
                                    const PhonemeMog& mog,
                                    const NnClassifier& net,
                                    const EnhancerConfig& config) {
  return enhance(noisy, mog, &net, config);
}

EnhancementResult enhance_mixmax_original(const Waveform& noisy,
                                          const PhonemeMog& mog,
                                          const EnhancerConfig& config) {
  EnhancerConfig fixed = config;
  fixed.posterior_source = PosteriorSource::kGenerative;
  fixed.estimator = Estimator::kMixMaxMmse;
  fixed.adapt_noise = false;
  return enhance(noisy, mog, nullptr, fixed);
}

}  // namespace nnmm
