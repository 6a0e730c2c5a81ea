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

#ifndef NNMM_CORPUS_H_
#define NNMM_CORPUS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "nnmm/dsp.h"
#include "nnmm/features.h"
#include "nnmm/mog.h"

namespace nnmm {

// Label of samples and frames outside any phoneme segment.
inline constexpr int kNoLabel = -1;

struct Formant {
  double frequency_hz = 0.0;
  double bandwidth_hz = 0.0;
  bool operator==(const Formant&) const = default;
};

// Spectral envelope of one synthetic phoneme class: a cascade of resonators
// driven by a glottal pulse train (voiced) or white noise (unvoiced).
struct ClassEnvelope {
  std::string name;
  std::vector<Formant> formants;
  bool voiced = true;

  bool operator==(const ClassEnvelope&) const = default;
};

struct SyntheticCorpusSpec {
  std::vector<ClassEnvelope> classes;
  // Relative class frequencies; empty means uniform.
  std::vector<double> class_priors;
  int sample_rate = 16000;
  int num_utterances = 20;
  // Length of the voiced part of each utterance, uniform in [min, max].
  double min_speech_seconds = 1.5;
  double max_speech_seconds = 2.5;
  double leading_silence_seconds = 0.3;
  double trailing_silence_seconds = 0.1;
  double min_segment_seconds = 0.06;
  double max_segment_seconds = 0.16;
  uint64_t seed = 1;

  int num_classes() const { return static_cast<int>(classes.size()); }
  // Throws std::invalid_argument: fewer than two classes, duplicate
  // envelopes, bad priors or durations.
  void validate() const;

  // Vowel- and fricative-like envelopes; beyond the built-in table, extra
  // classes get seeded random formants.
  static SyntheticCorpusSpec with_classes(int m, uint64_t seed);
};

struct Segment {
  size_t begin = 0;  // first sample
  size_t end = 0;    // one past the last sample
  int label = kNoLabel;

  bool operator==(const Segment&) const = default;
};

struct LabeledUtterance {
  std::string name;
  Waveform audio;
  std::vector<Segment> segments;

  // Class active at the sample, kNoLabel in silence.
  int label_at(long sample) const;
  // Class of each frame whose analysis window lies inside a single segment;
  // frames touching silence or a class boundary get kNoLabel.
  std::vector<int> frame_labels(const ComplexSpectrogram& s) const;
};

// Deterministic given spec.seed.
std::vector<LabeledUtterance> synthesize_corpus(const SyntheticCorpusSpec& spec);

enum class NoiseType { kWhite, kPink, kModulated, kSiren };

std::string to_string(NoiseType t);
// Throws std::invalid_argument on unknown names.
NoiseType parse_noise_type(const std::string& name);

// Unit-variance-ish noise of the requested kind. kModulated is white noise
// under a slowly varying gain; kSiren a swept tone over a white floor.
Waveform generate_noise(NoiseType type, size_t num_samples, int sample_rate,
                        uint64_t seed);

// clean + noise scaled so that the full-utterance power ratio equals snr_db.
// Shorter noise is tiled. Throws DataError on zero power or rate mismatch.
Waveform mix_at_snr(const Waveform& clean, const Waveform& noise,
                    double snr_db);

// Label files: one "begin end label" line per segment, in samples.
void write_labels(const std::string& path, const std::vector<Segment>& segs);
std::vector<Segment> read_labels(const std::string& path);

// A corpus directory holds NAME.wav with a matching NAME.lab per utterance.
void save_corpus(const std::string& dir,
                 const std::vector<LabeledUtterance>& utterances);
std::vector<LabeledUtterance> load_corpus(const std::string& dir,
                                          int expected_sample_rate);

// Labeled frames for model training; frames without a label (silence or a
// class transition inside the window) are dropped.
struct TrainingFrames {
  std::vector<LabeledFrame> log_spectra;
  std::vector<StackedFeature> features;
  std::vector<int> labels;
};
TrainingFrames extract_training_frames(
    const std::vector<LabeledUtterance>& utterances, int frame_length);

}  // namespace nnmm

#endif  // NNMM_CORPUS_H_
