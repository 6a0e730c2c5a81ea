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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "nnmm/bundle.h"
#include "nnmm/config.h"
#include "nnmm/corpus.h"
#include "nnmm/errors.h"
#include "nnmm/evaluation.h"
#include "nnmm/metrics.h"
#include "nnmm/random.h"
#include "nnmm/wav.h"

namespace nnmm {
namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("nnmm_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

double power(const std::vector<double>& v) {
  double acc = 0.0;
  for (double s : v) acc += s * s;
  return acc / static_cast<double>(v.size());
}

Waveform white(size_t n, double sd, uint64_t seed) {
  Rng rng(seed);
  Waveform w;
  w.samples.resize(n);
  for (double& s : w.samples) s = rng.normal(0.0, sd);
  return w;
}

// --- corpus ---------------------------------------------------------------

TEST(CorpusTest, SameSeedIsBitIdentical) {
  SyntheticCorpusSpec spec = SyntheticCorpusSpec::with_classes(4, 3);
  spec.num_utterances = 3;
  const auto a = synthesize_corpus(spec);
  const auto b = synthesize_corpus(spec);
  ASSERT_EQ(a.size(), 3u);
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].name, b[i].name);
    EXPECT_EQ(a[i].audio.samples, b[i].audio.samples);
    EXPECT_EQ(a[i].segments, b[i].segments);
  }
  spec.seed = 4;
  EXPECT_NE(synthesize_corpus(spec)[0].audio.samples, a[0].audio.samples);
}

TEST(CorpusTest, SegmentsAreOrderedAndLabelsMatch) {
  SyntheticCorpusSpec spec = SyntheticCorpusSpec::with_classes(5, 1);
  spec.num_utterances = 2;
  for (const auto& u : synthesize_corpus(spec)) {
    ASSERT_FALSE(u.segments.empty());
    EXPECT_GE(u.segments.front().begin, 0.3 * 16000 - 1);
    for (size_t j = 0; j < u.segments.size(); ++j) {
      const Segment& s = u.segments[j];
      EXPECT_LT(s.begin, s.end);
      if (j > 0) EXPECT_GE(s.begin, u.segments[j - 1].end);
      EXPECT_EQ(u.label_at(static_cast<long>((s.begin + s.end) / 2)), s.label);
    }
    const ComplexSpectrogram spec_frames = stft(u.audio);
    const std::vector<int> labels = u.frame_labels(spec_frames);
    for (size_t n = 0; n < labels.size(); ++n) {
      const long first = spec_frames.frame_start(n);
      const long last = first + 511;
      const bool pure = first >= 0 && u.label_at(first) != kNoLabel &&
                        u.label_at(first) == u.label_at(last) &&
                        [&] {
                          for (long t = first; t <= last; t += 32) {
                            if (u.label_at(t) != u.label_at(first)) return false;
                          }
                          return true;
                        }();
      if (labels[n] != kNoLabel) EXPECT_TRUE(pure) << n;
    }
    EXPECT_EQ(u.label_at(0), kNoLabel);
    // Leading silence is exactly zero.
    for (size_t i = 0; i < u.segments.front().begin; ++i) {
      ASSERT_EQ(u.audio.samples[i], 0.0);
    }
  }
}

TEST(CorpusTest, TwoClassEnvelopesAreWidelySeparated) {
  // A back vowel against a sibilant fricative.
  SyntheticCorpusSpec spec = SyntheticCorpusSpec::with_classes(3, 7);
  spec.classes.erase(spec.classes.begin());
  ASSERT_EQ(spec.classes[0].name, "aa");
  ASSERT_EQ(spec.classes[1].name, "s");
  spec.num_utterances = 8;
  const TrainingFrames frames = extract_training_frames(synthesize_corpus(spec), 512);
  const PhonemeMog mog = train_supervised(frames.log_spectra, 2);
  // Bins nearest each class's first two formants.
  for (const auto& env : spec.classes) {
    for (size_t f = 0; f < 2; ++f) {
      const int k = static_cast<int>(std::lround(env.formants[f].frequency_hz * 512 / 16000.0));
      const double gap = std::abs(mog.means(0, k) - mog.means(1, k));
      const double sd = std::max(mog.stds(0, k), mog.stds(1, k));
      EXPECT_GT(gap, 5.0 * sd) << env.name << " formant " << f << " bin " << k;
    }
  }
}

TEST(CorpusTest, FrameHistogramFollowsPriors) {
  SyntheticCorpusSpec spec = SyntheticCorpusSpec::with_classes(3, 11);
  spec.class_priors = {0.5, 0.3, 0.2};
  spec.num_utterances = 60;
  std::vector<double> count(3, 0.0);
  double total = 0.0;
  for (const auto& u : synthesize_corpus(spec)) {
    const ComplexSpectrogram s = stft(u.audio);
    for (int label : u.frame_labels(s)) {
      if (label == kNoLabel) continue;
      count[label] += 1;
      total += 1;
    }
  }
  ASSERT_GE(total, 10000);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(count[i] / total, spec.class_priors[i], 0.02) << i;
  }
}

TEST(CorpusTest, SpecValidation) {
  SyntheticCorpusSpec spec = SyntheticCorpusSpec::with_classes(2, 1);
  EXPECT_NO_THROW(spec.validate());
  spec.classes[1] = spec.classes[0];
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  EXPECT_THROW(SyntheticCorpusSpec::with_classes(1, 1).validate(), std::invalid_argument);
  // Beyond the built-in table the classes are still distinct.
  EXPECT_NO_THROW(SyntheticCorpusSpec::with_classes(39, 2).validate());
}

TEST(NoiseTest, TypesAreDeterministicAndNamed) {
  for (NoiseType t : {NoiseType::kWhite, NoiseType::kPink, NoiseType::kModulated,
                      NoiseType::kSiren}) {
    const Waveform a = generate_noise(t, 16000, 16000, 3);
    const Waveform b = generate_noise(t, 16000, 16000, 3);
    EXPECT_EQ(a.samples, b.samples);
    EXPECT_GT(power(a.samples), 0.0);
    EXPECT_EQ(parse_noise_type(to_string(t)), t);
  }
  EXPECT_THROW(parse_noise_type("brown"), std::invalid_argument);
}

TEST(MixTest, ZeroDbEqualPowers) {
  const Waveform clean = white(8000, 0.3, 1);
  const Waveform noise = white(8000, 2.0, 2);
  const Waveform mix = mix_at_snr(clean, noise, 0.0);
  std::vector<double> added(8000);
  for (size_t i = 0; i < 8000; ++i) added[i] = mix.samples[i] - clean.samples[i];
  EXPECT_NEAR(power(added) / power(clean.samples), 1.0, 1e-9);
}

TEST(MixTest, MeasuredSnrMatchesRequest) {
  const Waveform clean = white(10000, 0.1, 3);
  const Waveform noise = white(3000, 1.0, 4);  // tiled
  for (double snr : {-5.0, 0.0, 5.0, 10.0, 15.0}) {
    const Waveform mix = mix_at_snr(clean, noise, snr);
    ASSERT_EQ(mix.size(), clean.size());
    std::vector<double> added(clean.size());
    for (size_t i = 0; i < clean.size(); ++i) added[i] = mix.samples[i] - clean.samples[i];
    EXPECT_NEAR(10 * std::log10(power(clean.samples) / power(added)), snr, 1e-6);
    // Tiling repeats the noise period.
    EXPECT_NEAR(added[3000 + 17], added[17], 1e-12);
  }
}

TEST(MixTest, HighSnrIsClean) {
  const Waveform clean = white(8000, 0.3, 5);
  const Waveform mix = mix_at_snr(clean, white(8000, 1.0, 6), 60.0);
  std::vector<double> diff(8000);
  for (size_t i = 0; i < 8000; ++i) diff[i] = mix.samples[i] - clean.samples[i];
  EXPECT_LE(std::sqrt(power(diff) / power(clean.samples)), 1e-3 * (1 + 1e-9));
}

TEST(MixTest, Errors) {
  const Waveform clean = white(100, 1.0, 1);
  Waveform silent;
  silent.samples.assign(100, 0.0);
  EXPECT_THROW(mix_at_snr(clean, silent, 0.0), DataError);
  EXPECT_THROW(mix_at_snr(silent, clean, 0.0), DataError);
  Waveform other = clean;
  other.sample_rate = 8000;
  EXPECT_THROW(mix_at_snr(clean, other, 0.0), DataError);
}

// --- metrics --------------------------------------------------------------

// Direct recomputation: 512-sample frames, silence threshold 50 dB below
// the loudest frame, per-frame clamp to [-10, 35].
double oracle_segsnr(const Waveform& c, const Waveform& e) {
  const size_t n = 512;
  std::vector<double> energy, residual;
  for (size_t s = 0; s + n <= c.size(); s += n) {
    double ec = 0, er = 0;
    for (size_t i = s; i < s + n; ++i) {
      ec += c.samples[i] * c.samples[i];
      er += (c.samples[i] - e.samples[i]) * (c.samples[i] - e.samples[i]);
    }
    energy.push_back(ec);
    residual.push_back(er);
  }
  const double loudest = *std::max_element(energy.begin(), energy.end());
  double acc = 0;
  int count = 0;
  for (size_t f = 0; f < energy.size(); ++f) {
    if (energy[f] < loudest * 1e-5) continue;
    const double snr = residual[f] == 0 ? 35.0 : 10 * std::log10(energy[f] / residual[f]);
    acc += std::clamp(snr, -10.0, 35.0);
    ++count;
  }
  return acc / count;
}

Waveform speechy(size_t n, uint64_t seed) {
  // Bursts separated by digital silence.
  Waveform w = white(n, 0.2, seed);
  for (size_t i = 0; i < n; ++i) {
    if ((i / 2048) % 3 == 2) w.samples[i] = 0.0;
  }
  return w;
}

TEST(SegmentalSnrTest, IdentityHitsCeiling) {
  const Waveform c = speechy(16000, 1);
  EXPECT_DOUBLE_EQ(segmental_snr(c, c), 35.0);
}

TEST(SegmentalSnrTest, SmallDistortionMatchesOracle) {
  const Waveform c = speechy(16000, 2);
  Waveform e = c;
  const Waveform tiny = white(16000, 0.2 * 0.01, 3);  // about -40 dB
  for (size_t i = 0; i < e.size(); ++i) e.samples[i] += tiny.samples[i];
  const double got = segmental_snr(c, e);
  EXPECT_NEAR(got, oracle_segsnr(c, e), 1e-9);
  EXPECT_GT(got, 34.0);
}

TEST(SegmentalSnrTest, ZeroOutputAndNegativeFloor) {
  const Waveform c = speechy(16000, 4);
  Waveform zero = c;
  std::fill(zero.samples.begin(), zero.samples.end(), 0.0);
  EXPECT_NEAR(segmental_snr(c, zero), 0.0, 1e-12);
  EXPECT_NEAR(segmental_snr(c, zero), oracle_segsnr(c, zero), 1e-12);
  Waveform loud = c;
  for (double& s : loud.samples) s *= -20.0;
  EXPECT_NEAR(segmental_snr(c, loud), oracle_segsnr(c, loud), 1e-9);
  EXPECT_NEAR(segmental_snr(c, loud), -10.0, 1e-12);
}

TEST(SegmentalSnrTest, Errors) {
  const Waveform c = speechy(16000, 5);
  EXPECT_THROW(segmental_snr(c, white(100, 1.0, 1)), DataError);
  Waveform silent = c;
  std::fill(silent.samples.begin(), silent.samples.end(), 0.0);
  EXPECT_THROW(segmental_snr(silent, c), DataError);
}

TEST(LogSpectralDistanceTest, IdentityAndScale) {
  const Waveform c = speechy(16000, 6);
  EXPECT_DOUBLE_EQ(log_spectral_distance(c, c), 0.0);
  Waveform twice = c;
  for (double& s : twice.samples) s *= 2.0;
  EXPECT_NEAR(log_spectral_distance(c, twice), 20 * std::log10(2.0), 1e-9);
}

TEST(LogSpectralDistanceTest, MatchesNaiveRecomputation) {
  const Waveform c = speechy(16000, 7);
  const Waveform e = white(16000, 0.2, 8);
  const ComplexSpectrogram sc = stft(c), se = stft(e);
  double loudest = 0;
  for (const auto& f : sc.frames) loudest = std::max(loudest, f.squaredNorm());
  double acc = 0;
  long count = 0;
  for (size_t n = 0; n < sc.num_frames(); ++n) {
    if (sc.frames[n].squaredNorm() < loudest * 1e-5) continue;
    for (int k = 0; k < sc.num_bins(); ++k) {
      const double a = std::log(std::max(std::abs(sc.frames[n][k]), 1e-10));
      const double b = std::log(std::max(std::abs(se.frames[n][k]), 1e-10));
      const double d = 20.0 / std::log(10.0) * (a - b);
      acc += d * d;
      ++count;
    }
  }
  EXPECT_NEAR(log_spectral_distance(c, e), std::sqrt(acc / count), 1e-9);
}

// --- wav --------------------------------------------------------------------

TEST(WavTest, RoundTripIsExactOnPcmGrid) {
  const fs::path dir = temp_dir("wav");
  Waveform w;
  w.sample_rate = 16000;
  for (int i = -5; i < 5; ++i) w.samples.push_back(i * 1000 / 32768.0);
  w.samples.push_back(-1.0);
  write_wav((dir / "a.wav").string(), w);
  const Waveform r = read_wav((dir / "a.wav").string());
  EXPECT_EQ(r.sample_rate, 16000);
  EXPECT_EQ(r.samples, w.samples);
  EXPECT_THROW(read_wav((dir / "a.wav").string(), 8000), DataError);
  EXPECT_THROW(read_wav((dir / "missing.wav").string()), DataError);
}

TEST(WavTest, ClipsOutOfRange) {
  const fs::path dir = temp_dir("wavclip");
  Waveform w;
  w.samples = {2.0, -2.0};
  write_wav((dir / "c.wav").string(), w);
  const Waveform r = read_wav((dir / "c.wav").string());
  EXPECT_DOUBLE_EQ(r.samples[0], 32767.0 / 32768.0);
  EXPECT_DOUBLE_EQ(r.samples[1], -1.0);
}

TEST(LabelsTest, CorpusDirectoryRoundTrip) {
  const fs::path dir = temp_dir("corpus");
  SyntheticCorpusSpec spec = SyntheticCorpusSpec::with_classes(3, 2);
  spec.num_utterances = 2;
  const auto corpus = synthesize_corpus(spec);
  save_corpus(dir.string(), corpus);
  const auto loaded = load_corpus(dir.string(), 16000);
  ASSERT_EQ(loaded.size(), 2u);
  for (size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(loaded[i].name, corpus[i].name);
    EXPECT_EQ(loaded[i].segments, corpus[i].segments);
    ASSERT_EQ(loaded[i].audio.size(), corpus[i].audio.size());
    for (size_t j = 0; j < loaded[i].audio.size(); ++j) {
      ASSERT_NEAR(loaded[i].audio.samples[j], corpus[i].audio.samples[j], 1.0 / 32768);
    }
  }
}

// --- bundle -----------------------------------------------------------------

ModelBundle sample_bundle() {
  Rng rng(3);
  ModelBundle b;
  b.frame_length = 64;
  b.config_hash = config_hash("beta = 2.5\n");
  PhonemeMog mog;
  mog.weights = Eigen::Vector2d(0.25, 0.75);
  mog.means = RowMatrix(2, 33);
  mog.stds = RowMatrix(2, 33);
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < 33; ++k) {
      mog.means(i, k) = rng.normal();
      mog.stds(i, k) = 0.1 + rng.uniform();
    }
  }
  mog.labels = {"iy", "aa"};
  b.mog = mog;
  b.net = NnClassifier::random(kStackedDim, 5, 2, 9);
  b.noise = NoiseModel{LogSpectrum::Constant(33, -3.0), LogSpectrum::Constant(33, 0.5)};
  return b;
}

TEST(BundleTest, RoundTripIsBitExact) {
  const fs::path dir = temp_dir("bundle");
  const ModelBundle b = sample_bundle();
  save_bundle(b, (dir / "m.nnmm").string());
  const ModelBundle r = load_bundle((dir / "m.nnmm").string());
  EXPECT_EQ(r, b);
  EXPECT_EQ(serialize_bundle(r), serialize_bundle(b));

  ModelBundle partial;
  partial.frame_length = 64;
  partial.mog = b.mog;
  EXPECT_EQ(deserialize_bundle(serialize_bundle(partial)), partial);
}

TEST(BundleTest, HeaderLayout) {
  const std::vector<uint8_t> bytes = serialize_bundle(sample_bundle());
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "NNMM");
  EXPECT_EQ(bytes[4], kBundleVersion);
  EXPECT_EQ(bytes[5] | bytes[6] | bytes[7], 0);
  EXPECT_EQ(bytes[8] | (bytes[9] << 8), 16000);
}

std::string error_of(const std::vector<uint8_t>& bytes) {
  try {
    deserialize_bundle(bytes);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

TEST(BundleTest, DescriptiveErrors) {
  std::vector<uint8_t> bytes = serialize_bundle(sample_bundle());
  for (size_t cut : {size_t{2}, size_t{10}, bytes.size() / 2, bytes.size() - 1}) {
    const std::vector<uint8_t> truncated(bytes.begin(), bytes.begin() + cut);
    const std::string msg = error_of(truncated);
    if (cut >= 4) EXPECT_EQ(msg, "unexpected end of model file") << cut;
    else EXPECT_FALSE(msg.empty());
  }
  std::vector<uint8_t> bumped = bytes;
  bumped[4] = kBundleVersion + 1;
  const std::string msg = error_of(bumped);
  EXPECT_NE(msg.find("supported versions: 1"), std::string::npos) << msg;
  std::vector<uint8_t> bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_NE(error_of(bad_magic).find("magic"), std::string::npos);

  ModelBundle mismatch = sample_bundle();
  mismatch.net = NnClassifier::random(kStackedDim, 5, 3, 1);
  EXPECT_THROW(serialize_bundle(mismatch), DataError);
}

TEST(BundleTest, ConfigHashIsFnv1a) {
  EXPECT_EQ(config_hash(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(config_hash("a"), 0xaf63dc4c8601ec8cULL);
}

// --- config -----------------------------------------------------------------

TEST(ConfigTest, ParseFormatRoundTrip) {
  const EnhancerConfig c = parse_config(
      "# comment\n"
      "beta = 1.5\n"
      "alpha=0.2   # trailing\n"
      "\n"
      "estimator = mixmax-mmse\n"
      "posterior = generative\n"
      "adapt_noise = false\n"
      "frame_length = 256\n"
      "noise_prefix = 0.3\n");
  EXPECT_EQ(c.beta, 1.5);
  EXPECT_EQ(c.alpha, 0.2);
  EXPECT_EQ(c.frame_length, 256);
  EXPECT_EQ(c.noise_prefix_seconds, 0.3);
  EXPECT_EQ(c.estimator, Estimator::kMixMaxMmse);
  EXPECT_EQ(c.posterior_source, PosteriorSource::kGenerative);
  EXPECT_FALSE(c.adapt_noise);
  const EnhancerConfig again = parse_config(format_config(c));
  EXPECT_EQ(format_config(again), format_config(c));
  EXPECT_EQ(again.alpha, c.alpha);
}

TEST(ConfigTest, Errors) {
  EXPECT_THROW(parse_config("gamma = 1\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("beta = fast\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("beta\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("alpha = 2\n"), std::invalid_argument);
}

// --- evaluation -------------------------------------------------------------

TEST(EvaluationTest, RowsInInputOrderIndependentOfThreads) {
  SyntheticCorpusSpec spec = SyntheticCorpusSpec::with_classes(3, 4);
  spec.num_utterances = 3;
  const auto corpus = synthesize_corpus(spec);
  const TrainingFrames frames = extract_training_frames(corpus, 512);
  const PhonemeMog mog = train_supervised(frames.log_spectra, 3);
  const EnhancerConfig cfg{.posterior_source = PosteriorSource::kGenerative};
  EvaluationOptions opts{.noise_types = {NoiseType::kWhite, NoiseType::kPink},
                         .snrs_db = {0.0, 10.0}, .seed = 2, .threads = 1};
  const auto serial = evaluate(corpus, mog, nullptr, cfg, opts);
  opts.threads = 3;
  const auto parallel = evaluate(corpus, mog, nullptr, cfg, opts);
  ASSERT_EQ(serial.size(), 12u);
  std::ostringstream a, b;
  write_csv(a, serial);
  write_csv(b, parallel);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(serial[0].utterance, corpus[0].name);
  EXPECT_EQ(serial[1].snr_db, 10.0);
  EXPECT_EQ(serial[2].noise, NoiseType::kPink);
  for (const auto& r : serial) {
    ASSERT_TRUE(r.accuracy.has_value());
    EXPECT_GE(*r.accuracy, 0.0);
    EXPECT_LE(*r.accuracy, 1.0);
  }
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')),
            "utterance,noise,snr_db,segsnr_in,segsnr_out,lsd,mean_spp,accuracy");
}

}  // namespace
}  // namespace nnmm
