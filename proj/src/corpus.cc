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

#include "nnmm/corpus.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "nnmm/errors.h"
#include "nnmm/random.h"
#include "nnmm/wav.h"

namespace nnmm {
namespace {

const std::vector<ClassEnvelope>& builtin_envelopes() {
  static const std::vector<ClassEnvelope> table = {
      {"iy", {{270, 60}, {2290, 90}, {3010, 120}}, true},
      {"aa", {{730, 80}, {1090, 90}, {2440, 120}}, true},
      {"s", {{4800, 900}, {6800, 1200}}, false},
      {"uw", {{300, 60}, {870, 80}, {2240, 120}}, true},
      {"sh", {{2500, 500}, {4200, 900}}, false},
      {"eh", {{530, 70}, {1840, 90}, {2480, 120}}, true},
      {"ao", {{570, 70}, {840, 80}, {2410, 120}}, true},
      {"f", {{1800, 2500}, {6000, 3000}}, false},
      {"ae", {{660, 80}, {1720, 90}, {2410, 120}}, true},
      {"er", {{490, 70}, {1350, 90}, {1690, 110}}, true},
      {"ih", {{390, 60}, {1990, 90}, {2550, 120}}, true},
      {"ah", {{520, 70}, {1190, 90}, {2390, 120}}, true},
      {"uh", {{440, 60}, {1020, 80}, {2240, 120}}, true},
  };
  return table;
}

// Two-pole resonator with unity gain at DC (Klatt form).
struct Resonator {
  double a = 1.0, b = 0.0, c = 0.0;
  double y1 = 0.0, y2 = 0.0;

  void tune(const Formant& f, int sample_rate) {
    const double r = std::exp(-std::numbers::pi * f.bandwidth_hz / sample_rate);
    c = -r * r;
    b = 2.0 * r * std::cos(2.0 * std::numbers::pi * f.frequency_hz / sample_rate);
    a = 1.0 - b - c;
  }
  double step(double x) {
    const double y = a * x + b * y1 + c * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

constexpr int kMaxFormants = 4;

// Excitation plus resonator cascade; state persists across segments.
class Voice {
 public:
  Voice(int sample_rate, double f0_hz) : sample_rate_(sample_rate), f0_(f0_hz) {}

  void set_class(const ClassEnvelope& env) {
    voiced_ = env.voiced;
    active_ = static_cast<int>(std::min<size_t>(env.formants.size(), kMaxFormants));
    for (int j = 0; j < active_; ++j) cascade_[j].tune(env.formants[j], sample_rate_);
  }

  double next(Rng& rng) {
    double x;
    if (voiced_) {
      phase_ += f0_ / sample_rate_;
      x = 0.0;
      if (phase_ >= 1.0) {
        phase_ -= 1.0;
        x = 1.0;
      }
      x += 0.1 * rng.normal();
    } else {
      x = 0.3 * rng.normal();
    }
    for (int j = 0; j < active_; ++j) x = cascade_[j].step(x);
    return x;
  }

 private:
  int sample_rate_;
  double f0_;
  double phase_ = 0.0;
  bool voiced_ = true;
  int active_ = 0;
  Resonator cascade_[kMaxFormants];
};

// Output level of a class under a fixed excitation, used to equalize
// loudness across classes.
double class_rms(const ClassEnvelope& env, int sample_rate) {
  Rng rng(12345);
  Voice voice(sample_rate, 150.0);
  voice.set_class(env);
  const int warmup = sample_rate / 20;
  const int n = sample_rate / 5;
  double sq = 0.0;
  for (int i = 0; i < warmup + n; ++i) {
    const double y = voice.next(rng);
    if (i >= warmup) sq += y * y;
  }
  return std::sqrt(sq / n);
}

struct DeckCard {
  int label;
  double seconds;
};

// Segment classes and durations drawn from a shuffled deck. Class counts
// are proportional to the priors and every class gets the same stratified
// spread of durations, so long runs track the priors in frames as well as
// in segments.
class ClassDeck {
 public:
  ClassDeck(const std::vector<double>& priors, double min_seconds,
            double max_seconds, Rng& rng)
      : rng_(rng) {
    const int m = static_cast<int>(priors.size());
    const int deck_size = 20 * m;
    const double total = std::accumulate(priors.begin(), priors.end(), 0.0);
    // Largest-remainder apportionment.
    std::vector<int> counts(m);
    std::vector<std::pair<double, int>> remainders;
    int assigned = 0;
    for (int i = 0; i < m; ++i) {
      const double exact = deck_size * priors[i] / total;
      counts[i] = static_cast<int>(std::floor(exact));
      assigned += counts[i];
      remainders.push_back({exact - counts[i], i});
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& x, const auto& y) { return x.first > y.first; });
    for (int j = 0; assigned < deck_size; ++j, ++assigned) {
      ++counts[remainders[j % m].second];
    }
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < counts[i]; ++j) {
        const double q = (j + 0.5) / counts[i];
        template_.push_back({i, min_seconds + q * (max_seconds - min_seconds)});
      }
    }
  }

  DeckCard draw() {
    if (pos_ == deck_.size()) {
      deck_ = template_;
      rng_.shuffle(deck_);
      pos_ = 0;
    }
    return deck_[pos_++];
  }

 private:
  Rng& rng_;
  std::vector<DeckCard> template_;
  std::vector<DeckCard> deck_;
  size_t pos_ = 0;
};

}  // namespace

void SyntheticCorpusSpec::validate() const {
  if (classes.size() < 2) {
    throw std::invalid_argument("corpus needs at least two classes");
  }
  for (size_t i = 0; i < classes.size(); ++i) {
    if (classes[i].formants.empty()) {
      throw std::invalid_argument("class '" + classes[i].name + "' has no formants");
    }
    for (size_t j = 0; j < i; ++j) {
      if (classes[i].formants == classes[j].formants &&
          classes[i].voiced == classes[j].voiced) {
        throw std::invalid_argument("classes '" + classes[j].name + "' and '" +
                                    classes[i].name + "' share an envelope");
      }
    }
  }
  if (!class_priors.empty()) {
    if (class_priors.size() != classes.size()) {
      throw std::invalid_argument("one prior per class required");
    }
    for (double p : class_priors) {
      if (!(p > 0.0)) throw std::invalid_argument("priors must be positive");
    }
  }
  if (sample_rate <= 0 || num_utterances < 1 || !(min_speech_seconds > 0.0) ||
      max_speech_seconds < min_speech_seconds || !(min_segment_seconds > 0.0) ||
      max_segment_seconds < min_segment_seconds ||
      leading_silence_seconds < 0.0 || trailing_silence_seconds < 0.0) {
    throw std::invalid_argument("invalid corpus durations");
  }
}

SyntheticCorpusSpec SyntheticCorpusSpec::with_classes(int m, uint64_t seed) {
  SyntheticCorpusSpec spec;
  spec.seed = seed;
  const auto& table = builtin_envelopes();
  Rng rng(seed ^ 0x5bd1e995ULL);
  for (int i = 0; i < m; ++i) {
    if (i < static_cast<int>(table.size())) {
      spec.classes.push_back(table[i]);
      continue;
    }
    ClassEnvelope env;
    env.name = "v" + std::to_string(i);
    env.voiced = true;
    env.formants = {{rng.uniform(250, 900), 60},
                    {rng.uniform(900, 2400), 90},
                    {rng.uniform(2400, 3600), 120}};
    spec.classes.push_back(std::move(env));
  }
  return spec;
}

int LabeledUtterance::label_at(long sample) const {
  if (sample < 0) return kNoLabel;
  const auto s = static_cast<size_t>(sample);
  auto it = std::upper_bound(
      segments.begin(), segments.end(), s,
      [](size_t v, const Segment& seg) { return v < seg.begin; });
  if (it == segments.begin()) return kNoLabel;
  --it;
  return s < it->end ? it->label : kNoLabel;
}

std::vector<int> LabeledUtterance::frame_labels(const ComplexSpectrogram& s) const {
  std::vector<int> out(s.num_frames(), kNoLabel);
  for (size_t n = 0; n < s.num_frames(); ++n) {
    const long first = s.frame_start(n);
    const long last = first + s.frame_length - 1;
    if (first < 0) continue;
    auto it = std::upper_bound(
        segments.begin(), segments.end(), static_cast<size_t>(first),
        [](size_t v, const Segment& seg) { return v < seg.begin; });
    if (it == segments.begin()) continue;
    --it;
    if (static_cast<size_t>(last) < it->end) out[n] = it->label;
  }
  return out;
}

std::vector<LabeledUtterance> synthesize_corpus(const SyntheticCorpusSpec& spec) {
  spec.validate();
  const int m = spec.num_classes();
  const int sr = spec.sample_rate;
  std::vector<double> priors = spec.class_priors;
  if (priors.empty()) priors.assign(m, 1.0);

  std::vector<double> class_gain(m);
  for (int i = 0; i < m; ++i) {
    const double target = spec.classes[i].voiced ? 0.1 : 0.04;
    class_gain[i] = target / std::max(class_rms(spec.classes[i], sr), 1e-12);
  }

  Rng rng(spec.seed);
  ClassDeck deck(priors, spec.min_segment_seconds, spec.max_segment_seconds, rng);
  const auto lead = static_cast<size_t>(std::lround(spec.leading_silence_seconds * sr));
  const auto trail = static_cast<size_t>(std::lround(spec.trailing_silence_seconds * sr));
  const auto fade = static_cast<size_t>(sr / 200);  // 5 ms gain ramps

  std::vector<LabeledUtterance> corpus;
  for (int u = 0; u < spec.num_utterances; ++u) {
    LabeledUtterance utt;
    char name[32];
    std::snprintf(name, sizeof(name), "utt%04d", u);
    utt.name = name;

    const double speech_seconds =
        rng.uniform(spec.min_speech_seconds, spec.max_speech_seconds);
    const auto speech_len = static_cast<size_t>(std::lround(speech_seconds * sr));
    size_t pos = lead;
    while (pos < lead + speech_len) {
      const DeckCard card = deck.draw();
      const auto len = static_cast<size_t>(std::lround(card.seconds * sr));
      utt.segments.push_back({pos, pos + len, card.label});
      pos += len;
    }
    const size_t total = pos + trail;

    Voice voice(sr, rng.uniform(100.0, 220.0));
    std::vector<double> gains(utt.segments.size());
    for (double& g : gains) g = rng.uniform(0.6, 1.0);

    utt.audio.sample_rate = sr;
    utt.audio.samples.assign(total, 0.0);
    double previous_gain = 0.0;
    for (size_t j = 0; j < utt.segments.size(); ++j) {
      const Segment& seg = utt.segments[j];
      voice.set_class(spec.classes[seg.label]);
      const double gain = gains[j] * class_gain[seg.label];
      for (size_t t = seg.begin; t < seg.end; ++t) {
        const size_t into = t - seg.begin;
        double g = gain;
        if (into < fade) {
          const double w = static_cast<double>(into) / fade;
          g = (1.0 - w) * previous_gain + w * gain;
        }
        utt.audio.samples[t] = g * voice.next(rng);
      }
      previous_gain = gain;
    }
    // Fade out into the trailing silence.
    const size_t speech_end = utt.segments.back().end;
    for (size_t i = 0; i < fade && i < speech_end; ++i) {
      utt.audio.samples[speech_end - 1 - i] *= static_cast<double>(i) / fade;
    }
    double peak = 0.0;
    for (double s : utt.audio.samples) peak = std::max(peak, std::abs(s));
    if (peak > 0.9) {
      for (double& s : utt.audio.samples) s *= 0.9 / peak;
    }
    corpus.push_back(std::move(utt));
  }
  return corpus;
}

std::string to_string(NoiseType t) {
  switch (t) {
    case NoiseType::kWhite: return "white";
    case NoiseType::kPink: return "pink";
    case NoiseType::kModulated: return "modulated";
    case NoiseType::kSiren: return "siren";
  }
  return "unknown";
}

NoiseType parse_noise_type(const std::string& name) {
  for (NoiseType t : {NoiseType::kWhite, NoiseType::kPink,
                      NoiseType::kModulated, NoiseType::kSiren}) {
    if (to_string(t) == name) return t;
  }
  throw std::invalid_argument("unknown noise type '" + name +
                              "' (expected white, pink, modulated or siren)");
}

Waveform generate_noise(NoiseType type, size_t num_samples, int sample_rate,
                        uint64_t seed) {
  Rng rng(seed);
  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.resize(num_samples);
  const double sr = sample_rate;
  switch (type) {
    case NoiseType::kWhite:
      for (double& s : w.samples) s = rng.normal();
      break;
    case NoiseType::kPink: {
      // Paul Kellet's refined pink filter.
      double b0 = 0, b1 = 0, b2 = 0, b3 = 0, b4 = 0, b5 = 0, b6 = 0;
      for (double& s : w.samples) {
        const double white = rng.normal();
        b0 = 0.99886 * b0 + white * 0.0555179;
        b1 = 0.99332 * b1 + white * 0.0750759;
        b2 = 0.96900 * b2 + white * 0.1538520;
        b3 = 0.86650 * b3 + white * 0.3104856;
        b4 = 0.55000 * b4 + white * 0.5329522;
        b5 = -0.7616 * b5 - white * 0.0168980;
        s = b0 + b1 + b2 + b3 + b4 + b5 + b6 + white * 0.5362;
        b6 = white * 0.115926;
      }
      break;
    }
    case NoiseType::kModulated: {
      // Level holds for the first 0.5 s, then glides between random targets
      // in [-3, +12] dB every 0.4 s.
      const auto hold = static_cast<size_t>(0.5 * sr);
      const auto step = static_cast<size_t>(0.4 * sr);
      double from_db = 0.0;
      double to_db = rng.uniform(-3.0, 12.0);
      for (size_t i = 0; i < num_samples; ++i) {
        double level_db = 0.0;
        if (i >= hold) {
          const size_t into = (i - hold) % step;
          if (into == 0 && i > hold) {
            from_db = to_db;
            to_db = rng.uniform(-3.0, 12.0);
          }
          level_db = from_db + (to_db - from_db) * static_cast<double>(into) / step;
        }
        w.samples[i] = std::pow(10.0, level_db / 20.0) * rng.normal();
      }
      break;
    }
    case NoiseType::kSiren: {
      double phase = 0.0;
      for (size_t i = 0; i < num_samples; ++i) {
        const double t = i / sr;
        const double f = 900.0 + 400.0 * std::sin(2.0 * std::numbers::pi * 0.7 * t);
        phase += 2.0 * std::numbers::pi * f / sr;
        w.samples[i] = std::sqrt(2.0) * std::sin(phase) + 0.3 * rng.normal();
      }
      break;
    }
  }
  if (type == NoiseType::kPink) {
    double sq = 0.0;
    for (double s : w.samples) sq += s * s;
    const double rms = std::sqrt(sq / std::max<size_t>(num_samples, 1));
    if (rms > 0.0) {
      for (double& s : w.samples) s /= rms;
    }
  }
  return w;
}

Waveform mix_at_snr(const Waveform& clean, const Waveform& noise,
                    double snr_db) {
  if (clean.sample_rate != noise.sample_rate) {
    throw DataError("clean and noise sample rates differ");
  }
  if (clean.size() == 0 || noise.size() == 0) {
    throw DataError("cannot mix empty signals");
  }
  double clean_power = 0.0;
  for (double s : clean.samples) clean_power += s * s;
  clean_power /= clean.size();
  std::vector<double> tiled(clean.size());
  for (size_t i = 0; i < tiled.size(); ++i) tiled[i] = noise.samples[i % noise.size()];
  double noise_power = 0.0;
  for (double s : tiled) noise_power += s * s;
  noise_power /= tiled.size();
  if (clean_power <= 0.0) throw DataError("clean signal has zero power");
  if (noise_power <= 0.0) throw DataError("noise signal has zero power");

  const double scale =
      std::sqrt(clean_power / (noise_power * std::pow(10.0, snr_db / 10.0)));
  Waveform out;
  out.sample_rate = clean.sample_rate;
  out.samples.resize(clean.size());
  for (size_t i = 0; i < clean.size(); ++i) {
    out.samples[i] = clean.samples[i] + scale * tiled[i];
  }
  return out;
}

void write_labels(const std::string& path, const std::vector<Segment>& segs) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& s : segs) out << s.begin << ' ' << s.end << ' ' << s.label << '\n';
}

std::vector<Segment> read_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<Segment> segs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    Segment s;
    if (!(fields >> s.begin >> s.end >> s.label) || s.end <= s.begin ||
        s.label < 0 || (!segs.empty() && s.begin < segs.back().end)) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected 'begin end label' with increasing, "
                      "non-overlapping segments");
    }
    segs.push_back(s);
  }
  return segs;
}

void save_corpus(const std::string& dir,
                 const std::vector<LabeledUtterance>& utterances) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (const auto& u : utterances) {
    write_wav((fs::path(dir) / (u.name + ".wav")).string(), u.audio);
    write_labels((fs::path(dir) / (u.name + ".lab")).string(), u.segments);
  }
}

std::vector<LabeledUtterance> load_corpus(const std::string& dir,
                                          int expected_sample_rate) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw DataError(dir + " is not a directory");
  std::vector<fs::path> wavs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".wav") wavs.push_back(entry.path());
  }
  std::sort(wavs.begin(), wavs.end());
  std::vector<LabeledUtterance> out;
  for (const auto& wav : wavs) {
    LabeledUtterance u;
    u.name = wav.stem().string();
    u.audio = read_wav(wav.string(), expected_sample_rate);
    fs::path lab = wav;
    lab.replace_extension(".lab");
    if (fs::exists(lab)) u.segments = read_labels(lab.string());
    out.push_back(std::move(u));
  }
  if (out.empty()) throw DataError("no .wav files in " + dir);
  return out;
}

TrainingFrames extract_training_frames(
    const std::vector<LabeledUtterance>& utterances, int frame_length) {
  TrainingFrames out;
  for (const auto& u : utterances) {
    const ComplexSpectrogram spec = stft(u.audio, {.frame_length = frame_length});
    const std::vector<int> labels = u.frame_labels(spec);
    const std::vector<StackedFeature> features = utterance_features(spec);
    for (size_t n = 0; n < spec.num_frames(); ++n) {
      if (labels[n] == kNoLabel) continue;
      out.log_spectra.push_back({log_magnitude(spec.frames[n]), labels[n]});
      out.features.push_back(features[n]);
      out.labels.push_back(labels[n]);
    }
  }
  return out;
}

}  // namespace nnmm
