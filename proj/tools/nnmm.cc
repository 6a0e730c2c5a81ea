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

// Command-line front end: corpus synthesis, training, enhancement,
// classification and batch evaluation.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nnmm/bundle.h"
#include "nnmm/config.h"
#include "nnmm/corpus.h"
#include "nnmm/enhancer.h"
#include "nnmm/errors.h"
#include "nnmm/evaluation.h"
#include "nnmm/metrics.h"
#include "nnmm/wav.h"

namespace nnmm {
namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

// Flags shared by every subcommand that runs the enhancer.
struct CommonFlags {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<double> beta;
  std::optional<double> alpha;
  std::optional<int> frame_length;
  std::optional<std::string> estimator;
  std::optional<std::string> posterior;
  std::optional<double> noise_prefix;
  bool fixed_noise = false;

  void add_to(CLI::App* app) {
    app->add_option("--config", config_path, "key = value configuration file")
        ->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "random seed");
    app->add_option("--beta", beta, "maximum suppression in natural-log units");
    app->add_option("--alpha", alpha, "noise smoothing factor in (0, 1)");
    app->add_option("--frame-length", frame_length, "STFT frame length in samples");
    app->add_option("--estimator", estimator, "soft-subtraction or mixmax-mmse");
    app->add_option("--posterior", posterior, "nn or generative");
    app->add_option("--noise-prefix", noise_prefix, "noise-only lead-in in seconds");
    app->add_flag("--fixed-noise", fixed_noise, "freeze the noise model after the prefix");
  }

  // Defaults, then the config file, then explicit flags.
  EnhancerConfig resolve() const {
    EnhancerConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path, cfg);
    if (beta) cfg.beta = *beta;
    if (alpha) cfg.alpha = *alpha;
    if (frame_length) cfg.frame_length = *frame_length;
    if (estimator) cfg.estimator = parse_estimator(*estimator);
    if (posterior) cfg.posterior_source = parse_posterior_source(*posterior);
    if (noise_prefix) cfg.noise_prefix_seconds = *noise_prefix;
    if (fixed_noise) cfg.adapt_noise = false;
    cfg.validate();
    return cfg;
  }
};

// The bundle fixes the front end; a conflicting explicit flag is an error.
EnhancerConfig config_for_bundle(const CommonFlags& flags, const ModelBundle& bundle) {
  EnhancerConfig cfg = flags.resolve();
  if (flags.frame_length && *flags.frame_length != bundle.frame_length) {
    throw DataError("model was trained with frame length " +
                    std::to_string(bundle.frame_length) + ", not " +
                    std::to_string(*flags.frame_length));
  }
  cfg.frame_length = bundle.frame_length;
  cfg.sample_rate = bundle.sample_rate;
  cfg.validate();
  return cfg;
}

int max_label(const std::vector<int>& labels) {
  int m = -1;
  for (int l : labels) m = std::max(m, l);
  return m;
}

TrainingFrames load_training_frames(const std::string& dir, int frame_length) {
  const auto corpus = load_corpus(dir, 16000);
  if (corpus.empty()) throw DataError("no utterances in " + dir);
  TrainingFrames frames = extract_training_frames(corpus, frame_length);
  if (frames.labels.empty()) throw DataError("no labeled frames in " + dir);
  std::fprintf(stderr, "%zu utterances, %zu labeled frames\n", corpus.size(),
               frames.labels.size());
  return frames;
}

void print_report(const EnhancementReport& r) {
  std::fprintf(stderr, "%zu frames, mean SPP %.3f, fallbacks %ld\n", r.frames_processed,
               r.overall_mean_spp(), r.fallbacks.total());
}

int run(int argc, char** argv) {
  CLI::App app{"Hybrid classifier / MixMax speech enhancement"};
  app.require_subcommand(1);

  // synth-corpus
  CLI::App* synth = app.add_subcommand("synth-corpus", "write a labeled synthetic corpus");
  std::string synth_out;
  int synth_classes = 5;
  int synth_utts = 20;
  uint64_t synth_seed = 1;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--classes", synth_classes, "number of phoneme classes")
      ->check(CLI::Range(2, 1000));
  synth->add_option("--utterances", synth_utts, "number of utterances")
      ->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed, "random seed");

  // train-mog
  CLI::App* train_mog = app.add_subcommand("train-mog", "supervised phoneme MoG from a corpus");
  std::string corpus_dir, model_out;
  int frame_length = 512;
  train_mog->add_option("--corpus", corpus_dir, "corpus directory")->required();
  train_mog->add_option("--out", model_out, "model file to write")->required();
  train_mog->add_option("--frame-length", frame_length, "STFT frame length");

  // train-mog-em
  CLI::App* train_em_cmd = app.add_subcommand("train-mog-em", "unsupervised EM MoG");
  EmOptions em;
  train_em_cmd->add_option("--corpus", corpus_dir, "corpus directory")->required();
  train_em_cmd->add_option("--out", model_out, "model file to write")->required();
  train_em_cmd->add_option("--frame-length", frame_length, "STFT frame length");
  train_em_cmd->add_option("--components", em.components, "mixture components")
      ->check(CLI::PositiveNumber);
  train_em_cmd->add_option("--iterations", em.iterations, "EM iterations")
      ->check(CLI::NonNegativeNumber);
  train_em_cmd->add_option("--seed", em.seed, "random seed");

  // train-nn
  CLI::App* train_nn = app.add_subcommand("train-nn", "train the frame classifier");
  std::string model_in;
  TrainOptions nn;
  train_nn->add_option("--corpus", corpus_dir, "corpus directory")->required();
  train_nn->add_option("--model", model_in, "bundle holding the speech MoG")->required();
  train_nn->add_option("--out", model_out, "model file to write (default: overwrite --model)");
  train_nn->add_option("--hidden", nn.hidden_units, "hidden units")->check(CLI::PositiveNumber);
  train_nn->add_option("--epochs", nn.epochs, "training epochs")->check(CLI::NonNegativeNumber);
  train_nn->add_option("--learning-rate", nn.learning_rate, "step size");
  train_nn->add_option("--batch-size", nn.batch_size, "mini-batch size")
      ->check(CLI::PositiveNumber);
  train_nn->add_option("--momentum", nn.momentum, "momentum in [0, 1)");
  train_nn->add_option("--seed", nn.seed, "random seed");

  // enhance
  CLI::App* enhance_cmd = app.add_subcommand("enhance", "enhance one WAV file");
  std::string in_path, out_path;
  CommonFlags enhance_flags;
  enhance_cmd->add_option("--model", model_in, "model bundle")->required();
  enhance_cmd->add_option("--in", in_path, "noisy PCM16 mono WAV")->required();
  enhance_cmd->add_option("--out", out_path, "enhanced WAV to write")->required();
  enhance_flags.add_to(enhance_cmd);

  // classify
  CLI::App* classify_cmd = app.add_subcommand("classify", "per-frame phoneme classes as CSV");
  std::string labels_path;
  CommonFlags classify_flags;
  classify_cmd->add_option("--model", model_in, "model bundle")->required();
  classify_cmd->add_option("--in", in_path, "PCM16 mono WAV")->required();
  classify_cmd->add_option("--labels", labels_path, "label file for accuracy")
      ->check(CLI::ExistingFile);
  classify_flags.add_to(classify_cmd);

  // evaluate
  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "mix, enhance and score a corpus");
  std::vector<std::string> noise_names = {"white"};
  std::vector<double> snrs = {-5, 0, 5, 10, 15};
  unsigned threads = 0;
  CommonFlags eval_flags;
  evaluate_cmd->add_option("--model", model_in, "model bundle")->required();
  evaluate_cmd->add_option("--corpus", corpus_dir, "clean corpus directory")->required();
  evaluate_cmd->add_option("--out", out_path, "CSV file (default: stdout)");
  evaluate_cmd->add_option("--noise", noise_names, "noise types")->delimiter(',');
  evaluate_cmd->add_option("--snr", snrs, "SNRs in dB")->delimiter(',');
  evaluate_cmd->add_option("--threads", threads, "worker threads (0: all cores)");
  eval_flags.add_to(evaluate_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; every other parse failure is a usage error.
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  if (synth->parsed()) {
    SyntheticCorpusSpec spec = SyntheticCorpusSpec::with_classes(synth_classes, synth_seed);
    spec.num_utterances = synth_utts;
    const auto corpus = synthesize_corpus(spec);
    std::filesystem::create_directories(synth_out);
    save_corpus(synth_out, corpus);
    std::ofstream names(std::filesystem::path(synth_out) / "classes.txt");
    for (const auto& c : spec.classes) names << c.name << '\n';
    std::fprintf(stderr, "wrote %zu utterances to %s\n", corpus.size(), synth_out.c_str());
    return 0;
  }

  if (train_mog->parsed()) {
    const TrainingFrames frames = load_training_frames(corpus_dir, frame_length);
    ModelBundle bundle;
    bundle.frame_length = frame_length;
    bundle.mog = train_supervised(frames.log_spectra, max_label(frames.labels) + 1);
    bundle.config_hash = config_hash(format_config({.frame_length = frame_length}));
    save_bundle(bundle, model_out);
    std::fprintf(stderr, "%d components, %d bins -> %s\n", bundle.mog->num_components(),
                 bundle.mog->num_bins(), model_out.c_str());
    return 0;
  }

  if (train_em_cmd->parsed()) {
    const TrainingFrames frames = load_training_frames(corpus_dir, frame_length);
    std::vector<LogSpectrum> data;
    for (const auto& f : frames.log_spectra) data.push_back(f.logspec);
    const EmResult r = train_em(data, em);
    std::fprintf(stderr, "log-likelihood %.6g -> %.6g, %d re-seeded\n",
                 r.log_likelihood.front(), r.log_likelihood.back(), r.reseeded);
    ModelBundle bundle;
    bundle.frame_length = frame_length;
    bundle.mog = r.model;
    bundle.config_hash = config_hash(format_config({.frame_length = frame_length}));
    save_bundle(bundle, model_out);
    return 0;
  }

  if (train_nn->parsed()) {
    ModelBundle bundle = load_bundle(model_in);
    if (!bundle.mog) throw DataError(model_in + " holds no speech model");
    const TrainingFrames frames = load_training_frames(corpus_dir, bundle.frame_length);
    const int m = bundle.mog->num_components();
    if (max_label(frames.labels) >= m) {
      throw DataError("corpus has more classes than the speech model");
    }
    const TrainResult r = train(TrainingBatch::from_features(frames.features, frames.labels),
                                m, nn, [](int epoch, double ll) {
                                  std::fprintf(stderr, "epoch %d mean log-likelihood %.5f\n",
                                               epoch, ll);
                                });
    bundle.net = r.net;
    save_bundle(bundle, model_out.empty() ? model_in : model_out);
    return 0;
  }

  if (enhance_cmd->parsed()) {
    const ModelBundle bundle = load_bundle(model_in);
    if (!bundle.mog) throw DataError(model_in + " holds no speech model");
    const EnhancerConfig cfg = config_for_bundle(enhance_flags, bundle);
    const Waveform noisy = read_wav(in_path, cfg.sample_rate);
    const EnhancementResult r =
        enhance(noisy, *bundle.mog, bundle.net ? &*bundle.net : nullptr, cfg);
    write_wav(out_path, r.audio);
    print_report(r.report);
    return 0;
  }

  if (classify_cmd->parsed()) {
    const ModelBundle bundle = load_bundle(model_in);
    if (!bundle.mog) throw DataError(model_in + " holds no speech model");
    const EnhancerConfig cfg = config_for_bundle(classify_flags, bundle);
    const Waveform audio = read_wav(in_path, cfg.sample_rate);
    const EnhancementResult r =
        enhance(audio, *bundle.mog, bundle.net ? &*bundle.net : nullptr, cfg);
    std::vector<int> truth;
    if (!labels_path.empty()) {
      LabeledUtterance u{"", audio, read_labels(labels_path)};
      truth = u.frame_labels(stft(audio, {.frame_length = cfg.frame_length}));
    }
    std::cout << "frame,class" << (truth.empty() ? "" : ",label") << '\n';
    size_t total = 0, correct = 0;
    for (size_t n = 0; n < r.report.frame_class.size(); ++n) {
      std::cout << n << ',' << r.report.frame_class[n];
      if (!truth.empty()) {
        std::cout << ',' << truth[n];
        if (truth[n] != kNoLabel) {
          ++total;
          correct += truth[n] == r.report.frame_class[n];
        }
      }
      std::cout << '\n';
    }
    if (total > 0) {
      std::fprintf(stderr, "accuracy %.4f on %zu labeled frames\n",
                   static_cast<double>(correct) / total, total);
    }
    return 0;
  }

  if (evaluate_cmd->parsed()) {
    const ModelBundle bundle = load_bundle(model_in);
    if (!bundle.mog) throw DataError(model_in + " holds no speech model");
    const EnhancerConfig cfg = config_for_bundle(eval_flags, bundle);
    EvaluationOptions opts;
    opts.noise_types.clear();
    for (const auto& name : noise_names) opts.noise_types.push_back(parse_noise_type(name));
    opts.snrs_db = snrs;
    opts.threads = threads;
    if (eval_flags.seed) opts.seed = *eval_flags.seed;
    const auto corpus = load_corpus(corpus_dir, cfg.sample_rate);
    const auto rows =
        evaluate(corpus, *bundle.mog, bundle.net ? &*bundle.net : nullptr, cfg, opts);
    if (out_path.empty()) {
      write_csv(std::cout, rows);
    } else {
      std::ofstream out(out_path);
      if (!out) throw DataError("cannot write " + out_path);
      write_csv(out, rows);
    }
    return 0;
  }
  return kExitUsage;
}

}  // namespace
}  // namespace nnmm

int main(int argc, char** argv) {
  try {
    return nnmm::run(argc, argv);
  } catch (const nnmm::NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return nnmm::kExitNumeric;
  } catch (const nnmm::DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return nnmm::kExitData;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return nnmm::kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return nnmm::kExitData;
  }
}
