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

#include "nnmm/evaluation.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "nnmm/metrics.h"

namespace nnmm {
namespace {

struct Job {
  size_t utterance;
  NoiseType noise;
  double snr_db;
  uint64_t noise_seed;
};

EvaluationRow run_job(const Job& job, const LabeledUtterance& utt,
                      const PhonemeMog& mog, const NnClassifier* net,
                      const EnhancerConfig& config) {
  const Waveform noise = generate_noise(job.noise, utt.audio.size(),
                                        utt.audio.sample_rate, job.noise_seed);
  const Waveform noisy = mix_at_snr(utt.audio, noise, job.snr_db);
  const EnhancementResult result = enhance(noisy, mog, net, config);

  EvaluationRow row;
  row.utterance = utt.name;
  row.noise = job.noise;
  row.snr_db = job.snr_db;
  row.segsnr_in = segmental_snr(utt.audio, noisy);
  row.segsnr_out = segmental_snr(utt.audio, result.audio);
  row.lsd = log_spectral_distance(utt.audio, result.audio, config.frame_length);
  row.mean_spp = result.report.overall_mean_spp();

  if (!utt.segments.empty()) {
    const ComplexSpectrogram spec =
        stft(noisy, StftOptions{.frame_length = config.frame_length});
    const std::vector<int> labels = utt.frame_labels(spec);
    const std::vector<int>& predicted = result.report.frame_class;
    size_t total = 0;
    size_t correct = 0;
    for (size_t n = 0; n < std::min(labels.size(), predicted.size()); ++n) {
      if (labels[n] == kNoLabel) continue;
      ++total;
      correct += labels[n] == predicted[n];
    }
    if (total > 0) row.accuracy = static_cast<double>(correct) / total;
  }
  return row;
}

}  // namespace

std::vector<EvaluationRow> evaluate(const std::vector<LabeledUtterance>& clean,
                                    const PhonemeMog& mog,
                                    const NnClassifier* net,
                                    const EnhancerConfig& config,
                                    const EvaluationOptions& options) {
  config.validate();
  std::vector<Job> jobs;
  for (size_t u = 0; u < clean.size(); ++u) {
    for (size_t t = 0; t < options.noise_types.size(); ++t) {
      for (double snr : options.snrs_db) {
        // Noise depends on (seed, utterance, type) only, so every SNR level
        // of an utterance sees the same noise realization.
        const uint64_t noise_seed =
            options.seed * 0x9e3779b97f4a7c15ULL + u * 1000 + t;
        jobs.push_back({u, options.noise_types[t], snr, noise_seed});
      }
    }
  }

  std::vector<EvaluationRow> rows(jobs.size());
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (size_t i = next++; i < jobs.size(); i = next++) {
      try {
        rows[i] = run_job(jobs[i], clean[jobs[i].utterance], mog, net, config);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = jobs.size();
      }
    }
  };
  unsigned n_threads = options.threads;
  if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(
      std::min<size_t>(n_threads, std::max<size_t>(1, jobs.size())));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return rows;
}

void write_csv(std::ostream& out, const std::vector<EvaluationRow>& rows) {
  out << "utterance,noise,snr_db,segsnr_in,segsnr_out,lsd,mean_spp,accuracy\n";
  const auto old_precision = out.precision(6);
  for (const auto& r : rows) {
    out << r.utterance << ',' << to_string(r.noise) << ',' << r.snr_db << ','
        << r.segsnr_in << ',' << r.segsnr_out << ',' << r.lsd << ','
        << r.mean_spp << ',';
    if (r.accuracy) out << *r.accuracy;
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace nnmm
