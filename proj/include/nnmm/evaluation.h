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

#ifndef NNMM_EVALUATION_H_
#define NNMM_EVALUATION_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "nnmm/corpus.h"
#include "nnmm/enhancer.h"

namespace nnmm {

struct EvaluationOptions {
  std::vector<NoiseType> noise_types = {NoiseType::kWhite};
  std::vector<double> snrs_db = {-5.0, 0.0, 5.0, 10.0, 15.0};
  uint64_t seed = 1;
  // 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

struct EvaluationRow {
  std::string utterance;
  NoiseType noise = NoiseType::kWhite;
  double snr_db = 0.0;
  double segsnr_in = 0.0;
  double segsnr_out = 0.0;
  double lsd = 0.0;
  double mean_spp = 0.0;
  // Frame accuracy of the per-frame argmax class on labeled frames.
  std::optional<double> accuracy;
};

// One row per (utterance, noise type, SNR), in that nesting order. Jobs
// run on a worker pool; the result order does not depend on scheduling.
std::vector<EvaluationRow> evaluate(const std::vector<LabeledUtterance>& clean,
                                    const PhonemeMog& mog,
                                    const NnClassifier* net,
                                    const EnhancerConfig& config,
                                    const EvaluationOptions& options);

void write_csv(std::ostream& out, const std::vector<EvaluationRow>& rows);

}  // namespace nnmm

#endif  // NNMM_EVALUATION_H_
