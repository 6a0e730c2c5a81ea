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

#ifndef NNMM_NOISE_MODEL_H_
#define NNMM_NOISE_MODEL_H_

#include <vector>

#include <Eigen/Dense>

#include "nnmm/dsp.h"

namespace nnmm {

// Per-bin Gaussian over the noise log-spectrum.
struct NoiseModel {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;  // >= kSigmaFloor

  int num_bins() const { return static_cast<int>(mean.size()); }
  bool operator==(const NoiseModel&) const = default;
};

// Sample mean and unbiased std per bin over the noise-only leading frames.
// Throws DataError("insufficient noise-only prefix") for fewer than two.
NoiseModel init_noise_from_prefix(const std::vector<LogSpectrum>& frames);

// SPP-gated recursive update. Bins with spp = 1 are frozen, bins with
// spp = 0 take a full exponential-smoothing step of size alpha. The new mean
// is used inside the deviation term of the std update.
NoiseModel adapt_noise(const NoiseModel& model, const LogSpectrum& z,
                       const Eigen::VectorXd& spp, double alpha);

}  // namespace nnmm

#endif  // NNMM_NOISE_MODEL_H_
