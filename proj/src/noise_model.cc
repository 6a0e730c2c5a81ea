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

#include "nnmm/noise_model.h"

#include <cmath>
#include <stdexcept>

#include "nnmm/errors.h"
#include "nnmm/mog.h"

namespace nnmm {

NoiseModel init_noise_from_prefix(const std::vector<LogSpectrum>& frames) {
  if (frames.size() < 2) throw DataError("insufficient noise-only prefix");
  const Eigen::Index bins = frames[0].size();
  NoiseModel model;
  model.mean = Eigen::VectorXd::Zero(bins);
  for (const auto& f : frames) {
    if (f.size() != bins) {
      throw std::invalid_argument("noise prefix frames differ in length");
    }
    model.mean += f;
  }
  model.mean /= static_cast<double>(frames.size());
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(bins);
  for (const auto& f : frames) sq += (f - model.mean).cwiseAbs2();
  model.stddev = (sq / static_cast<double>(frames.size() - 1))
                     .cwiseSqrt()
                     .cwiseMax(kSigmaFloor);
  return model;
}

NoiseModel adapt_noise(const NoiseModel& model, const LogSpectrum& z,
                       const Eigen::VectorXd& spp, double alpha) {
  const Eigen::Index bins = model.mean.size();
  if (z.size() != bins || spp.size() != bins || model.stddev.size() != bins) {
    throw std::invalid_argument("adapt_noise: length mismatch");
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("adapt_noise: alpha must lie in (0, 1]");
  }
  NoiseModel out;
  out.mean.resize(bins);
  out.stddev.resize(bins);
  for (Eigen::Index k = 0; k < bins; ++k) {
    const double rho = spp[k];
    const double mu_old = model.mean[k];
    const double mu_new =
        rho * mu_old + (1.0 - rho) * (alpha * z[k] + (1.0 - alpha) * mu_old);
    const double sd_old = model.stddev[k];
    const double sd_new =
        rho * sd_old +
        (1.0 - rho) * (alpha * std::abs(z[k] - mu_new) + (1.0 - alpha) * sd_old);
    out.mean[k] = mu_new;
    out.stddev[k] = std::max(sd_new, kSigmaFloor);
  }
  return out;
}

}  // namespace nnmm
