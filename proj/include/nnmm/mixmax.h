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

#ifndef NNMM_MIXMAX_H_
#define NNMM_MIXMAX_H_

#include <Eigen/Dense>

#include "nnmm/dsp.h"
#include "nnmm/mog.h"
#include "nnmm/noise_model.h"

namespace nnmm {

// Densities below this are treated as underflowed.
inline constexpr double kDensityFloor = 1e-300;

// Counts of numerically undecidable quantities replaced by fallbacks.
struct MixMaxDiagnostics {
  long posterior_fallbacks = 0;
  long rho_fallbacks = 0;
  long conditional_mean_fallbacks = 0;

  MixMaxDiagnostics& operator+=(const MixMaxDiagnostics& o) {
    posterior_fallbacks += o.posterior_fallbacks;
    rho_fallbacks += o.rho_fallbacks;
    conditional_mean_fallbacks += o.conditional_mean_fallbacks;
    return *this;
  }
  long total() const {
    return posterior_fallbacks + rho_fallbacks + conditional_mean_fallbacks;
  }
};

struct ScalarEstimate {
  double value = 0.0;
  bool fallback = false;
};

// Density of Z = max(X, Y) for component i:
//   h_ik(z) = f_ik(z) G_k(z) + F_ik(z) g_k(z).
struct ComponentDensity {
  Eigen::VectorXd per_bin;  // h_ik(z_k)
  double log_joint = 0.0;   // sum_k log max(h_ik, kDensityFloor)
};
ComponentDensity component_density(const LogSpectrum& z, int i,
                                   const PhonemeMog& mog,
                                   const NoiseModel& noise);

// Scalar form of the above for one bin.
double bin_density(double z, double speech_mean, double speech_std,
                   double noise_mean, double noise_std);

struct PosteriorResult {
  Eigen::VectorXd p;
  // All components underflowed; p is uniform.
  bool fallback = false;
};

// p(I = i | Z = z) = c_i h_i(z) / h(z), evaluated in the log domain.
PosteriorResult generative_posterior(const LogSpectrum& z,
                                     const PhonemeMog& mog,
                                     const NoiseModel& noise);

// p(Y_k < X_k | Z_k = z_k, I = i) = f_ik G_k / h_ik. Returns 0.5 with the
// fallback flag when h_ik underflows.
ScalarEstimate rho_ik(double z_k, int i, int k, const PhonemeMog& mog,
                      const NoiseModel& noise);

// E(X_k | X_k < z_k, I = i) = mu - sigma^2 f(z) / F(z). Falls back to
// z_k - sigma when F underflows.
ScalarEstimate conditional_mean_below(double z_k, int i, int k,
                                      const PhonemeMog& mog);

// All per-component, per-bin quantities for one observed frame.
struct FrameEvaluation {
  RowMatrix rho;               // m x K
  RowMatrix conditional_mean;  // m x K, empty unless requested
  Eigen::VectorXd log_h;       // m, log h_i(z)
  MixMaxDiagnostics diagnostics;
};
FrameEvaluation evaluate_frame(const LogSpectrum& z, const PhonemeMog& mog,
                               const NoiseModel& noise,
                               bool with_conditional_mean);

// Same posterior from an already evaluated frame.
PosteriorResult generative_posterior(const PhonemeMog& mog,
                                     const FrameEvaluation& eval);

struct EstimateResult {
  LogSpectrum xhat;
  MixMaxDiagnostics diagnostics;
};

// x_k = sum_i p_i [rho_ik z_k + (1 - rho_ik) E(X_k | X_k < z_k, I = i)].
EstimateResult mmse_estimate(const LogSpectrum& z,
                             const Eigen::VectorXd& posterior,
                             const PhonemeMog& mog, const NoiseModel& noise);
EstimateResult mmse_estimate(const LogSpectrum& z,
                             const Eigen::VectorXd& posterior,
                             const FrameEvaluation& eval);

struct SppResult {
  Eigen::VectorXd rho;  // per-bin speech presence probability in [0, 1]
  MixMaxDiagnostics diagnostics;
};

// rho_k = sum_i p_i rho_ik, with p taken from an external classifier.
SppResult hybrid_spp(const Eigen::VectorXd& p_nn, const LogSpectrum& z,
                     const PhonemeMog& mog, const NoiseModel& noise);
Eigen::VectorXd hybrid_spp(const Eigen::VectorXd& p_nn,
                           const FrameEvaluation& eval);

// x_k = z_k - (1 - rho_k) beta.
LogSpectrum soft_subtract(const LogSpectrum& z, const Eigen::VectorXd& rho,
                          double beta);

}  // namespace nnmm

#endif  // NNMM_MIXMAX_H_
