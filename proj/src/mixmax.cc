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

#include "nnmm/mixmax.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nnmm {
namespace {

const double kLogDensityFloor = std::log(kDensityFloor);

double log_add_exp(double a, double b) {
  const double top = std::max(a, b);
  if (top == -INFINITY) return top;
  return top + std::log1p(std::exp(std::min(a, b) - top));
}

// log of the two terms of h = f G + F g for one bin.
struct BinTerms {
  double log_speech_dominant;  // log f(z) G(z)
  double log_noise_dominant;   // log F(z) g(z)
  double log_h() const {
    return log_add_exp(log_speech_dominant, log_noise_dominant);
  }
};

BinTerms bin_terms(double z, double mu, double sd, double noise_log_pdf,
                   double noise_log_cdf) {
  return {gaussian_log_pdf(z, mu, sd) + noise_log_cdf,
          gaussian_log_cdf(z, mu, sd) + noise_log_pdf};
}

ScalarEstimate rho_from_terms(const BinTerms& t) {
  const double log_h = t.log_h();
  if (!(log_h >= kLogDensityFloor)) return {0.5, true};
  return {std::clamp(std::exp(t.log_speech_dominant - log_h), 0.0, 1.0),
          false};
}

ScalarEstimate conditional_mean(double z, double mu, double sd) {
  if (gaussian_cdf(z, mu, sd) < kDensityFloor) return {z - sd, true};
  const double t = (z - mu) / sd;
  // sigma^2 f(z) / F(z) = sigma phi(t) / Phi(t)
  const double ratio = std::exp(gaussian_log_pdf(t, 0.0, 1.0) -
                                gaussian_log_cdf(t, 0.0, 1.0));
  const double value = mu - sd * ratio;
  if (!(value < z)) return {z - sd, true};
  return {value, false};
}

void check_shapes(const LogSpectrum& z, const PhonemeMog& mog,
                  const NoiseModel& noise) {
  if (z.size() != mog.num_bins() || noise.num_bins() != mog.num_bins() ||
      noise.stddev.size() != noise.mean.size()) {
    throw std::invalid_argument("mixmax: bin counts of z, mog, noise differ");
  }
}

}  // namespace

double bin_density(double z, double speech_mean, double speech_std,
                   double noise_mean, double noise_std) {
  const BinTerms t = bin_terms(z, speech_mean, speech_std,
                               gaussian_log_pdf(z, noise_mean, noise_std),
                               gaussian_log_cdf(z, noise_mean, noise_std));
  return std::exp(t.log_h());
}

ComponentDensity component_density(const LogSpectrum& z, int i,
                                   const PhonemeMog& mog,
                                   const NoiseModel& noise) {
  check_shapes(z, mog, noise);
  ComponentDensity out;
  out.per_bin.resize(z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    const BinTerms t =
        bin_terms(z[k], mog.means(i, k), mog.stds(i, k),
                  gaussian_log_pdf(z[k], noise.mean[k], noise.stddev[k]),
                  gaussian_log_cdf(z[k], noise.mean[k], noise.stddev[k]));
    const double log_h = t.log_h();
    out.per_bin[k] = std::exp(log_h);
    out.log_joint += std::max(log_h, kLogDensityFloor);
  }
  return out;
}

ScalarEstimate rho_ik(double z_k, int i, int k, const PhonemeMog& mog,
                      const NoiseModel& noise) {
  return rho_from_terms(
      bin_terms(z_k, mog.means(i, k), mog.stds(i, k),
                gaussian_log_pdf(z_k, noise.mean[k], noise.stddev[k]),
                gaussian_log_cdf(z_k, noise.mean[k], noise.stddev[k])));
}

ScalarEstimate conditional_mean_below(double z_k, int i, int k,
                                      const PhonemeMog& mog) {
  return conditional_mean(z_k, mog.means(i, k), mog.stds(i, k));
}

FrameEvaluation evaluate_frame(const LogSpectrum& z, const PhonemeMog& mog,
                               const NoiseModel& noise,
                               bool with_conditional_mean) {
  check_shapes(z, mog, noise);
  const int m = mog.num_components();
  const Eigen::Index bins = z.size();
  Eigen::VectorXd noise_log_pdf(bins), noise_log_cdf(bins);
  for (Eigen::Index k = 0; k < bins; ++k) {
    noise_log_pdf[k] = gaussian_log_pdf(z[k], noise.mean[k], noise.stddev[k]);
    noise_log_cdf[k] = gaussian_log_cdf(z[k], noise.mean[k], noise.stddev[k]);
  }

  FrameEvaluation eval;
  eval.rho.resize(m, bins);
  eval.log_h = Eigen::VectorXd::Zero(m);
  if (with_conditional_mean) eval.conditional_mean.resize(m, bins);
  for (int i = 0; i < m; ++i) {
    for (Eigen::Index k = 0; k < bins; ++k) {
      const BinTerms t = bin_terms(z[k], mog.means(i, k), mog.stds(i, k),
                                   noise_log_pdf[k], noise_log_cdf[k]);
      eval.log_h[i] += std::max(t.log_h(), kLogDensityFloor);
      const ScalarEstimate rho = rho_from_terms(t);
      eval.rho(i, k) = rho.value;
      eval.diagnostics.rho_fallbacks += rho.fallback;
      if (with_conditional_mean) {
        const ScalarEstimate cm =
            conditional_mean(z[k], mog.means(i, k), mog.stds(i, k));
        eval.conditional_mean(i, k) = cm.value;
        eval.diagnostics.conditional_mean_fallbacks += cm.fallback;
      }
    }
  }
  return eval;
}

namespace {

PosteriorResult posterior_from_log_h(const Eigen::VectorXd& weights,
                                     const Eigen::VectorXd& log_h) {
  const Eigen::Index m = weights.size();
  const Eigen::VectorXd log_joint = weights.array().log() + log_h.array();
  PosteriorResult out;
  const double top = log_joint.maxCoeff();
  if (!std::isfinite(top)) {
    out.p = Eigen::VectorXd::Constant(m, 1.0 / m);
    out.fallback = true;
    return out;
  }
  out.p = (log_joint.array() - top).exp().matrix();
  out.p /= out.p.sum();
  return out;
}

}  // namespace

PosteriorResult generative_posterior(const LogSpectrum& z,
                                     const PhonemeMog& mog,
                                     const NoiseModel& noise) {
  const int m = mog.num_components();
  Eigen::VectorXd log_h(m);
  for (int i = 0; i < m; ++i) {
    log_h[i] = component_density(z, i, mog, noise).log_joint;
  }
  return posterior_from_log_h(mog.weights, log_h);
}

PosteriorResult generative_posterior(const PhonemeMog& mog,
                                     const FrameEvaluation& eval) {
  if (eval.log_h.size() != mog.num_components()) {
    throw std::invalid_argument("generative_posterior: shape mismatch");
  }
  return posterior_from_log_h(mog.weights, eval.log_h);
}

EstimateResult mmse_estimate(const LogSpectrum& z,
                             const Eigen::VectorXd& posterior,
                             const FrameEvaluation& eval) {
  const Eigen::Index m = eval.rho.rows();
  if (posterior.size() != m || eval.conditional_mean.rows() != m ||
      eval.rho.cols() != z.size()) {
    throw std::invalid_argument("mmse_estimate: shape mismatch");
  }
  EstimateResult out;
  out.xhat = Eigen::VectorXd::Zero(z.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    if (posterior[i] == 0.0) continue;
    for (Eigen::Index k = 0; k < z.size(); ++k) {
      const double rho = eval.rho(i, k);
      out.xhat[k] += posterior[i] * (rho * z[k] +
                                     (1.0 - rho) * eval.conditional_mean(i, k));
    }
  }
  out.diagnostics = eval.diagnostics;
  return out;
}

EstimateResult mmse_estimate(const LogSpectrum& z,
                             const Eigen::VectorXd& posterior,
                             const PhonemeMog& mog, const NoiseModel& noise) {
  return mmse_estimate(z, posterior, evaluate_frame(z, mog, noise, true));
}

Eigen::VectorXd hybrid_spp(const Eigen::VectorXd& p_nn,
                           const FrameEvaluation& eval) {
  if (p_nn.size() != eval.rho.rows()) {
    throw std::invalid_argument("hybrid_spp: posterior length != m");
  }
  Eigen::VectorXd rho = eval.rho.transpose() * p_nn;
  return rho.cwiseMax(0.0).cwiseMin(1.0);
}

SppResult hybrid_spp(const Eigen::VectorXd& p_nn, const LogSpectrum& z,
                     const PhonemeMog& mog, const NoiseModel& noise) {
  const FrameEvaluation eval = evaluate_frame(z, mog, noise, false);
  return {hybrid_spp(p_nn, eval), eval.diagnostics};
}

LogSpectrum soft_subtract(const LogSpectrum& z, const Eigen::VectorXd& rho,
                          double beta) {
  if (rho.size() != z.size()) {
    throw std::invalid_argument("soft_subtract: length mismatch");
  }
  if (beta < 0.0) throw std::invalid_argument("soft_subtract: beta < 0");
  return z.array() - (1.0 - rho.array()) * beta;
}

}  // namespace nnmm
