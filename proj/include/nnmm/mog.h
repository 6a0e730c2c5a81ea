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

#ifndef NNMM_MOG_H_
#define NNMM_MOG_H_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nnmm/dsp.h"

namespace nnmm {

// Lower bound on every standard deviation, in log-magnitude units.
inline constexpr double kSigmaFloor = 1e-3;
inline constexpr int kDefaultPhonemeClasses = 39;

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Clean-speech log-spectrum model: m diagonal Gaussians over K bins, one per
// phoneme class when trained from labels.
struct PhonemeMog {
  Eigen::VectorXd weights;  // m, sums to 1
  RowMatrix means;          // m x K
  RowMatrix stds;           // m x K, >= kSigmaFloor
  std::vector<std::string> labels;

  int num_components() const { return static_cast<int>(weights.size()); }
  int num_bins() const { return static_cast<int>(means.cols()); }

  // Throws DataError if shapes disagree, weights are not a distribution, or
  // a std is below the floor.
  void validate() const;

  bool operator==(const PhonemeMog&) const = default;
};

double gaussian_pdf(double x, double mean, double stddev);
double gaussian_cdf(double x, double mean, double stddev);
double gaussian_log_pdf(double x, double mean, double stddev);
// Accurate far into the lower tail, where the cdf itself underflows.
double gaussian_log_cdf(double x, double mean, double stddev);

struct LabeledFrame {
  LogSpectrum logspec;
  int label = 0;
};

// Per-class sample means, unbiased (N_i - 1) variances, and relative class
// frequencies as weights. Every class needs at least two frames; the error
// names the offending class. Labels default to "c0".."c{m-1}".
PhonemeMog train_supervised(const std::vector<LabeledFrame>& data, int m,
                            std::vector<std::string> labels = {});

struct EmOptions {
  int components = kDefaultPhonemeClasses;
  int iterations = 20;
  uint64_t seed = 1;
  // k-means++ seeding runs on at most this many randomly chosen frames.
  size_t seeding_subsample = 2000;
};

struct EmResult {
  PhonemeMog model;
  // Total data log-likelihood at the start of each iteration, followed by
  // the value for the returned model.
  std::vector<double> log_likelihood;
  // Components re-seeded after their responsibility mass collapsed.
  int reseeded = 0;
};

// Unsupervised diagonal-covariance EM. M-step variances use the maximum
// likelihood divisor (total responsibility), unlike train_supervised.
EmResult train_em(const std::vector<LogSpectrum>& data,
                  const EmOptions& options);

// log(c_i f_i(x)) for every component.
Eigen::VectorXd log_joint_clean(const LogSpectrum& x, const PhonemeMog& mog);

// Posterior p(I = i | X = x) for a clean log-spectrum.
Eigen::VectorXd clean_posterior(const LogSpectrum& x, const PhonemeMog& mog);

// sum_i p_i mu_i: the posterior-weighted average of the component means.
LogSpectrum averaged_psd(const Eigen::VectorXd& posteriors,
                         const PhonemeMog& mog);

}  // namespace nnmm

#endif  // NNMM_MOG_H_
