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

#include "nnmm/mog.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "nnmm/errors.h"
#include "nnmm/random.h"

namespace nnmm {
namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // ln sqrt(2 pi)

double log_sum_exp(const Eigen::VectorXd& v) {
  const double top = v.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((v.array() - top).exp().sum());
}

}  // namespace

void PhonemeMog::validate() const {
  const auto m = weights.size();
  if (m == 0) throw DataError("mixture has no components");
  if (means.rows() != m || stds.rows() != m || means.cols() != stds.cols() ||
      means.cols() == 0) {
    throw DataError("mixture parameter shapes disagree");
  }
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != m) {
    throw DataError("mixture has " + std::to_string(labels.size()) +
                    " labels for " + std::to_string(m) + " components");
  }
  if ((weights.array() < 0.0).any() ||
      std::abs(weights.sum() - 1.0) > 1e-9) {
    throw DataError("mixture weights are not a probability distribution");
  }
  if (!means.allFinite() || !stds.allFinite()) {
    throw DataError("mixture has non-finite parameters");
  }
  if (stds.minCoeff() < kSigmaFloor) {
    throw DataError("mixture standard deviation below floor");
  }
}

double gaussian_pdf(double x, double mean, double stddev) {
  const double t = (x - mean) / stddev;
  return std::exp(-0.5 * t * t) / (std::sqrt(2.0 * std::numbers::pi) * stddev);
}

double gaussian_cdf(double x, double mean, double stddev) {
  return 0.5 * std::erfc(-(x - mean) / (stddev * std::numbers::sqrt2));
}

double gaussian_log_pdf(double x, double mean, double stddev) {
  const double t = (x - mean) / stddev;
  return -0.5 * t * t - kLogSqrt2Pi - std::log(stddev);
}

double gaussian_log_cdf(double x, double mean, double stddev) {
  const double t = (x - mean) / stddev;
  if (t > -37.0) {
    return std::log(0.5 * std::erfc(-t / std::numbers::sqrt2));
  }
  // Asymptotic expansion of the Mills ratio; the truncation error is below
  // 1e-12 relative at this range.
  const double inv2 = 1.0 / (t * t);
  const double series =
      1.0 - inv2 * (1.0 - 3.0 * inv2 * (1.0 - 5.0 * inv2 * (1.0 - 7.0 * inv2)));
  return -0.5 * t * t - std::log(-t) - kLogSqrt2Pi + std::log(series);
}

PhonemeMog train_supervised(const std::vector<LabeledFrame>& data, int m,
                            std::vector<std::string> labels) {
  if (m < 1) throw std::invalid_argument("train_supervised: m must be >= 1");
  if (labels.empty()) {
    for (int i = 0; i < m; ++i) labels.push_back("c" + std::to_string(i));
  }
  if (static_cast<int>(labels.size()) != m) {
    throw std::invalid_argument("train_supervised: label count != m");
  }
  if (data.empty()) throw DataError("no training frames");
  const Eigen::Index bins = data[0].logspec.size();

  std::vector<long> count(m, 0);
  RowMatrix sum = RowMatrix::Zero(m, bins);
  for (const auto& f : data) {
    if (f.label < 0 || f.label >= m) {
      throw DataError("frame label " + std::to_string(f.label) +
                      " outside [0, " + std::to_string(m) + ")");
    }
    if (f.logspec.size() != bins) {
      throw DataError("training frames have inconsistent bin counts");
    }
    ++count[f.label];
    sum.row(f.label) += f.logspec.transpose();
  }
  for (int i = 0; i < m; ++i) {
    if (count[i] < 2) {
      throw DataError("class " + std::to_string(i) + " ('" + labels[i] +
                      "') has " + std::to_string(count[i]) +
                      " frames; at least 2 are required");
    }
  }

  PhonemeMog mog;
  mog.labels = std::move(labels);
  mog.means = RowMatrix(m, bins);
  for (int i = 0; i < m; ++i) mog.means.row(i) = sum.row(i) / count[i];

  RowMatrix sq = RowMatrix::Zero(m, bins);
  for (const auto& f : data) {
    sq.row(f.label) +=
        (f.logspec.transpose() - mog.means.row(f.label)).array().square().matrix();
  }
  mog.stds = RowMatrix(m, bins);
  for (int i = 0; i < m; ++i) {
    mog.stds.row(i) = (sq.row(i) / static_cast<double>(count[i] - 1))
                          .array()
                          .sqrt()
                          .max(kSigmaFloor)
                          .matrix();
  }
  const double total = std::accumulate(count.begin(), count.end(), 0.0);
  mog.weights.resize(m);
  for (int i = 0; i < m; ++i) mog.weights[i] = count[i] / total;
  return mog;
}

namespace {

// log c_i + log f_i(x_n) for all n, i.
RowMatrix log_joint_matrix(const RowMatrix& x, const PhonemeMog& mog) {
  const Eigen::Index n = x.rows();
  const int m = mog.num_components();
  RowMatrix out(n, m);
  for (int i = 0; i < m; ++i) {
    const Eigen::RowVectorXd inv_var =
        mog.stds.row(i).array().square().inverse().matrix();
    const double constant = std::log(mog.weights[i]) -
                            x.cols() * kLogSqrt2Pi -
                            mog.stds.row(i).array().log().sum();
    const Eigen::VectorXd quad =
        (x.rowwise() - mog.means.row(i)).array().square().matrix() *
        inv_var.transpose();
    out.col(i) = (constant - 0.5 * quad.array()).matrix();
  }
  return out;
}

// Picks `count` distinct indices from [0, n) uniformly.
std::vector<size_t> subsample(size_t n, size_t count, Rng& rng) {
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  count = std::min(count, n);
  for (size_t i = 0; i < count; ++i) {
    std::swap(idx[i], idx[i + rng.below(n - i)]);
  }
  idx.resize(count);
  return idx;
}

}  // namespace

EmResult train_em(const std::vector<LogSpectrum>& data,
                  const EmOptions& options) {
  const int m = options.components;
  if (m < 1) throw std::invalid_argument("train_em: components must be >= 1");
  if (data.size() < static_cast<size_t>(m)) {
    throw DataError("train_em: need at least as many frames as components");
  }
  const Eigen::Index bins = data[0].size();
  const Eigen::Index n = static_cast<Eigen::Index>(data.size());
  RowMatrix x(n, bins);
  for (Eigen::Index t = 0; t < n; ++t) {
    if (data[t].size() != bins) {
      throw DataError("train_em: inconsistent bin counts");
    }
    x.row(t) = data[t].transpose();
  }

  Rng rng(options.seed);
  const Eigen::RowVectorXd global_mean = x.colwise().mean();
  const Eigen::RowVectorXd global_std =
      ((x.rowwise() - global_mean).array().square().colwise().sum() / n)
          .sqrt()
          .max(kSigmaFloor)
          .matrix();

  // k-means++ seeding on a subsample.
  const auto pool = subsample(static_cast<size_t>(n),
                              std::max(options.seeding_subsample, size_t(m)),
                              rng);
  RowMatrix means(m, bins);
  means.row(0) = x.row(pool[rng.below(pool.size())]);
  std::vector<double> dist(pool.size(), std::numeric_limits<double>::max());
  for (int c = 1; c < m; ++c) {
    double total = 0.0;
    for (size_t j = 0; j < pool.size(); ++j) {
      dist[j] = std::min(dist[j],
                         (x.row(pool[j]) - means.row(c - 1)).squaredNorm());
      total += dist[j];
    }
    size_t pick = rng.below(pool.size());
    if (total > 0.0) {
      double target = rng.uniform() * total;
      for (size_t j = 0; j < pool.size(); ++j) {
        target -= dist[j];
        if (target < 0.0) {
          pick = j;
          break;
        }
      }
    }
    means.row(c) = x.row(pool[pick]);
  }

  EmResult result;
  PhonemeMog& mog = result.model;
  mog.means = means;
  mog.stds = global_std.replicate(m, 1);
  mog.weights = Eigen::VectorXd::Constant(m, 1.0 / m);
  for (int i = 0; i < m; ++i) mog.labels.push_back("em" + std::to_string(i));

  auto e_step = [&](RowMatrix& resp) {
    resp = log_joint_matrix(x, mog);
    double ll = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
      const Eigen::VectorXd row = resp.row(t).transpose();
      const double norm = log_sum_exp(row);
      ll += norm;
      resp.row(t) = (resp.row(t).array() - norm).exp().matrix();
    }
    return ll;
  };

  RowMatrix resp;
  for (int iter = 0; iter < options.iterations; ++iter) {
    result.log_likelihood.push_back(e_step(resp));
    const Eigen::VectorXd mass = resp.colwise().sum().transpose();
    for (int i = 0; i < m; ++i) {
      if (mass[i] < 1e-8) {
        mog.means.row(i) = x.row(rng.below(static_cast<size_t>(n)));
        mog.stds.row(i) = global_std;
        mog.weights[i] = 1.0 / n;
        ++result.reseeded;
        continue;
      }
      const Eigen::RowVectorXd mu = resp.col(i).transpose() * x / mass[i];
      const Eigen::RowVectorXd var =
          resp.col(i).transpose() *
          (x.rowwise() - mu).array().square().matrix() / mass[i];
      mog.means.row(i) = mu;
      mog.stds.row(i) = var.array().sqrt().max(kSigmaFloor).matrix();
      mog.weights[i] = mass[i] / n;
    }
    mog.weights /= mog.weights.sum();
  }
  result.log_likelihood.push_back(e_step(resp));
  return result;
}

Eigen::VectorXd log_joint_clean(const LogSpectrum& x, const PhonemeMog& mog) {
  if (x.size() != mog.num_bins()) {
    throw std::invalid_argument("log_joint_clean: bin count mismatch");
  }
  return log_joint_matrix(RowMatrix(x.transpose()), mog).row(0).transpose();
}

Eigen::VectorXd clean_posterior(const LogSpectrum& x, const PhonemeMog& mog) {
  const Eigen::VectorXd lj = log_joint_clean(x, mog);
  return (lj.array() - log_sum_exp(lj)).exp().matrix();
}

LogSpectrum averaged_psd(const Eigen::VectorXd& posteriors,
                         const PhonemeMog& mog) {
  if (posteriors.size() != mog.num_components()) {
    throw std::invalid_argument("averaged_psd: posterior length != m");
  }
  return mog.means.transpose() * posteriors;
}

}  // namespace nnmm
