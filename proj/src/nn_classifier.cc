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

#include "nnmm/nn_classifier.h"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "nnmm/errors.h"
#include "nnmm/random.h"

namespace nnmm {
namespace {

constexpr double kProbabilityFloor = 1e-300;

struct Activations {
  Eigen::MatrixXd hidden;  // H x N
  Eigen::MatrixXd logits;  // m x N
};

Activations activate(const NnClassifier& net, const Eigen::MatrixXd& inputs) {
  const int d = net.input_dim();
  const int h = net.hidden_units();
  if (inputs.rows() != d) {
    throw std::invalid_argument("classifier expects " + std::to_string(d) +
                                "-dim inputs, got " +
                                std::to_string(inputs.rows()));
  }
  Activations a;
  a.hidden = net.w1.leftCols(d) * inputs;
  a.hidden.colwise() += net.w1.col(d);
  a.hidden = (1.0 + (-a.hidden.array()).exp()).inverse().matrix();
  a.logits = net.w2.leftCols(h) * a.hidden;
  a.logits.colwise() += net.w2.col(h);
  return a;
}

// Column-wise log-softmax.
Eigen::MatrixXd log_softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out = logits;
  for (Eigen::Index t = 0; t < out.cols(); ++t) {
    const double top = out.col(t).maxCoeff();
    const double norm =
        top + std::log((out.col(t).array() - top).exp().sum());
    out.col(t).array() -= norm;
  }
  return out;
}

void check_batch(const NnClassifier& net, const TrainingBatch& batch) {
  if (batch.size() == 0) throw std::invalid_argument("empty batch");
  if (static_cast<size_t>(batch.inputs.cols()) != batch.size()) {
    throw std::invalid_argument("batch inputs and targets differ in length");
  }
  for (int t : batch.targets) {
    if (t < 0 || t >= net.num_classes()) {
      throw DataError("target " + std::to_string(t) + " outside [0, " +
                      std::to_string(net.num_classes()) + ")");
    }
  }
}

double layer_limit(int fan_in, int fan_out) {
  return std::sqrt(6.0 / (fan_in + fan_out));
}

}  // namespace

NnClassifier NnClassifier::zeros(int input_dim, int hidden_units,
                                 int num_classes) {
  return {RowMatrix::Zero(hidden_units, input_dim + 1),
          RowMatrix::Zero(num_classes, hidden_units + 1)};
}

NnClassifier NnClassifier::random(int input_dim, int hidden_units,
                                  int num_classes, uint64_t seed) {
  NnClassifier net = zeros(input_dim, hidden_units, num_classes);
  Rng rng(seed);
  const double l1 = layer_limit(input_dim, hidden_units);
  for (int r = 0; r < hidden_units; ++r) {
    for (int c = 0; c < input_dim; ++c) net.w1(r, c) = rng.uniform(-l1, l1);
  }
  const double l2 = layer_limit(hidden_units, num_classes);
  for (int r = 0; r < num_classes; ++r) {
    for (int c = 0; c < hidden_units; ++c) net.w2(r, c) = rng.uniform(-l2, l2);
  }
  return net;
}

void NnClassifier::validate() const {
  if (w1.rows() < 1 || w1.cols() < 2 || w2.rows() < 1 ||
      w2.cols() != w1.rows() + 1) {
    throw DataError("classifier weight shapes are inconsistent");
  }
  if (!w1.allFinite() || !w2.allFinite()) {
    throw DataError("classifier has non-finite weights");
  }
}

TrainingBatch TrainingBatch::from_features(
    const std::vector<StackedFeature>& v, const std::vector<int>& targets) {
  if (v.size() != targets.size()) {
    throw std::invalid_argument("features and targets differ in length");
  }
  TrainingBatch batch;
  batch.targets = targets;
  if (v.empty()) return batch;
  batch.inputs.resize(v[0].size(), static_cast<Eigen::Index>(v.size()));
  for (size_t t = 0; t < v.size(); ++t) batch.inputs.col(t) = v[t];
  return batch;
}

Eigen::MatrixXd forward_batch(const NnClassifier& net,
                              const Eigen::MatrixXd& inputs) {
  return log_softmax(activate(net, inputs).logits).array().exp().matrix();
}

Eigen::VectorXd forward(const NnClassifier& net, const Eigen::VectorXd& v) {
  return forward_batch(net, v);
}

double log_likelihood(const NnClassifier& net, const TrainingBatch& batch) {
  check_batch(net, batch);
  const Eigen::MatrixXd logp = log_softmax(activate(net, batch.inputs).logits);
  const double floor = std::log(kProbabilityFloor);
  double total = 0.0;
  for (size_t t = 0; t < batch.size(); ++t) {
    total += std::max(logp(batch.targets[t], t), floor);
  }
  return total;
}

Gradient gradient(const NnClassifier& net, const TrainingBatch& batch) {
  check_batch(net, batch);
  const int d = net.input_dim();
  const int h = net.hidden_units();
  const Activations a = activate(net, batch.inputs);

  // d/d logits of sum_t log softmax = onehot - p.
  Eigen::MatrixXd delta_out = -log_softmax(a.logits).array().exp().matrix();
  for (size_t t = 0; t < batch.size(); ++t) {
    delta_out(batch.targets[t], t) += 1.0;
  }
  Gradient g;
  g.w2.resize(net.w2.rows(), net.w2.cols());
  g.w2.leftCols(h) = delta_out * a.hidden.transpose();
  g.w2.col(h) = delta_out.rowwise().sum();

  const Eigen::MatrixXd delta_hidden =
      ((net.w2.leftCols(h).transpose() * delta_out).array() *
       a.hidden.array() * (1.0 - a.hidden.array()))
          .matrix();
  g.w1.resize(net.w1.rows(), net.w1.cols());
  g.w1.leftCols(d) = delta_hidden * batch.inputs.transpose();
  g.w1.col(d) = delta_hidden.rowwise().sum();
  return g;
}

TrainResult train(const TrainingBatch& data, int num_classes,
                  const TrainOptions& options,
                  const std::function<void(int, double)>& on_epoch) {
  if (data.size() == 0) throw std::invalid_argument("empty training data");
  return train(data,
               NnClassifier::random(static_cast<int>(data.inputs.rows()),
                                    options.hidden_units, num_classes,
                                    options.seed),
               options, on_epoch);
}

TrainResult train(const TrainingBatch& data, NnClassifier initial,
                  const TrainOptions& options,
                  const std::function<void(int, double)>& on_epoch) {
  check_batch(initial, data);
  if (options.batch_size == 0) {
    throw std::invalid_argument("batch size must be positive");
  }
  TrainResult result;
  NnClassifier& net = result.net;
  net = std::move(initial);
  const double n = static_cast<double>(data.size());
  result.epoch_log_likelihood.push_back(log_likelihood(net, data) / n);

  RowMatrix v1 = RowMatrix::Zero(net.w1.rows(), net.w1.cols());
  RowMatrix v2 = RowMatrix::Zero(net.w2.rows(), net.w2.cols());
  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  // Distinct stream from the weight initialization.
  Rng rng(options.seed ^ 0x9e3779b97f4a7c15ULL);

  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    rng.shuffle(order);
    for (size_t start = 0; start < order.size(); start += options.batch_size) {
      const size_t end = std::min(order.size(), start + options.batch_size);
      const std::vector<int> idx(order.begin() + start, order.begin() + end);
      TrainingBatch mini;
      mini.inputs = data.inputs(Eigen::all, idx);
      mini.targets.reserve(idx.size());
      for (int i : idx) mini.targets.push_back(data.targets[i]);

      const Gradient g = gradient(net, mini);
      const double step = options.learning_rate / static_cast<double>(idx.size());
      v1 = options.momentum * v1 + step * g.w1;
      v2 = options.momentum * v2 + step * g.w2;
      net.w1 += v1;
      net.w2 += v2;
    }
    const double ll = log_likelihood(net, data) / n;
    if (!std::isfinite(ll) || !net.w1.allFinite() || !net.w2.allFinite()) {
      throw NumericError("classifier training diverged at epoch " +
                         std::to_string(epoch));
    }
    result.epoch_log_likelihood.push_back(ll);
    if (on_epoch) on_epoch(epoch, ll);
  }
  return result;
}

int argmax(const Eigen::VectorXd& p) {
  int best = 0;
  for (Eigen::Index i = 1; i < p.size(); ++i) {
    if (p[i] > p[best]) best = static_cast<int>(i);
  }
  return best;
}

double classify_accuracy(const NnClassifier& net, const TrainingBatch& batch) {
  check_batch(net, batch);
  const Eigen::MatrixXd p = forward_batch(net, batch.inputs);
  size_t correct = 0;
  for (size_t t = 0; t < batch.size(); ++t) {
    correct += argmax(p.col(t)) == batch.targets[t];
  }
  return static_cast<double>(correct) / static_cast<double>(batch.size());
}

}  // namespace nnmm
