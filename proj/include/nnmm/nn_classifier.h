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

#ifndef NNMM_NN_CLASSIFIER_H_
#define NNMM_NN_CLASSIFIER_H_

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "nnmm/features.h"
#include "nnmm/mog.h"

namespace nnmm {

inline constexpr int kDefaultHiddenUnits = 500;

// One sigmoid hidden layer and a softmax output. The last column of each
// weight matrix holds the bias.
struct NnClassifier {
  RowMatrix w1;  // H x (D + 1)
  RowMatrix w2;  // m x (H + 1)

  int input_dim() const { return static_cast<int>(w1.cols()) - 1; }
  int hidden_units() const { return static_cast<int>(w1.rows()); }
  int num_classes() const { return static_cast<int>(w2.rows()); }

  // Zero weights of the given shape.
  static NnClassifier zeros(int input_dim, int hidden_units, int num_classes);
  // Uniform in +-sqrt(6 / (fan_in + fan_out)) per layer, biases zero.
  static NnClassifier random(int input_dim, int hidden_units, int num_classes,
                             uint64_t seed);

  // Throws DataError on shape mismatch or non-finite weights.
  void validate() const;

  bool operator==(const NnClassifier&) const = default;
};

// Inputs are columns of a D x N matrix.
struct TrainingBatch {
  Eigen::MatrixXd inputs;
  std::vector<int> targets;

  size_t size() const { return targets.size(); }
  static TrainingBatch from_features(const std::vector<StackedFeature>& v,
                                     const std::vector<int>& targets);
};

// Class posteriors for one input vector.
Eigen::VectorXd forward(const NnClassifier& net, const Eigen::VectorXd& v);
// Column-wise posteriors for a D x N input block.
Eigen::MatrixXd forward_batch(const NnClassifier& net,
                              const Eigen::MatrixXd& inputs);

// sum_t ln p(target_t | v_t), each posterior floored at 1e-300.
double log_likelihood(const NnClassifier& net, const TrainingBatch& batch);

struct Gradient {
  RowMatrix w1;
  RowMatrix w2;
};

// Exact gradient of log_likelihood by back-propagation.
Gradient gradient(const NnClassifier& net, const TrainingBatch& batch);

struct TrainOptions {
  int hidden_units = kDefaultHiddenUnits;
  int epochs = 30;
  double learning_rate = 0.1;
  size_t batch_size = 64;
  // 0 disables momentum.
  double momentum = 0.9;
  uint64_t seed = 1;
};

struct TrainResult {
  NnClassifier net;
  // Mean per-sample log-likelihood on the training data: entry 0 before
  // training, then one per epoch.
  std::vector<double> epoch_log_likelihood;
};

// Mini-batch gradient ascent on the mean log-likelihood. Deterministic given
// the seed. Throws NumericError if the likelihood becomes non-finite.
TrainResult train(const TrainingBatch& data, int num_classes,
                  const TrainOptions& options,
                  const std::function<void(int, double)>& on_epoch = {});

// Continues training an existing network.
TrainResult train(const TrainingBatch& data, NnClassifier initial,
                  const TrainOptions& options,
                  const std::function<void(int, double)>& on_epoch = {});

// Fraction of samples whose argmax posterior (lowest index on ties) equals
// the target.
double classify_accuracy(const NnClassifier& net, const TrainingBatch& batch);

// Index of the largest entry, lowest index on ties.
int argmax(const Eigen::VectorXd& p);

}  // namespace nnmm

#endif  // NNMM_NN_CLASSIFIER_H_
