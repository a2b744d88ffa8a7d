// Copyright 2026 The floss Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FLOSS_MODEL_H_
#define FLOSS_MODEL_H_

#include <limits>
#include <span>

#include <Eigen/Dense>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "floss/rng.h"

namespace floss {

// Samples stored row-wise; labels are 0 or 1.
struct Dataset {
  Eigen::MatrixXd features;
  Eigen::VectorXd labels;

  int size() const { return static_cast<int>(labels.size()); }
  int dim() const { return static_cast<int>(features.cols()); }
};

// Weights of the logistic model h(x) = expit(theta[0] + theta[1:] . x).
struct ModelParams {
  Eigen::VectorXd theta;

  static ModelParams Zero(int feature_dim) {
    return {Eigen::VectorXd::Zero(feature_dim + 1)};
  }
  int dim() const { return static_cast<int>(theta.size()); }
  int feature_dim() const { return dim() - 1; }
};

// Per-upload clipping and Gaussian noise. The defaults disable both.
struct DpConfig {
  double clip_norm = std::numeric_limits<double>::infinity();
  double noise_sigma = 0.0;

  absl::Status Validate() const;
};

struct TrainConfig {
  double eta = 0.5;
  int k = 32;               // clients sampled per iteration
  int max_iterations = 25;  // SGD iterations per round
  double straggler_cutoff = 2.5;
  int rounds = 20;

  absl::Status Validate() const;
};

// Numerically stable logistic function.
double Expit(double t);

// log(1 + exp(t)) without overflow.
double Softplus(double t);

absl::StatusOr<double> Predict(const ModelParams& params,
                               const Eigen::Ref<const Eigen::VectorXd>& x);

// Mean binary cross-entropy over the dataset.
absl::StatusOr<double> LocalLoss(const ModelParams& params,
                                 const Dataset& data);

// Exact gradient of LocalLoss with respect to theta.
absl::StatusOr<Eigen::VectorXd> LocalGradient(const ModelParams& params,
                                              const Dataset& data);

// Scales `gradient` to norm at most dp.clip_norm, then adds N(0, (sigma*C)^2)
// noise to every coordinate.
Eigen::VectorXd Privatize(const Eigen::VectorXd& gradient, const DpConfig& dp,
                          Rng& rng);

// Arithmetic mean, summed in list order.
absl::StatusOr<Eigen::VectorXd> Aggregate(
    std::span<const Eigen::VectorXd> gradients);

// theta - eta * mean_gradient.
absl::StatusOr<ModelParams> SgdStep(const ModelParams& params,
                                    const Eigen::VectorXd& mean_gradient,
                                    double eta);

// Fraction of samples where (Predict >= 0.5) matches the label.
absl::StatusOr<double> EvaluateAccuracy(const ModelParams& params,
                                        const Dataset& test_set);

}  // namespace floss

#endif  // FLOSS_MODEL_H_
