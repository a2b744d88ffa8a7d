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

#include "floss/model.h"

#include <cmath>

#include "absl/strings/str_cat.h"

namespace floss {
namespace {

absl::Status CheckConforming(const ModelParams& params, const Dataset& data) {
  if (data.size() == 0) return absl::InvalidArgumentError("empty dataset");
  if (data.features.rows() != data.labels.size()) {
    return absl::InvalidArgumentError("feature rows and labels differ");
  }
  if (params.feature_dim() != data.dim()) {
    return absl::InvalidArgumentError(
        absl::StrCat("model expects ", params.feature_dim(),
                     " features, data has ", data.dim()));
  }
  return absl::OkStatus();
}

}  // namespace

absl::Status DpConfig::Validate() const {
  if (!(clip_norm > 0)) {
    return absl::InvalidArgumentError("dp.clip_norm must be positive");
  }
  if (!(noise_sigma >= 0) || !std::isfinite(noise_sigma)) {
    return absl::InvalidArgumentError("dp.noise_sigma must be >= 0");
  }
  if (noise_sigma > 0 && std::isinf(clip_norm)) {
    return absl::InvalidArgumentError(
        "dp.noise_sigma > 0 needs a finite dp.clip_norm (noise scale is "
        "sigma * clip_norm)");
  }
  return absl::OkStatus();
}

absl::Status TrainConfig::Validate() const {
  if (!(eta > 0) || !std::isfinite(eta)) {
    return absl::InvalidArgumentError("train.eta must be positive");
  }
  if (k < 1) return absl::InvalidArgumentError("train.k must be >= 1");
  if (max_iterations < 1) {
    return absl::InvalidArgumentError("train.max_iterations must be >= 1");
  }
  if (!(straggler_cutoff > 0)) {
    return absl::InvalidArgumentError("train.straggler_cutoff must be > 0");
  }
  if (rounds < 1) return absl::InvalidArgumentError("train.rounds must be >= 1");
  return absl::OkStatus();
}

double Expit(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double Softplus(double t) {
  return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

absl::StatusOr<double> Predict(const ModelParams& params,
                               const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != params.feature_dim()) {
    return absl::InvalidArgumentError(
        absl::StrCat("model expects ", params.feature_dim(),
                     " features, got ", x.size()));
  }
  return Expit(params.theta[0] + params.theta.tail(x.size()).dot(x));
}

absl::StatusOr<double> LocalLoss(const ModelParams& params,
                                 const Dataset& data) {
  if (absl::Status s = CheckConforming(params, data); !s.ok()) return s;
  const Eigen::VectorXd logits =
      (data.features * params.theta.tail(data.dim())).array() +
      params.theta[0];
  double total = 0.0;
  for (int i = 0; i < data.size(); ++i) {
    total += Softplus(logits[i]) - data.labels[i] * logits[i];
  }
  return total / data.size();
}

absl::StatusOr<Eigen::VectorXd> LocalGradient(const ModelParams& params,
                                              const Dataset& data) {
  if (absl::Status s = CheckConforming(params, data); !s.ok()) return s;
  const Eigen::VectorXd logits =
      (data.features * params.theta.tail(data.dim())).array() +
      params.theta[0];
  Eigen::VectorXd residual(data.size());
  for (int i = 0; i < data.size(); ++i) {
    residual[i] = Expit(logits[i]) - data.labels[i];
  }
  Eigen::VectorXd grad(params.dim());
  grad[0] = residual.sum();
  grad.tail(data.dim()) = data.features.transpose() * residual;
  return grad / data.size();
}

Eigen::VectorXd Privatize(const Eigen::VectorXd& gradient, const DpConfig& dp,
                          Rng& rng) {
  Eigen::VectorXd out = gradient;
  const double norm = out.norm();
  if (norm > dp.clip_norm) out *= dp.clip_norm / norm;
  if (dp.noise_sigma > 0) {
    const double scale = dp.noise_sigma * dp.clip_norm;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      out[i] += scale * rng.Gaussian();
    }
  }
  return out;
}

absl::StatusOr<Eigen::VectorXd> Aggregate(
    std::span<const Eigen::VectorXd> gradients) {
  if (gradients.empty()) {
    return absl::FailedPreconditionError("no gradients to aggregate");
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(gradients.front().size());
  for (const Eigen::VectorXd& g : gradients) {
    if (g.size() != sum.size()) {
      return absl::InvalidArgumentError("gradients have different dimensions");
    }
    sum += g;
  }
  return sum / static_cast<double>(gradients.size());
}

absl::StatusOr<ModelParams> SgdStep(const ModelParams& params,
                                    const Eigen::VectorXd& mean_gradient,
                                    double eta) {
  if (mean_gradient.size() != params.dim()) {
    return absl::InvalidArgumentError(
        absl::StrCat("gradient has dimension ", mean_gradient.size(),
                     ", model has ", params.dim()));
  }
  if (!mean_gradient.allFinite()) {
    return absl::InvalidArgumentError("non-finite aggregated gradient");
  }
  return ModelParams{params.theta - eta * mean_gradient};
}

absl::StatusOr<double> EvaluateAccuracy(const ModelParams& params,
                                        const Dataset& test_set) {
  if (test_set.size() == 0) return absl::InvalidArgumentError("empty test set");
  if (params.feature_dim() != test_set.dim()) {
    return absl::InvalidArgumentError("test set dimension mismatch");
  }
  int correct = 0;
  for (int i = 0; i < test_set.size(); ++i) {
    const double p =
        Expit(params.theta[0] +
              params.theta.tail(test_set.dim()).dot(test_set.features.row(i)));
    const int predicted = p >= 0.5 ? 1 : 0;
    if (predicted == static_cast<int>(test_set.labels[i])) ++correct;
  }
  return static_cast<double>(correct) / test_set.size();
}

}  // namespace floss
