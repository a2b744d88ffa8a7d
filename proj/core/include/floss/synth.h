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

#ifndef FLOSS_SYNTH_H_
#define FLOSS_SYNTH_H_

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "floss/model.h"
#include "floss/rng.h"

namespace floss {

// Structural equations for a simulated client population. Per user:
//
//   D' ~ N(0, I)                                    (dim_d)
//   Z  = z_on_d . D' + z_noise * e
//   mu = x_on_z * Z + x_on_d * D'                   (dim_x, per user)
//   X  = mu + x_noise * e                           (per sample)
//   Y  ~ Bernoulli(expit(true_theta . [1, X]))      (per sample)
//
// and, every round, given the broadcast model theta:
//
//   S  = s_intercept - s_on_loss * loss_theta(X, Y) + s_on_y * mean(Y)
//        + s_on_x . mean(X) + s_on_d . D' + s_noise * e
//   R  ~ Bernoulli(expit(r_intercept + r_on_d . D' + r_on_s * S))
//
// R has no direct dependence on X, Y or Z, so Z is a valid shadow variable
// for the propensity p(R = 1 | D', S).
struct PopulationConfig {
  int n_users = 1000;
  int dim_d = 1;
  int dim_x = 2;
  int samples_per_user = 2;
  Eigen::VectorXd true_theta;  // dim_x + 1, intercept first

  Eigen::VectorXd z_on_d;
  double z_noise = 1.0;

  Eigen::VectorXd x_on_z;
  Eigen::MatrixXd x_on_d;  // dim_x x dim_d
  double x_noise = 0.5;

  double s_intercept = -2.0;
  double s_on_loss = 0.25;
  double s_on_y = 4.0;
  Eigen::VectorXd s_on_x;
  Eigen::VectorXd s_on_d;
  double s_noise = 0.1;
  // Probability that a responsive user skips the satisfaction prompt.
  double s_nonresponse = 0.0;

  double r_intercept = 0.75;
  Eigen::VectorXd r_on_d;
  double r_on_s = 1.0;

  // Round-trip delay ~ exp(latency_location + latency_on_d . D' +
  // latency_scale * e).
  double latency_location = 0.0;
  Eigen::VectorXd latency_on_d;
  double latency_scale = 0.5;

  uint64_t seed = 1;

  // The shipped MNAR configuration.
  static PopulationConfig Default();

  absl::Status Validate() const;

  // (r_intercept, r_on_d..., r_on_s): the coefficients a correctly specified
  // propensity fit should recover.
  Eigen::VectorXd TruePropensityCoefficients() const;
};

struct LatencyProfile {
  double location = 0.0;
  double scale = 0.0;
};

struct UserRecord {
  int id = 0;
  Eigen::VectorXd d_rest;
  double z = 0.0;
  Dataset dataset;
  // Satisfaction as generated this round. Simulator-side truth; the server
  // only ever sees `s`.
  double satisfaction = 0.0;
  // Recorded satisfaction; present iff s_responded.
  std::optional<double> s;
  bool s_responded = false;
  int r = 0;
  LatencyProfile latency;
  // p(R = 1 | D', S) used for this round's draw of r.
  double true_pi = 1.0;
};

struct Population {
  PopulationConfig config;
  std::vector<UserRecord> users;

  int size() const { return static_cast<int>(users.size()); }
};

// Deterministic in config.seed. Round state (S, R, true_pi) is initialised
// for the zero model that the server broadcasts first.
absl::StatusOr<Population> GeneratePopulation(const PopulationConfig& config);

// Re-prompts every user for participation and satisfaction under the current
// model: redraws S, s_responded and R and updates true_pi.
absl::Status RefreshRoundState(Population& population,
                               const ModelParams& params, Rng& rng);

// One log-normal round-trip delay for `user`.
double DrawLatency(const UserRecord& user, Rng& rng);

// All users' samples stacked in id order.
Dataset PoolDatasets(const std::vector<UserRecord>& users);

// A held-out population drawn from `config` (with `n_users` users and the
// given seed), pooled into one evaluation set.
absl::StatusOr<Dataset> GenerateTestSet(const PopulationConfig& config,
                                        int n_users, uint64_t seed);

}  // namespace floss

#endif  // FLOSS_SYNTH_H_
