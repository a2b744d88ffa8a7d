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

#include "floss/synth.h"

#include <cmath>
#include <utility>

#include "absl/strings/str_cat.h"
#include "floss/status_macros.h"

namespace floss {
namespace {

absl::Status CheckSize(const Eigen::VectorXd& v, int expected,
                       absl::string_view field) {
  if (v.size() != expected) {
    return absl::InvalidArgumentError(
        absl::StrCat("population.", field, " has ", v.size(),
                     " entries, expected ", expected));
  }
  if (!v.allFinite()) {
    return absl::InvalidArgumentError(
        absl::StrCat("population.", field, " has non-finite entries"));
  }
  return absl::OkStatus();
}

absl::Status CheckNonNegative(double v, absl::string_view field) {
  if (!(v >= 0) || !std::isfinite(v)) {
    return absl::InvalidArgumentError(
        absl::StrCat("population.", field, " must be finite and >= 0"));
  }
  return absl::OkStatus();
}

// Draws S, s_responded and R for one user. Consumes exactly three variates
// regardless of the outcome.
absl::Status DrawRoundState(const PopulationConfig& cfg,
                            const ModelParams& params, UserRecord& user,
                            Rng& rng) {
  FLOSS_ASSIGN_OR_RETURN(double loss, LocalLoss(params, user.dataset));
  const double mean_y = user.dataset.labels.mean();
  const Eigen::VectorXd mean_x = user.dataset.features.colwise().mean();
  const double noise = rng.Gaussian();
  const bool skips_prompt = rng.Bernoulli(cfg.s_nonresponse);
  const double u = rng.Uniform();

  user.satisfaction = cfg.s_intercept - cfg.s_on_loss * loss +
                      cfg.s_on_y * mean_y + cfg.s_on_x.dot(mean_x) +
                      cfg.s_on_d.dot(user.d_rest) + cfg.s_noise * noise;
  user.true_pi = Expit(cfg.r_intercept + cfg.r_on_d.dot(user.d_rest) +
                       cfg.r_on_s * user.satisfaction);
  user.r = u < user.true_pi ? 1 : 0;
  // Unresponsive devices never answer the satisfaction prompt.
  user.s_responded = user.r == 1 && !skips_prompt;
  user.s = user.s_responded ? std::optional<double>(user.satisfaction)
                            : std::nullopt;
  return absl::OkStatus();
}

}  // namespace

PopulationConfig PopulationConfig::Default() {
  PopulationConfig c;
  c.true_theta = Eigen::Vector3d(0.0, 1.0, -0.5);
  c.z_on_d = Eigen::VectorXd::Constant(1, 0.3);
  c.x_on_z = Eigen::Vector2d(1.5, 0.0);
  c.x_on_d = Eigen::MatrixXd(2, 1);
  c.x_on_d << 0.3, 0.0;
  c.s_on_x = Eigen::Vector2d(0.1, 0.0);
  c.s_on_d = Eigen::VectorXd::Constant(1, 0.1);
  c.r_on_d = Eigen::VectorXd::Constant(1, 0.2);
  c.latency_on_d = Eigen::VectorXd::Constant(1, 0.2);
  return c;
}

absl::Status PopulationConfig::Validate() const {
  if (n_users < 1) return absl::InvalidArgumentError("population.n_users must be >= 1");
  if (dim_d < 1) return absl::InvalidArgumentError("population.dim_d must be >= 1");
  if (dim_x < 1) return absl::InvalidArgumentError("population.dim_x must be >= 1");
  if (samples_per_user < 1) {
    return absl::InvalidArgumentError(
        "population.samples_per_user must be >= 1");
  }
  FLOSS_RETURN_IF_ERROR(CheckSize(true_theta, dim_x + 1, "true_theta"));
  FLOSS_RETURN_IF_ERROR(CheckSize(z_on_d, dim_d, "z_on_d"));
  FLOSS_RETURN_IF_ERROR(CheckSize(x_on_z, dim_x, "x_on_z"));
  if (x_on_d.rows() != dim_x || x_on_d.cols() != dim_d) {
    return absl::InvalidArgumentError(absl::StrCat(
        "population.x_on_d is ", x_on_d.rows(), "x", x_on_d.cols(),
        ", expected ", dim_x, "x", dim_d));
  }
  if (!x_on_d.allFinite()) {
    return absl::InvalidArgumentError("population.x_on_d has non-finite entries");
  }
  FLOSS_RETURN_IF_ERROR(CheckSize(s_on_x, dim_x, "s_on_x"));
  FLOSS_RETURN_IF_ERROR(CheckSize(s_on_d, dim_d, "s_on_d"));
  FLOSS_RETURN_IF_ERROR(CheckSize(r_on_d, dim_d, "r_on_d"));
  FLOSS_RETURN_IF_ERROR(CheckSize(latency_on_d, dim_d, "latency_on_d"));
  FLOSS_RETURN_IF_ERROR(CheckNonNegative(z_noise, "z_noise"));
  FLOSS_RETURN_IF_ERROR(CheckNonNegative(x_noise, "x_noise"));
  FLOSS_RETURN_IF_ERROR(CheckNonNegative(s_noise, "s_noise"));
  FLOSS_RETURN_IF_ERROR(CheckNonNegative(latency_scale, "latency_scale"));
  if (!(s_nonresponse >= 0 && s_nonresponse <= 1)) {
    return absl::InvalidArgumentError(
        "population.s_nonresponse must lie in [0, 1]");
  }
  for (double v : {s_intercept, s_on_loss, s_on_y, r_intercept, r_on_s,
                   latency_location}) {
    if (!std::isfinite(v)) {
      return absl::InvalidArgumentError(
          "population has a non-finite scalar coefficient");
    }
  }
  return absl::OkStatus();
}

Eigen::VectorXd PopulationConfig::TruePropensityCoefficients() const {
  Eigen::VectorXd beta(dim_d + 2);
  beta[0] = r_intercept;
  beta.segment(1, dim_d) = r_on_d;
  beta[dim_d + 1] = r_on_s;
  return beta;
}

absl::StatusOr<Population> GeneratePopulation(const PopulationConfig& config) {
  FLOSS_RETURN_IF_ERROR(config.Validate());
  Population pop;
  pop.config = config;
  pop.users.resize(config.n_users);
  Rng rng(config.seed);
  for (int id = 0; id < config.n_users; ++id) {
    UserRecord& u = pop.users[id];
    u.id = id;
    u.d_rest.resize(config.dim_d);
    for (int j = 0; j < config.dim_d; ++j) u.d_rest[j] = rng.Gaussian();
    u.z = config.z_on_d.dot(u.d_rest) + config.z_noise * rng.Gaussian();
    const Eigen::VectorXd mu = config.x_on_z * u.z + config.x_on_d * u.d_rest;

    u.dataset.features.resize(config.samples_per_user, config.dim_x);
    u.dataset.labels.resize(config.samples_per_user);
    for (int i = 0; i < config.samples_per_user; ++i) {
      for (int j = 0; j < config.dim_x; ++j) {
        u.dataset.features(i, j) = mu[j] + config.x_noise * rng.Gaussian();
      }
      const double p =
          Expit(config.true_theta[0] +
                config.true_theta.tail(config.dim_x).dot(
                    u.dataset.features.row(i).transpose()));
      u.dataset.labels[i] = rng.Bernoulli(p) ? 1.0 : 0.0;
    }
    u.latency.location =
        config.latency_location + config.latency_on_d.dot(u.d_rest);
    u.latency.scale = config.latency_scale;
  }
  FLOSS_RETURN_IF_ERROR(
      RefreshRoundState(pop, ModelParams::Zero(config.dim_x), rng));
  return pop;
}

absl::Status RefreshRoundState(Population& population,
                               const ModelParams& params, Rng& rng) {
  if (params.feature_dim() != population.config.dim_x) {
    return absl::InvalidArgumentError(
        absl::StrCat("model has ", params.feature_dim(),
                     " features, population has ", population.config.dim_x));
  }
  for (UserRecord& u : population.users) {
    FLOSS_RETURN_IF_ERROR(DrawRoundState(population.config, params, u, rng));
  }
  return absl::OkStatus();
}

double DrawLatency(const UserRecord& user, Rng& rng) {
  return std::exp(user.latency.location + user.latency.scale * rng.Gaussian());
}

Dataset PoolDatasets(const std::vector<UserRecord>& users) {
  Dataset pooled;
  if (users.empty()) return pooled;
  int rows = 0;
  for (const UserRecord& u : users) rows += u.dataset.size();
  const int dim = users.front().dataset.dim();
  pooled.features.resize(rows, dim);
  pooled.labels.resize(rows);
  int offset = 0;
  for (const UserRecord& u : users) {
    pooled.features.middleRows(offset, u.dataset.size()) = u.dataset.features;
    pooled.labels.segment(offset, u.dataset.size()) = u.dataset.labels;
    offset += u.dataset.size();
  }
  return pooled;
}

absl::StatusOr<Dataset> GenerateTestSet(const PopulationConfig& config,
                                        int n_users, uint64_t seed) {
  PopulationConfig held_out = config;
  held_out.n_users = n_users;
  held_out.seed = seed;
  FLOSS_ASSIGN_OR_RETURN(Population pop, GeneratePopulation(held_out));
  return PoolDatasets(pop.users);
}

}  // namespace floss
