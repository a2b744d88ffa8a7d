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

#include "floss/orchestrator.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "floss/status_macros.h"

namespace floss {
namespace {

enum StreamLabel : uint64_t {
  kPromptStream = 1,
  kSamplingStream = 2,
  kLatencyStream = 3,
  kNoiseStream = 4,
};

struct Candidates {
  std::vector<int> index;  // into population.users
  std::vector<double> weight;
};

// Candidate set and sampling weights for this round.
absl::StatusOr<Candidates> BuildCandidates(const Population& population,
                                           const SimulationSettings& settings,
                                           RoundLog& log) {
  Candidates c;
  const std::vector<UserRecord>& users = population.users;
  if (settings.mode == Mode::kFullParticipation) {
    c.index.resize(users.size());
    std::iota(c.index.begin(), c.index.end(), 0);
    c.weight.assign(users.size(), 1.0);
    return c;
  }
  for (int i = 0; i < static_cast<int>(users.size()); ++i) {
    if (users[i].r == 1) c.index.push_back(i);
  }
  if (c.index.empty()) {
    return absl::FailedPreconditionError(
        absl::StrCat("round ", log.round, ": no responsive users"));
  }
  c.weight.assign(c.index.size(), 1.0);

  switch (settings.mode) {
    case Mode::kUncorrectedMnar:
    case Mode::kFullParticipation:
      break;
    case Mode::kOracleCorrection: {
      FLOSS_ASSIGN_OR_RETURN(WeightTable table,
                             OracleWeights(users, settings.weight_cap));
      c.weight = std::move(table.weights);
      log.weights_clipped = table.clipped;
      break;
    }
    case Mode::kFlossCorrection: {
      const int dim_d = population.config.dim_d;
      absl::StatusOr<PropensityFit> fit = SolveShadowEquations(
          users, PropensityBasis::Default(dim_d),
          Eigen::VectorXd::Zero(dim_d + 2), settings.solver);
      if (!fit.ok()) {
        log.uniform_fallback = true;
        log.fallback_reason = std::string(fit.status().message());
        break;
      }
      log.propensity = *fit;
      if (!fit->converged) {
        log.uniform_fallback = true;
        log.fallback_reason = absl::StrCat(
            "propensity solver did not converge (residual ",
            fit->final_residual_norm, ")");
        break;
      }
      absl::StatusOr<WeightTable> table =
          ComputeWeights(*fit, users, settings.weight_cap);
      if (!table.ok()) {
        log.uniform_fallback = true;
        log.fallback_reason = std::string(table.status().message());
        break;
      }
      c.weight = std::move(table->weights);
      log.weights_clipped = table->clipped;
      break;
    }
  }
  return c;
}

}  // namespace

absl::string_view ModeName(Mode mode) {
  switch (mode) {
    case Mode::kFullParticipation:
      return "full";
    case Mode::kUncorrectedMnar:
      return "uncorrected";
    case Mode::kOracleCorrection:
      return "oracle";
    case Mode::kFlossCorrection:
      return "floss";
  }
  return "unknown";
}

absl::StatusOr<Mode> ParseMode(absl::string_view name) {
  for (Mode m : AllModes()) {
    if (ModeName(m) == name) return m;
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown mode '", name, "' (expected full, uncorrected, oracle, floss)"));
}

std::vector<Mode> AllModes() {
  return {Mode::kFullParticipation, Mode::kUncorrectedMnar,
          Mode::kOracleCorrection, Mode::kFlossCorrection};
}

absl::Status SimulationSettings::Validate() const {
  FLOSS_RETURN_IF_ERROR(train.Validate());
  FLOSS_RETURN_IF_ERROR(dp.Validate());
  if (!(solver.tol > 0)) {
    return absl::InvalidArgumentError("propensity.tol must be positive");
  }
  if (solver.max_iter < 1) {
    return absl::InvalidArgumentError("propensity.max_iter must be >= 1");
  }
  if (!(weight_cap >= 1) || !std::isfinite(weight_cap)) {
    return absl::InvalidArgumentError(
        "propensity.weight_cap must be finite and >= 1");
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<int>> WeightedSample(
    const std::vector<int>& candidates, const std::vector<double>& weights,
    int k, Rng& rng) {
  if (candidates.empty()) {
    return absl::InvalidArgumentError("no candidates to sample from");
  }
  if (weights.size() != candidates.size()) {
    return absl::InvalidArgumentError("one weight per candidate required");
  }
  if (k < 0) return absl::InvalidArgumentError("negative sample size");
  std::vector<double> cumulative(weights.size());
  double total = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0) || !std::isfinite(weights[i])) {
      return absl::InvalidArgumentError(
          absl::StrCat("weight ", i, " is not positive and finite"));
    }
    total += weights[i];
    cumulative[i] = total;
  }
  std::vector<int> out;
  out.reserve(k);
  for (int j = 0; j < k; ++j) {
    const double u = rng.Uniform() * total;
    size_t pos = std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                 cumulative.begin();
    pos = std::min(pos, cumulative.size() - 1);
    out.push_back(candidates[pos]);
  }
  return out;
}

absl::StatusOr<RoundResult> RunRound(Population& population,
                                     const ModelParams& params,
                                     const SimulationSettings& settings,
                                     const Dataset& test_set, int round,
                                     uint64_t round_seed) {
  if (population.users.empty()) {
    return absl::InvalidArgumentError("empty population");
  }
  Rng prompt_rng(DeriveSeed(round_seed, {kPromptStream}));
  Rng sampling_rng(DeriveSeed(round_seed, {kSamplingStream}));
  Rng latency_rng(DeriveSeed(round_seed, {kLatencyStream}));
  Rng noise_rng(DeriveSeed(round_seed, {kNoiseStream}));

  RoundResult result;
  RoundLog& log = result.log;
  log.round = round;
  log.mode = settings.mode;
  log.n_users = population.size();

  FLOSS_RETURN_IF_ERROR(RefreshRoundState(population, params, prompt_rng));
  for (const UserRecord& u : population.users) log.m_responsive += u.r;

  FLOSS_ASSIGN_OR_RETURN(Candidates candidates,
                         BuildCandidates(population, settings, log));

  const bool timeouts = settings.mode != Mode::kFullParticipation;
  ModelParams current = params;
  double norm_sum = 0.0;
  int updates = 0;
  for (int it = 0; it < settings.train.max_iterations; ++it) {
    IterationLog iter;
    FLOSS_ASSIGN_OR_RETURN(
        iter.sampled, WeightedSample(candidates.index, candidates.weight,
                                     settings.train.k, sampling_rng));
    std::vector<Eigen::VectorXd> received;
    received.reserve(iter.sampled.size());
    for (int idx : iter.sampled) {
      const UserRecord& user = population.users[idx];
      FLOSS_ASSIGN_OR_RETURN(Eigen::VectorXd g,
                             LocalGradient(current, user.dataset));
      g = Privatize(g, settings.dp, noise_rng);
      // Latency is drawn in every mode so all modes consume the same streams.
      const double latency = DrawLatency(user, latency_rng);
      if (timeouts && latency > settings.train.straggler_cutoff) {
        iter.dropped.push_back(user.id);
        continue;
      }
      received.push_back(std::move(g));
    }
    for (int& idx : iter.sampled) idx = population.users[idx].id;
    log.stragglers_dropped += static_cast<int>(iter.dropped.size());
    if (received.empty()) {
      iter.skipped = true;
      ++log.skipped_iterations;
      log.iterations.push_back(std::move(iter));
      continue;
    }
    FLOSS_ASSIGN_OR_RETURN(Eigen::VectorXd g_bar, Aggregate(received));
    iter.gradient_norm = g_bar.norm();
    norm_sum += iter.gradient_norm;
    ++updates;
    FLOSS_ASSIGN_OR_RETURN(current,
                           SgdStep(current, g_bar, settings.train.eta));
    log.iterations.push_back(std::move(iter));
  }
  log.mean_gradient_norm = updates > 0 ? norm_sum / updates : 0.0;

  FLOSS_ASSIGN_OR_RETURN(log.accuracy, EvaluateAccuracy(current, test_set));
  FLOSS_ASSIGN_OR_RETURN(RiskGap gap, EmpiricalRiskGap(population, current));
  log.full_risk = gap.full_risk;
  log.observed_risk = gap.observed_risk;
  result.params = std::move(current);
  return result;
}

absl::StatusOr<SimulationResult> RunSimulation(
    Population population, const SimulationSettings& settings,
    const Dataset& test_set, uint64_t seed) {
  FLOSS_RETURN_IF_ERROR(settings.Validate());
  SimulationResult result;
  result.params = ModelParams::Zero(population.config.dim_x);
  for (int t = 0; t < settings.train.rounds; ++t) {
    FLOSS_ASSIGN_OR_RETURN(
        RoundResult r,
        RunRound(population, result.params, settings, test_set, t,
                 DeriveSeed(seed, {static_cast<uint64_t>(t)})));
    result.params = std::move(r.params);
    result.rounds.push_back(std::move(r.log));
  }
  return result;
}

absl::StatusOr<Eigen::VectorXd> PerUserLoss(const Population& population,
                                            const ModelParams& params) {
  Eigen::VectorXd loss(population.size());
  for (int i = 0; i < population.size(); ++i) {
    FLOSS_ASSIGN_OR_RETURN(loss[i],
                           LocalLoss(params, population.users[i].dataset));
  }
  return loss;
}

absl::StatusOr<RiskGap> EmpiricalRiskGap(const Population& population,
                                         const ModelParams& params) {
  if (population.users.empty()) {
    return absl::InvalidArgumentError("empty population");
  }
  FLOSS_ASSIGN_OR_RETURN(Eigen::VectorXd loss, PerUserLoss(population, params));
  RiskGap gap;
  double observed_sum = 0.0;
  for (int i = 0; i < population.size(); ++i) {
    if (population.users[i].r == 1) {
      observed_sum += loss[i];
      ++gap.observed;
    }
  }
  gap.full_risk = loss.mean();
  gap.observed_risk =
      gap.observed > 0 ? observed_sum / gap.observed : std::nan("");
  return gap;
}

absl::StatusOr<double> WeightedObservedRisk(const Population& population,
                                            const ModelParams& params,
                                            const WeightTable& weights) {
  if (population.users.empty()) {
    return absl::InvalidArgumentError("empty population");
  }
  std::vector<int> by_id_index(population.size(), -1);
  for (int i = 0; i < population.size(); ++i) {
    const int id = population.users[i].id;
    if (id < 0 || id >= population.size()) {
      return absl::InvalidArgumentError("user ids must be 0..n-1");
    }
    by_id_index[id] = i;
  }
  double sum = 0.0;
  for (size_t j = 0; j < weights.user_ids.size(); ++j) {
    const int id = weights.user_ids[j];
    if (id < 0 || id >= population.size() || by_id_index[id] < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("weight table names unknown user ", id));
    }
    FLOSS_ASSIGN_OR_RETURN(
        double loss,
        LocalLoss(params, population.users[by_id_index[id]].dataset));
    sum += weights.weights[j] * loss;
  }
  return sum / population.size();
}

}  // namespace floss
