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

#ifndef FLOSS_ORCHESTRATOR_H_
#define FLOSS_ORCHESTRATOR_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "floss/model.h"
#include "floss/propensity.h"
#include "floss/rng.h"
#include "floss/synth.h"

namespace floss {

enum class Mode {
  kFullParticipation,
  kUncorrectedMnar,
  kOracleCorrection,
  kFlossCorrection,
};

// "full", "uncorrected", "oracle", "floss".
absl::string_view ModeName(Mode mode);
absl::StatusOr<Mode> ParseMode(absl::string_view name);
std::vector<Mode> AllModes();

struct SimulationSettings {
  Mode mode = Mode::kFlossCorrection;
  TrainConfig train;
  DpConfig dp;
  SolverOptions solver;
  double weight_cap = 50.0;

  absl::Status Validate() const;
};

struct IterationLog {
  std::vector<int> sampled;
  std::vector<int> dropped;  // stragglers among `sampled`
  bool skipped = false;      // every sampled user straggled
  double gradient_norm = 0.0;
};

struct RoundLog {
  int round = 0;
  Mode mode = Mode::kFullParticipation;
  int n_users = 0;
  int m_responsive = 0;

  // Floss mode only.
  std::optional<PropensityFit> propensity;
  // Floss mode could not produce weights and sampled U_R uniformly.
  bool uniform_fallback = false;
  std::string fallback_reason;
  int weights_clipped = 0;

  std::vector<IterationLog> iterations;
  int skipped_iterations = 0;
  int stragglers_dropped = 0;
  double mean_gradient_norm = 0.0;

  double accuracy = 0.0;
  double full_risk = 0.0;
  double observed_risk = 0.0;
};

struct RoundResult {
  ModelParams params;
  RoundLog log;
};

// Draws k candidates with replacement, each with probability proportional to
// its weight.
absl::StatusOr<std::vector<int>> WeightedSample(
    const std::vector<int>& candidates, const std::vector<double>& weights,
    int k, Rng& rng);

// One round of the protocol: prompt, (Floss) propensity solve, then
// max_iterations rounds of sample / local gradient / privatize / timeout /
// aggregate / step. Independent RNG streams for the prompt, sampling,
// latency and DP noise are derived from `round_seed`.
absl::StatusOr<RoundResult> RunRound(Population& population,
                                     const ModelParams& params,
                                     const SimulationSettings& settings,
                                     const Dataset& test_set, int round,
                                     uint64_t round_seed);

struct SimulationResult {
  ModelParams params;
  std::vector<RoundLog> rounds;
};

// `train.rounds` rounds from the zero model.
absl::StatusOr<SimulationResult> RunSimulation(
    Population population, const SimulationSettings& settings,
    const Dataset& test_set, uint64_t seed);

// Mean local loss of each user at `params`.
absl::StatusOr<Eigen::VectorXd> PerUserLoss(const Population& population,
                                            const ModelParams& params);

struct RiskGap {
  double observed_risk = 0.0;  // mean over R = 1 users
  double full_risk = 0.0;      // mean over everyone
  int observed = 0;
};

absl::StatusOr<RiskGap> EmpiricalRiskGap(const Population& population,
                                         const ModelParams& params);

// sum_{R=1} w_u * L_u / n.
absl::StatusOr<double> WeightedObservedRisk(const Population& population,
                                            const ModelParams& params,
                                            const WeightTable& weights);

}  // namespace floss

#endif  // FLOSS_ORCHESTRATOR_H_
