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

#ifndef FLOSS_EXPERIMENT_H_
#define FLOSS_EXPERIMENT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "floss/mdag.h"
#include "floss/orchestrator.h"
#include "floss/synth.h"

namespace floss {

// Experiment configuration. The text form is one `section.key = value` per
// line, `#` starts a comment, and blank lines are ignored. Sections are
// population, train, dp, propensity and experiment. Vectors are
// comma-separated; the dim_x x dim_d matrix population.x_on_d lists rows
// separated by `;`. Keys not given keep their defaults. Each key may appear
// at most once.
struct ExperimentConfig {
  PopulationConfig population;
  TrainConfig train;
  DpConfig dp;
  SolverOptions solver;
  double weight_cap = 50.0;

  std::vector<Mode> modes;
  std::vector<int> client_counts;
  std::vector<uint64_t> seeds;
  int test_users = 2000;
  std::string output = "sweep.csv";

  static ExperimentConfig Default();

  absl::Status Validate() const;
  SimulationSettings Settings(Mode mode) const;
};

absl::StatusOr<ExperimentConfig> ParseExperimentConfig(absl::string_view text);
std::string SerializeExperimentConfig(const ExperimentConfig& config);
absl::StatusOr<ExperimentConfig> LoadExperimentConfig(const std::string& path);

// Per-cell seeds. The population and simulation seeds depend on (seed, n)
// only, so every mode sees the same clients and the same random streams.
uint64_t PopulationSeed(uint64_t seed, int n_clients);
uint64_t SimulationSeed(uint64_t seed, int n_clients);
// Seed of the held-out test population, derived under its own label.
uint64_t TestSetSeed(uint64_t seed);

struct ResultRow {
  Mode mode = Mode::kFullParticipation;
  int n_clients = 0;
  uint64_t seed = 0;
  int round = 0;
  double accuracy = 0.0;
  double full_risk = 0.0;
  double observed_risk = 0.0;
  int m_responsive = 0;
  // Floss mode only; empty otherwise.
  std::optional<bool> solver_converged;
};

struct CellResult {
  Mode mode = Mode::kFullParticipation;
  int n_clients = 0;
  uint64_t seed = 0;
  std::vector<RoundLog> rounds;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;   // sorted by (mode, n, seed, round)
  std::vector<CellResult> cells;  // same order, when logs were kept
};

// One (mode, n, seed) cell.
absl::StatusOr<CellResult> RunCell(const ExperimentConfig& config, Mode mode,
                                   int n_clients, uint64_t seed);

// Every mode x client count x seed cell, on up to `jobs` threads. The result
// does not depend on `jobs`.
absl::StatusOr<ExperimentResult> RunSweep(const ExperimentConfig& config,
                                          int jobs = 1, bool keep_logs = false);

inline constexpr int kCsvSchemaVersion = 1;

// `# floss-sweep schema_version=1`, the header row, then one row per result.
std::string FormatCsv(const std::vector<ResultRow>& rows);
absl::Status WriteCsv(const std::vector<ResultRow>& rows,
                      const std::string& path);

// Checks that `path` can be opened for writing (truncating it).
absl::Status CheckWritable(const std::string& path);

struct DsepQuery {
  std::vector<std::string> a;
  std::vector<std::string> b;
  std::vector<std::string> c;
};

// "A1,A2;B1;C1,C2"; the conditioning list may be empty or omitted.
absl::StatusOr<DsepQuery> ParseDsepQuery(absl::string_view query);

// "d-separated" or "not d-separated" followed by the first open path.
absl::StatusOr<std::string> DsepCheck(const MDag& graph,
                                      const DsepQuery& query);

}  // namespace floss

#endif  // FLOSS_EXPERIMENT_H_
