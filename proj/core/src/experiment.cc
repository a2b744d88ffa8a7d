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

#include "floss/experiment.h"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>
#include <tuple>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "absl/strings/ascii.h"
#include "floss/rng.h"
#include "floss/status_macros.h"

namespace floss {
namespace {

enum SeedLabel : uint64_t {
  kPopulationLabel = 0x706f70,
  kSimulationLabel = 0x73696d,
  kTestLabel = 0x746573,
};

struct CellKey {
  Mode mode;
  int n_clients;
  uint64_t seed;
};

absl::StatusOr<CellResult> RunCellWithTestSet(const ExperimentConfig& config,
                                              Mode mode, int n_clients,
                                              uint64_t seed,
                                              const Dataset& test_set) {
  PopulationConfig pc = config.population;
  pc.n_users = n_clients;
  pc.seed = PopulationSeed(seed, n_clients);
  FLOSS_ASSIGN_OR_RETURN(Population population, GeneratePopulation(pc));
  FLOSS_ASSIGN_OR_RETURN(
      SimulationResult sim,
      RunSimulation(std::move(population), config.Settings(mode), test_set,
                    SimulationSeed(seed, n_clients)));
  CellResult cell;
  cell.mode = mode;
  cell.n_clients = n_clients;
  cell.seed = seed;
  cell.rounds = std::move(sim.rounds);
  return cell;
}

void AppendRows(const CellResult& cell, std::vector<ResultRow>& rows) {
  for (const RoundLog& log : cell.rounds) {
    ResultRow row;
    row.mode = cell.mode;
    row.n_clients = cell.n_clients;
    row.seed = cell.seed;
    row.round = log.round;
    row.accuracy = log.accuracy;
    row.full_risk = log.full_risk;
    row.observed_risk = log.observed_risk;
    row.m_responsive = log.m_responsive;
    if (cell.mode == Mode::kFlossCorrection) {
      row.solver_converged =
          log.propensity.has_value() && log.propensity->converged;
    }
    rows.push_back(row);
  }
}

std::vector<std::string> SplitNames(absl::string_view text) {
  std::vector<std::string> out;
  for (absl::string_view piece : absl::StrSplit(text, ',')) {
    piece = absl::StripAsciiWhitespace(piece);
    if (!piece.empty()) out.emplace_back(piece);
  }
  return out;
}

}  // namespace

uint64_t PopulationSeed(uint64_t seed, int n_clients) {
  return DeriveSeed(seed, {kPopulationLabel, static_cast<uint64_t>(n_clients)});
}

uint64_t SimulationSeed(uint64_t seed, int n_clients) {
  return DeriveSeed(seed, {kSimulationLabel, static_cast<uint64_t>(n_clients)});
}

uint64_t TestSetSeed(uint64_t seed) { return DeriveSeed(seed, {kTestLabel}); }

absl::StatusOr<CellResult> RunCell(const ExperimentConfig& config, Mode mode,
                                   int n_clients, uint64_t seed) {
  FLOSS_RETURN_IF_ERROR(config.Validate());
  FLOSS_ASSIGN_OR_RETURN(
      Dataset test_set,
      GenerateTestSet(config.population, config.test_users,
                      TestSetSeed(seed)));
  return RunCellWithTestSet(config, mode, n_clients, seed, test_set);
}

absl::StatusOr<ExperimentResult> RunSweep(const ExperimentConfig& config,
                                          int jobs, bool keep_logs) {
  FLOSS_RETURN_IF_ERROR(config.Validate());
  if (jobs < 1) return absl::InvalidArgumentError("jobs must be >= 1");

  std::vector<Dataset> test_sets;
  for (uint64_t seed : config.seeds) {
    FLOSS_ASSIGN_OR_RETURN(
        Dataset test_set,
        GenerateTestSet(config.population, config.test_users,
                        TestSetSeed(seed)));
    test_sets.push_back(std::move(test_set));
  }

  std::vector<Mode> modes = config.modes;
  std::sort(modes.begin(), modes.end());
  std::vector<int> counts = config.client_counts;
  std::sort(counts.begin(), counts.end());
  std::vector<size_t> seed_order(config.seeds.size());
  for (size_t i = 0; i < seed_order.size(); ++i) seed_order[i] = i;
  std::sort(seed_order.begin(), seed_order.end(), [&](size_t a, size_t b) {
    return config.seeds[a] < config.seeds[b];
  });

  struct Task {
    CellKey key;
    size_t seed_index;
  };
  std::vector<Task> tasks;
  for (Mode m : modes) {
    for (int n : counts) {
      for (size_t si : seed_order) tasks.push_back({{m, n, config.seeds[si]}, si});
    }
  }

  std::vector<absl::StatusOr<CellResult>> results(
      tasks.size(), absl::UnknownError("not run"));
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&]() {
    for (size_t i = next++; i < tasks.size() && !failed; i = next++) {
      const Task& t = tasks[i];
      results[i] = RunCellWithTestSet(config, t.key.mode, t.key.n_clients,
                                      t.key.seed, test_sets[t.seed_index]);
      if (!results[i].ok()) failed = true;
    }
  };
  const int threads =
      std::min<int>(jobs, static_cast<int>(std::max<size_t>(tasks.size(), 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  ExperimentResult out;
  for (size_t i = 0; i < tasks.size(); ++i) {
    if (!results[i].ok()) {
      if (failed && absl::IsUnknown(results[i].status())) continue;
      const CellKey& k = tasks[i].key;
      return absl::Status(
          results[i].status().code(),
          absl::StrCat("cell mode=", ModeName(k.mode), " n=", k.n_clients,
                       " seed=", k.seed, ": ",
                       results[i].status().message()));
    }
    AppendRows(*results[i], out.rows);
    if (keep_logs) out.cells.push_back(*std::move(results[i]));
  }
  return out;
}

std::string FormatCsv(const std::vector<ResultRow>& rows) {
  std::string out = absl::StrCat("# floss-sweep schema_version=",
                                 kCsvSchemaVersion, "\n");
  out +=
      "mode,n_clients,seed,round,accuracy,full_risk,observed_risk,"
      "m_responsive,solver_converged\n";
  for (const ResultRow& r : rows) {
    const char* converged = !r.solver_converged.has_value() ? ""
                            : *r.solver_converged           ? "true"
                                                            : "false";
    absl::StrAppendFormat(&out, "%s,%d,%d,%d,%.10g,%.10g,%.10g,%d,%s\n",
                          ModeName(r.mode), r.n_clients, r.seed, r.round,
                          r.accuracy, r.full_risk, r.observed_risk,
                          r.m_responsive, converged);
  }
  return out;
}

absl::Status CheckWritable(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    return absl::PermissionDeniedError(
        absl::StrCat("cannot open ", path, " for writing"));
  }
  return absl::OkStatus();
}

absl::Status WriteCsv(const std::vector<ResultRow>& rows,
                      const std::string& path) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) {
    return absl::PermissionDeniedError(
        absl::StrCat("cannot open ", path, " for writing"));
  }
  out << FormatCsv(rows);
  out.close();
  if (!out) return absl::DataLossError(absl::StrCat("failed writing ", path));
  return absl::OkStatus();
}

absl::StatusOr<DsepQuery> ParseDsepQuery(absl::string_view query) {
  std::vector<absl::string_view> parts = absl::StrSplit(query, ';');
  if (parts.size() < 2 || parts.size() > 3) {
    return absl::InvalidArgumentError(absl::StrCat(
        "query '", query, "' must look like 'A;B' or 'A;B;C1,C2'"));
  }
  DsepQuery q;
  q.a = SplitNames(parts[0]);
  q.b = SplitNames(parts[1]);
  if (parts.size() == 3) q.c = SplitNames(parts[2]);
  if (q.a.empty() || q.b.empty()) {
    return absl::InvalidArgumentError("query needs nonempty A and B sets");
  }
  return q;
}

absl::StatusOr<std::string> DsepCheck(const MDag& graph,
                                      const DsepQuery& query) {
  FLOSS_ASSIGN_OR_RETURN(bool separated,
                         DSeparated(graph, query.a, query.b, query.c));
  if (separated) return std::string("d-separated");
  FLOSS_ASSIGN_OR_RETURN(std::optional<Path> path,
                         FindOpenPath(graph, query.a, query.b, query.c));
  std::string out = "not d-separated";
  if (path.has_value()) {
    absl::StrAppend(&out, "\nopen path: ", FormatPath(graph, *path));
  }
  return out;
}

}  // namespace floss
