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

// Command-line front end: single runs, sweeps, graph queries and population
// dumps.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "floss/experiment.h"
#include "floss/graph_spec.h"
#include "floss/mdag.h"
#include "floss/orchestrator.h"
#include "floss/population_io.h"
#include "floss/synth.h"
#include "json.hpp"

namespace {

using json = nlohmann::json;

enum ExitCode {
  kOk = 0,
  kUsage = 2,
  kInvalidInput = 3,
  kIoError = 4,
  kRuntimeError = 5,
};

int Fail(const absl::Status& status) {
  const char* category = "runtime";
  int code = kRuntimeError;
  switch (status.code()) {
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kFailedPrecondition:
    case absl::StatusCode::kOutOfRange:
      category = "invalid input";
      code = kInvalidInput;
      break;
    case absl::StatusCode::kNotFound:
    case absl::StatusCode::kPermissionDenied:
    case absl::StatusCode::kDataLoss:
      category = "i/o";
      code = kIoError;
      break;
    default:
      break;
  }
  std::fprintf(stderr, "floss: %s error: %s\n", category,
               std::string(status.message()).c_str());
  return code;
}

json FitToJson(const floss::PropensityFit& fit) {
  json j;
  j["beta"] = std::vector<double>(fit.beta.data(),
                                  fit.beta.data() + fit.beta.size());
  j["converged"] = fit.converged;
  j["all_observed"] = fit.all_observed;
  j["final_residual_norm"] = fit.final_residual_norm;
  j["iterations"] = fit.iterations;
  j["residual_trajectory"] = fit.residual_trajectory;
  j["condition_number"] = fit.condition_number;
  j["floor_hits"] = fit.floor_hits;
  j["used_fallback"] = fit.used_fallback;
  return j;
}

json RoundToJson(const floss::RoundLog& log, int n_clients, uint64_t seed) {
  json j;
  j["mode"] = std::string(floss::ModeName(log.mode));
  j["n_clients"] = n_clients;
  j["seed"] = seed;
  j["round"] = log.round;
  j["m_responsive"] = log.m_responsive;
  j["accuracy"] = log.accuracy;
  j["full_risk"] = log.full_risk;
  j["observed_risk"] = log.observed_risk;
  j["mean_gradient_norm"] = log.mean_gradient_norm;
  j["skipped_iterations"] = log.skipped_iterations;
  j["stragglers_dropped"] = log.stragglers_dropped;
  j["weights_clipped"] = log.weights_clipped;
  j["uniform_fallback"] = log.uniform_fallback;
  if (log.uniform_fallback) j["fallback_reason"] = log.fallback_reason;
  if (log.propensity.has_value()) j["propensity"] = FitToJson(*log.propensity);
  json iterations = json::array();
  for (const floss::IterationLog& it : log.iterations) {
    iterations.push_back({{"sampled", it.sampled},
                          {"dropped", it.dropped},
                          {"skipped", it.skipped},
                          {"gradient_norm", it.gradient_norm}});
  }
  j["iterations"] = std::move(iterations);
  return j;
}

absl::Status WriteLog(const std::vector<floss::CellResult>& cells,
                      const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    return absl::PermissionDeniedError(
        absl::StrCat("cannot open ", path, " for writing"));
  }
  for (const floss::CellResult& cell : cells) {
    for (const floss::RoundLog& log : cell.rounds) {
      out << RoundToJson(log, cell.n_clients, cell.seed).dump() << "\n";
    }
  }
  return out ? absl::OkStatus()
             : absl::DataLossError(absl::StrCat("failed writing ", path));
}

void WarnFallbacks(const std::vector<floss::CellResult>& cells) {
  for (const floss::CellResult& cell : cells) {
    for (const floss::RoundLog& log : cell.rounds) {
      if (!log.uniform_fallback) continue;
      std::fprintf(stderr,
                   "floss: warning: n=%d seed=%llu round=%d sampled uniformly: "
                   "%s\n",
                   cell.n_clients, static_cast<unsigned long long>(cell.seed),
                   log.round, log.fallback_reason.c_str());
    }
  }
}

absl::StatusOr<floss::ExperimentConfig> LoadConfig(const std::string& path) {
  if (path.empty()) return floss::ExperimentConfig::Default();
  return floss::LoadExperimentConfig(path);
}

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<uint64_t> seed;
  std::string mode;
};

int RunSingle(const CommonFlags& flags, std::optional<int> n_clients,
              const std::string& log_path) {
  absl::StatusOr<floss::ExperimentConfig> config = LoadConfig(flags.config);
  if (!config.ok()) return Fail(config.status());
  absl::StatusOr<floss::Mode> mode =
      floss::ParseMode(flags.mode.empty() ? "floss" : flags.mode);
  if (!mode.ok()) return Fail(mode.status());
  const int n = n_clients.value_or(config->population.n_users);
  const uint64_t seed = flags.seed.value_or(config->seeds.front());
  const std::string out = flags.out.empty() ? config->output : flags.out;
  if (absl::Status st = floss::CheckWritable(out); !st.ok()) return Fail(st);
  if (!log_path.empty()) {
    if (absl::Status st = floss::CheckWritable(log_path); !st.ok()) {
      return Fail(st);
    }
  }

  absl::StatusOr<floss::CellResult> cell =
      floss::RunCell(*config, *mode, n, seed);
  if (!cell.ok()) return Fail(cell.status());
  WarnFallbacks({*cell});

  std::vector<floss::ResultRow> rows;
  for (const floss::RoundLog& log : cell->rounds) {
    floss::ResultRow row;
    row.mode = cell->mode;
    row.n_clients = n;
    row.seed = seed;
    row.round = log.round;
    row.accuracy = log.accuracy;
    row.full_risk = log.full_risk;
    row.observed_risk = log.observed_risk;
    row.m_responsive = log.m_responsive;
    if (cell->mode == floss::Mode::kFlossCorrection) {
      row.solver_converged =
          log.propensity.has_value() && log.propensity->converged;
    }
    rows.push_back(row);
  }
  if (absl::Status st = floss::WriteCsv(rows, out); !st.ok()) return Fail(st);
  if (!log_path.empty()) {
    if (absl::Status st = WriteLog({*cell}, log_path); !st.ok()) {
      return Fail(st);
    }
  }
  const floss::RoundLog& last = cell->rounds.back();
  std::printf("mode=%s n=%d seed=%llu rounds=%zu final_accuracy=%.4f -> %s\n",
              std::string(floss::ModeName(*mode)).c_str(), n,
              static_cast<unsigned long long>(seed), cell->rounds.size(),
              last.accuracy, out.c_str());
  return kOk;
}

int RunSweepCommand(const CommonFlags& flags, int jobs,
                    const std::string& log_path) {
  absl::StatusOr<floss::ExperimentConfig> config = LoadConfig(flags.config);
  if (!config.ok()) return Fail(config.status());
  if (flags.seed.has_value()) config->seeds = {*flags.seed};
  if (!flags.mode.empty()) {
    absl::StatusOr<floss::Mode> mode = floss::ParseMode(flags.mode);
    if (!mode.ok()) return Fail(mode.status());
    config->modes = {*mode};
  }
  const std::string out = flags.out.empty() ? config->output : flags.out;
  if (absl::Status st = floss::CheckWritable(out); !st.ok()) return Fail(st);
  if (!log_path.empty()) {
    if (absl::Status st = floss::CheckWritable(log_path); !st.ok()) {
      return Fail(st);
    }
  }

  absl::StatusOr<floss::ExperimentResult> result =
      floss::RunSweep(*config, jobs, /*keep_logs=*/true);
  if (!result.ok()) return Fail(result.status());
  WarnFallbacks(result->cells);
  if (absl::Status st = floss::WriteCsv(result->rows, out); !st.ok()) {
    return Fail(st);
  }
  if (!log_path.empty()) {
    if (absl::Status st = WriteLog(result->cells, log_path); !st.ok()) {
      return Fail(st);
    }
  }
  std::printf("%zu rows (%zu cells) -> %s\n", result->rows.size(),
              result->cells.size(), out.c_str());
  return kOk;
}

int RunDsepCheck(const std::string& graph_path, const std::string& query) {
  absl::StatusOr<floss::MDag> graph = floss::LoadGraphSpec(graph_path);
  if (!graph.ok()) return Fail(graph.status());
  absl::StatusOr<floss::DsepQuery> q = floss::ParseDsepQuery(query);
  if (!q.ok()) return Fail(q.status());
  absl::StatusOr<std::string> verdict = floss::DsepCheck(*graph, *q);
  if (!verdict.ok()) return Fail(verdict.status());
  std::printf("%s\n", verdict->c_str());
  return kOk;
}

int RunGenPopulation(const CommonFlags& flags, std::optional<int> n_clients) {
  absl::StatusOr<floss::ExperimentConfig> config = LoadConfig(flags.config);
  if (!config.ok()) return Fail(config.status());
  if (flags.out.empty()) {
    return Fail(absl::InvalidArgumentError("gen-population needs --out"));
  }
  floss::PopulationConfig pc = config->population;
  if (n_clients.has_value()) pc.n_users = *n_clients;
  if (flags.seed.has_value()) pc.seed = *flags.seed;
  absl::StatusOr<floss::Population> population = floss::GeneratePopulation(pc);
  if (!population.ok()) return Fail(population.status());
  if (absl::Status st = floss::WritePopulation(*population, flags.out);
      !st.ok()) {
    return Fail(st);
  }
  std::printf("%d users -> %s\n", population->size(), flags.out.c_str());
  return kOk;
}

void AddCommonFlags(CLI::App* cmd, CommonFlags& flags, bool with_mode) {
  cmd->add_option("--config", flags.config,
                  "Experiment config file (defaults built in)");
  cmd->add_option("--out", flags.out, "Output path");
  cmd->add_option("--seed", flags.seed, "Experiment seed");
  if (with_mode) {
    cmd->add_option("--mode", flags.mode,
                    "full, uncorrected, oracle or floss");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated learning simulator with MNAR-aware client sampling"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::optional<int> n_clients;
  std::string log_path;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  CLI::App* run = app.add_subcommand("run", "Run a single (mode, n, seed) cell");
  AddCommonFlags(run, flags, /*with_mode=*/true);
  run->add_option("--n", n_clients, "Number of clients")
      ->check(CLI::PositiveNumber);
  run->add_option("--log", log_path, "JSON-lines round diagnostics");

  CLI::App* sweep =
      app.add_subcommand("sweep", "Run every mode x client count x seed");
  AddCommonFlags(sweep, flags, /*with_mode=*/true);
  sweep->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  sweep->add_option("--log", log_path, "JSON-lines round diagnostics");

  std::string graph_path;
  std::string query;
  CLI::App* dsep = app.add_subcommand(
      "dsep-check", "Query d-separation on a graph spec file");
  dsep->add_option("graph", graph_path, "Graph spec file")->required();
  dsep->add_option("query", query, "A;B;C with comma-separated vertex lists")
      ->required();

  CLI::App* gen =
      app.add_subcommand("gen-population", "Dump a synthetic population");
  AddCommonFlags(gen, flags, /*with_mode=*/false);
  gen->add_option("--n", n_clients, "Number of clients")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "floss: usage error: " << e.what() << "\n"
              << "Run with --help for more information.\n";
    return kUsage;
  }

  if (run->parsed()) return RunSingle(flags, n_clients, log_path);
  if (sweep->parsed()) return RunSweepCommand(flags, jobs, log_path);
  if (dsep->parsed()) return RunDsepCheck(graph_path, query);
  return RunGenPopulation(flags, n_clients);
}
