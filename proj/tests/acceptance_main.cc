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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "floss/experiment.h"
#include "floss/graph_spec.h"
#include "floss/mdag.h"
#include "floss/model.h"
#include "floss/orchestrator.h"
#include "floss/propensity.h"
#include "floss/rng.h"
#include "floss/synth.h"
#include "testing/cell_population.h"
#include "testing/dsep_oracle.h"

namespace floss {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Estimate {
  double mean = 0.0;
  double se = 0.0;
};

Estimate MeanAndSe(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (xs.size() - 1) / xs.size())};
}

MDag FromEdgeList(const testing::EdgeListDag& g) {
  std::vector<VariableNode> v;
  for (int i = 0; i < g.n; ++i) v.push_back({absl::StrCat("v", i)});
  std::vector<EdgeSpec> e;
  for (auto [p, c] : g.edges) {
    e.push_back({absl::StrCat("v", p), absl::StrCat("v", c)});
  }
  return *BuildMDag(std::move(v), std::move(e));
}

// Number of (a, b, C) queries on which the library and the oracle disagree.
int Disagreements(const testing::EdgeListDag& dag, int& queries) {
  const MDag g = FromEdgeList(dag);
  int bad = 0;
  for (int a = 0; a < dag.n; ++a) {
    for (int b = a + 1; b < dag.n; ++b) {
      std::vector<int> rest;
      for (int v = 0; v < dag.n; ++v) {
        if (v != a && v != b) rest.push_back(v);
      }
      for (const std::vector<int>& c : testing::Subsets(rest)) {
        std::vector<std::string> names;
        for (int v : c) names.push_back(absl::StrCat("v", v));
        absl::StatusOr<bool> got = DSeparated(g, {absl::StrCat("v", a)},
                                              {absl::StrCat("v", b)}, names);
        ++queries;
        if (!got.ok() || *got != testing::OracleDSeparated(dag, {a}, {b}, c)) {
          ++bad;
        }
      }
    }
  }
  return bad;
}

Verdict DSeparationOracle() {
  const Clock::time_point start = Clock::now();
  int queries = 0, bad = 0;
  const std::vector<testing::EdgeListDag> small = testing::AllDags(3);
  for (const testing::EdgeListDag& dag : small) bad += Disagreements(dag, queries);
  std::mt19937_64 rng(20260101);
  for (int i = 0; i < 500; ++i) {
    bad += Disagreements(testing::RandomDag(6, 0.4, rng), queries);
  }
  const double secs = Seconds(start);
  return {bad == 0 && small.size() == 25 && secs < 30,
          absl::StrFormat("%d three-vertex DAGs + 500 six-vertex DAGs, %d "
                          "queries, %d disagreements, %.2f s",
                          small.size(), queries, bad, secs)};
}

Verdict ShippedGraphClaims() {
  absl::StatusOr<MDag> mnar =
      LoadGraphSpec(FLOSS_GRAPH_DIR "/mnar_gradients.graph");
  absl::StatusOr<MDag> shadow =
      LoadGraphSpec(FLOSS_GRAPH_DIR "/shadow_variable.graph");
  if (!mnar.ok() || !shadow.ok()) {
    return {false, absl::StrCat("cannot load graphs: ", mnar.status().ToString(),
                                " ", shadow.status().ToString())};
  }
  absl::StatusOr<MissingnessClass> cls = ClassifyMissingness(*mnar, "R", "G", {"D"});
  absl::StatusOr<ShadowConditions> sc =
      CheckShadowConditions(*shadow, "Z", "R", "S", {"D'"});
  if (!cls.ok() || !sc.ok()) return {false, "query failed"};
  return {*cls == MissingnessClass::kMnar && sc->relevance && sc->exclusion,
          absl::StrCat("gradients given D: ", MissingnessClassName(*cls),
                       "; shadow relevance=", sc->relevance ? "true" : "false",
                       " exclusion=", sc->exclusion ? "true" : "false")};
}

Verdict GradientCheck() {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  for (int point = 0; point < 20; ++point) {
    PopulationConfig c = PopulationConfig::Default();
    c.n_users = 20;
    c.seed = 900 + point;
    const Dataset data = PoolDatasets(GeneratePopulation(c)->users);
    ModelParams params{Eigen::VectorXd(c.dim_x + 1)};
    for (int j = 0; j <= c.dim_x; ++j) params.theta[j] = 2.0 * normal(rng);
    const Eigen::VectorXd g = *LocalGradient(params, data);
    Eigen::VectorXd fd(g.size());
    const double h = 1e-6;
    for (int j = 0; j < g.size(); ++j) {
      ModelParams plus = params, minus = params;
      plus.theta[j] += h;
      minus.theta[j] -= h;
      fd[j] = (*LocalLoss(plus, data) - *LocalLoss(minus, data)) / (2 * h);
    }
    worst = std::max(worst, (g - fd).norm() / g.norm());
  }
  return {worst <= 1e-5,
          absl::StrFormat("20 random points, max relative error %.2e", worst)};
}

Verdict EstimatingEquationRecovery() {
  int recovered = 0;
  double worst = 0.0;
  for (int seed = 1; seed <= 20; ++seed) {
    PopulationConfig c = PopulationConfig::Default();
    c.n_users = 20000;
    c.seed = seed;
    absl::StatusOr<Population> pop = GeneratePopulation(c);
    if (!pop.ok()) return {false, pop.status().ToString()};
    absl::StatusOr<PropensityFit> fit =
        SolveShadowEquations(pop->users, PropensityBasis::Default(c.dim_d),
                             Eigen::VectorXd::Zero(c.dim_d + 2));
    if (!fit.ok() || !fit->converged) continue;
    const double err =
        (fit->beta - c.TruePropensityCoefficients()).cwiseAbs().maxCoeff();
    worst = std::max(worst, err);
    if (err < 0.1) ++recovered;
  }

  const std::vector<UserRecord> cells = testing::EightCells();
  const testing::CellCounts counts = testing::Tabulate(cells);
  const Eigen::Vector3d grid = testing::GridSolve(counts);
  const double grid_residual =
      testing::CellResiduals(counts, grid).cwiseAbs().maxCoeff();
  SolverOptions opts;
  opts.tol = 1e-10;
  absl::StatusOr<PropensityFit> fit = SolveShadowEquations(
      cells, PropensityBasis::Default(1), Eigen::Vector3d::Zero(), opts);
  double cell_residual = INFINITY, distance = INFINITY;
  if (fit.ok() && fit->converged) {
    cell_residual = testing::CellResiduals(counts, fit->beta).cwiseAbs().maxCoeff();
    distance = (fit->beta - grid).cwiseAbs().maxCoeff();
  }
  return {recovered >= 18 && grid_residual < 1e-9 && cell_residual < 1e-9,
          absl::StrFormat("%d/20 seeds within 0.1 (max error %.3f); eight cells: "
                          "residual %.1e, grid residual %.1e, |beta - grid| %.1e",
                          recovered, worst, cell_residual, grid_residual,
                          distance)};
}

// Observed-minus-full risk and the two weighted-minus-full gaps for one
// population prompted at the generating model.
struct GapSample {
  double observed = 0.0;
  double oracle = 0.0;
  double estimated = 0.0;
  bool estimated_ok = false;
};

GapSample SampleGaps(int n, uint64_t seed, bool weighted) {
  PopulationConfig c = PopulationConfig::Default();
  c.n_users = n;
  c.seed = seed;
  Population pop = *GeneratePopulation(c);
  const ModelParams theta{c.true_theta};
  Rng rng(DeriveSeed(seed, {0x6d63}));
  (void)RefreshRoundState(pop, theta, rng);
  const RiskGap gap = *EmpiricalRiskGap(pop, theta);
  GapSample out;
  out.observed = gap.observed_risk - gap.full_risk;
  if (!weighted) return out;
  out.oracle = *WeightedObservedRisk(pop, theta, *OracleWeights(pop.users, 50)) -
               gap.full_risk;
  absl::StatusOr<PropensityFit> fit =
      SolveShadowEquations(pop.users, PropensityBasis::Default(c.dim_d),
                           Eigen::VectorXd::Zero(c.dim_d + 2));
  if (fit.ok() && fit->converged) {
    absl::StatusOr<WeightTable> w = ComputeWeights(*fit, pop.users, 50);
    if (w.ok()) {
      out.estimated = *WeightedObservedRisk(pop, theta, *w) - gap.full_risk;
      out.estimated_ok = true;
    }
  }
  return out;
}

struct MonteCarlo {
  Estimate observed_small;
  Estimate observed_large;
  Estimate oracle;
  Estimate estimated;
  int estimated_reps = 0;
};

MonteCarlo RunMonteCarlo() {
  const int reps = 200;
  std::vector<double> small, large, oracle, estimated;
  for (int r = 0; r < reps; ++r) {
    small.push_back(SampleGaps(2000, 50000 + r, false).observed);
    const GapSample s = SampleGaps(20000, 60000 + r, true);
    large.push_back(s.observed);
    oracle.push_back(s.oracle);
    if (s.estimated_ok) estimated.push_back(s.estimated);
  }
  return {MeanAndSe(small), MeanAndSe(large), MeanAndSe(oracle),
          MeanAndSe(estimated), static_cast<int>(estimated.size())};
}

Verdict UnweightedBias(const MonteCarlo& mc) {
  const double z = std::abs(mc.observed_large.mean) / mc.observed_large.se;
  const double ratio =
      std::abs(mc.observed_large.mean) / std::abs(mc.observed_small.mean);
  return {z > 5 && std::abs(ratio - 1.0) <= 0.2,
          absl::StrFormat("200 reps: gap %.5f (%.1f SE) at n=20000, %.5f at "
                          "n=2000, ratio %.3f",
                          mc.observed_large.mean, z, mc.observed_small.mean,
                          ratio)};
}

Verdict WeightedUnbiased(const MonteCarlo& mc) {
  const double z_oracle = std::abs(mc.oracle.mean) / mc.oracle.se;
  const double z_est = std::abs(mc.estimated.mean) / mc.estimated.se;
  return {z_oracle < 3 && z_est < 3 && mc.estimated_reps == 200,
          absl::StrFormat("n=20000: oracle gap %.5f (%.2f SE), estimated gap "
                          "%.5f (%.2f SE, %d/200 fits)",
                          mc.oracle.mean, z_oracle, mc.estimated.mean, z_est,
                          mc.estimated_reps)};
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct SweepRun {
  absl::StatusOr<ExperimentResult> result;
  double seconds = 0.0;
  std::string csv;
};

SweepRun RunDefaultSweep(const ExperimentConfig& config, const std::string& path) {
  const int jobs = std::max(1u, std::thread::hardware_concurrency());
  const Clock::time_point start = Clock::now();
  SweepRun run{RunSweep(config, jobs)};
  if (run.result.ok()) {
    const absl::Status st = WriteCsv(run.result->rows, path);
    if (st.ok()) run.csv = ReadFile(path);
  }
  run.seconds = Seconds(start);
  return run;
}

Verdict ShapeReproduction(const ExperimentConfig& config,
                          const ExperimentResult& result) {
  std::map<std::pair<Mode, int>, std::vector<double>> final_acc;
  int floss_final = 0, floss_unconverged = 0;
  for (const ResultRow& row : result.rows) {
    if (row.mode == Mode::kFlossCorrection) {
      ++floss_final;
      floss_unconverged += row.solver_converged == false;
    }
    if (row.round == config.train.rounds - 1) {
      final_acc[{row.mode, row.n_clients}].push_back(row.accuracy);
    }
  }
  auto mean = [&](Mode m, int n) {
    return MeanAndSe(final_acc[{m, n}]).mean;
  };
  std::string table;
  for (int n : config.client_counts) {
    absl::StrAppendFormat(&table, "\n    n=%-5d", n);
    for (Mode m : config.modes) {
      absl::StrAppendFormat(&table, " %s=%.4f", ModeName(m), mean(m, n));
    }
  }
  const int n = 1000;
  const double full = mean(Mode::kFullParticipation, n);
  const double unc = mean(Mode::kUncorrectedMnar, n);
  const double oracle = mean(Mode::kOracleCorrection, n);
  const double floss = mean(Mode::kFlossCorrection, n);
  const double gap = full - unc;
  const double closed = (floss - unc) / gap;
  const bool seeds_ok = config.seeds.size() >= 10;
  return {seeds_ok && gap >= 0.02 && closed >= 0.5 &&
              std::abs(oracle - floss) <= 0.02,
          absl::StrFormat("n=1000: full-uncorrected %.4f, floss closes %.1f%%, "
                          "|oracle-floss| %.4f; floss solver unconverged in "
                          "%d/%d rounds%s",
                          gap, 100 * closed, std::abs(oracle - floss),
                          floss_unconverged, floss_final, table)};
}

int Report(int id, const char* name, const Verdict& v) {
  std::printf("%s criterion %d (%s): %s\n", v.pass ? "PASS" : "FAIL", id, name,
              v.detail.c_str());
  std::fflush(stdout);
  return v.pass ? 0 : 1;
}

int Main() {
  int failures = 0;
  failures += Report(1, "d-separation oracle", DSeparationOracle());
  failures += Report(2, "shipped graph claims", ShippedGraphClaims());
  failures += Report(3, "gradient", GradientCheck());
  failures += Report(4, "estimating equations", EstimatingEquationRecovery());
  const MonteCarlo mc = RunMonteCarlo();
  failures += Report(5, "unweighted risk bias", UnweightedBias(mc));
  failures += Report(6, "weighted risk", WeightedUnbiased(mc));

  absl::StatusOr<ExperimentConfig> config =
      LoadExperimentConfig(FLOSS_CONFIG_DIR "/default.cfg");
  if (!config.ok()) {
    const Verdict v{false, config.status().ToString()};
    for (int id : {7, 8, 9}) failures += Report(id, "default sweep", v);
    return 1;
  }
  const std::filesystem::path dir = std::filesystem::temp_directory_path();
  const std::string first_path = (dir / "floss_acceptance_1.csv").string();
  const std::string second_path = (dir / "floss_acceptance_2.csv").string();
  const SweepRun first = RunDefaultSweep(*config, first_path);
  if (!first.result.ok()) {
    const Verdict v{false, first.result.status().ToString()};
    for (int id : {7, 8, 9}) failures += Report(id, "default sweep", v);
    return 1;
  }
  failures += Report(7, "accuracy shape", ShapeReproduction(*config, *first.result));
  const SweepRun second = RunDefaultSweep(*config, second_path);
  failures += Report(
      8, "determinism",
      {second.result.ok() && !first.csv.empty() && first.csv == second.csv,
       absl::StrFormat("%d rows, %d bytes, outputs %s", first.result->rows.size(),
                       first.csv.size(),
                       first.csv == second.csv ? "identical" : "differ")});
  const size_t expected_rows = config->modes.size() * config->client_counts.size() *
                               config->seeds.size() * config->train.rounds;
  failures += Report(
      9, "runtime",
      {first.seconds < 300 && first.result->rows.size() == expected_rows,
       absl::StrFormat("full sweep (%d rows) in %.1f s on %d threads",
                       first.result->rows.size(), first.seconds,
                       std::max(1u, std::thread::hardware_concurrency()))});
  std::filesystem::remove(first_path);
  std::filesystem::remove(second_path);
  std::printf("%s: %d of 9 criteria failed\n", failures ? "FAIL" : "PASS",
              failures);
  return failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace floss

int main() { return floss::Main(); }
