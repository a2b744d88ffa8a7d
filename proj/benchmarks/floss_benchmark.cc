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

#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <benchmark/benchmark.h>

#include "absl/strings/str_cat.h"
#include "floss/experiment.h"
#include "floss/mdag.h"
#include "floss/orchestrator.h"
#include "floss/propensity.h"
#include "floss/synth.h"

namespace floss {
namespace {

// Layered random DAG with `n` vertices named v0..v{n-1}.
MDag RandomGraph(int n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution edge(3.0 / n);
  std::vector<VariableNode> vertices;
  std::vector<EdgeSpec> edges;
  for (int i = 0; i < n; ++i) {
    vertices.push_back({absl::StrCat("v", i)});
    for (int j = 0; j < i; ++j) {
      if (edge(rng)) edges.push_back({absl::StrCat("v", j), absl::StrCat("v", i)});
    }
  }
  return *BuildMDag(std::move(vertices), std::move(edges));
}

void BM_DSeparated(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const MDag g = RandomGraph(n, 1);
  std::vector<int> c;
  for (int v = 2; v < n; v += 3) c.push_back(v);
  for (auto _ : state) {
    benchmark::DoNotOptimize(DSeparatedIndices(g, {0}, {n - 1}, c));
  }
}
BENCHMARK(BM_DSeparated)->RangeMultiplier(4)->Range(16, 1024);

Population MakePopulation(int n) {
  PopulationConfig c = PopulationConfig::Default();
  c.n_users = n;
  c.seed = 3;
  return *GeneratePopulation(c);
}

void BM_SolveShadowEquations(benchmark::State& state) {
  const Population pop = MakePopulation(static_cast<int>(state.range(0)));
  const PropensityBasis basis = PropensityBasis::Default(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        SolveShadowEquations(pop.users, basis, Eigen::Vector3d::Zero()));
  }
  state.SetItemsProcessed(state.iterations() * pop.size());
}
BENCHMARK(BM_SolveShadowEquations)->RangeMultiplier(10)->Range(1000, 100000);

void BM_RunRound(benchmark::State& state) {
  const Mode mode = static_cast<Mode>(state.range(0));
  const Population base = MakePopulation(1000);
  const Dataset test_set = *GenerateTestSet(base.config, 2000, 5);
  SimulationSettings settings = ExperimentConfig::Default().Settings(mode);
  uint64_t seed = 0;
  for (auto _ : state) {
    state.PauseTiming();
    Population pop = base;
    state.ResumeTiming();
    benchmark::DoNotOptimize(RunRound(pop, ModelParams::Zero(2), settings,
                                      test_set, 0, ++seed));
  }
  state.SetLabel(std::string(ModeName(mode)));
}
BENCHMARK(BM_RunRound)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace floss

BENCHMARK_MAIN();
