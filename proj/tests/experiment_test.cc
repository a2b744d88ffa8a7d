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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "absl/strings/match.h"
#include "absl/strings/str_split.h"
#include "floss/graph_spec.h"
#include "testing/status_testing.h"

namespace floss {
namespace {

std::string ReadFile(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string TempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() /
          ("floss_experiment_test_" + name))
      .string();
}

ExperimentConfig TinyConfig() {
  ExperimentConfig c = ExperimentConfig::Default();
  c.modes = {Mode::kFlossCorrection, Mode::kUncorrectedMnar};
  c.client_counts = {60, 40};
  c.seeds = {3, 1};
  c.train.rounds = 2;
  c.train.max_iterations = 5;
  c.train.k = 8;
  c.test_users = 100;
  return c;
}

TEST(ExperimentConfigTest, DefaultIsValid) {
  ExperimentConfig c = ExperimentConfig::Default();
  EXPECT_OK(c.Validate());
  EXPECT_EQ(c.modes, AllModes());
  EXPECT_EQ(c.client_counts, (std::vector<int>{50, 100, 200, 500, 1000}));
  EXPECT_EQ(c.seeds.size(), 10u);
}

TEST(ExperimentConfigTest, ShippedDefaultFileMatchesDefault) {
  ASSERT_OK_AND_ASSIGN(ExperimentConfig c,
                       LoadExperimentConfig(FLOSS_CONFIG_DIR "/default.cfg"));
  EXPECT_EQ(SerializeExperimentConfig(c),
            SerializeExperimentConfig(ExperimentConfig::Default()));
}

TEST(ExperimentConfigTest, ShippedConfigsParse) {
  for (const char* name : {"default.cfg", "dp.cfg", "mcar.cfg"}) {
    EXPECT_OK(LoadExperimentConfig(std::string(FLOSS_CONFIG_DIR "/") + name).status())
        << name;
  }
}

TEST(ExperimentConfigTest, SerializeParseRoundTrip) {
  ExperimentConfig c = TinyConfig();
  c.population.x_on_d = Eigen::MatrixXd::Constant(2, 1, 0.1);
  c.population.true_theta = Eigen::Vector3d(0.1, 1.0 / 3.0, -2.5e-7);
  c.dp.clip_norm = 1.5;
  c.dp.noise_sigma = 0.3;
  c.output = "out/results.csv";
  const std::string text = SerializeExperimentConfig(c);
  ASSERT_OK_AND_ASSIGN(ExperimentConfig parsed, ParseExperimentConfig(text));
  EXPECT_EQ(SerializeExperimentConfig(parsed), text);
  EXPECT_EQ(parsed.population.true_theta, c.population.true_theta);
  EXPECT_EQ(parsed.population.x_on_d, c.population.x_on_d);
  EXPECT_EQ(parsed.modes, c.modes);
  EXPECT_EQ(parsed.client_counts, c.client_counts);
  EXPECT_EQ(parsed.seeds, c.seeds);
  EXPECT_EQ(parsed.dp.clip_norm, 1.5);
  EXPECT_EQ(parsed.output, c.output);
}

TEST(ExperimentConfigTest, PartialTextKeepsDefaults) {
  ASSERT_OK_AND_ASSIGN(ExperimentConfig c,
                       ParseExperimentConfig("# comment\n\ntrain.k = 7  # trailing\n"));
  EXPECT_EQ(c.train.k, 7);
  EXPECT_EQ(c.train.eta, ExperimentConfig::Default().train.eta);
}

TEST(ExperimentConfigTest, ErrorsNameLineAndField) {
  struct Case {
    const char* text;
    const char* fragment;
  };
  for (const Case& c : {
           Case{"train.k = 4\nbogus.key = 1\n", "line 2: unknown key 'bogus.key'"},
           Case{"train.k = 4\ntrain.k = 5\n", "line 2: duplicate key 'train.k'"},
           Case{"train.k 4\n", "line 1: expected"},
           Case{"\ntrain.eta = fast\n", "line 2: train.eta"},
           Case{"experiment.modes = full, sideways\n", "sideways"},
           Case{"population.true_theta = 1, 2\n", "true_theta"},
           Case{"train.k = 0\n", "train.k"},
           Case{"experiment.seeds = 1, 1\n", "experiment.seeds"},
           Case{"experiment.client_counts = \n", "experiment.client_counts"},
       }) {
    absl::StatusOr<ExperimentConfig> parsed = ParseExperimentConfig(c.text);
    ASSERT_FALSE(parsed.ok()) << c.text;
    EXPECT_EQ(parsed.status().code(), absl::StatusCode::kInvalidArgument);
    EXPECT_TRUE(absl::StrContains(parsed.status().message(), c.fragment))
        << parsed.status().message();
  }
}

TEST(ExperimentConfigTest, MissingFile) {
  EXPECT_EQ(LoadExperimentConfig("/nonexistent/x.cfg").status().code(),
            absl::StatusCode::kNotFound);
}

TEST(SeedTest, CellSeedsAreSharedAcrossModesAndDistinct) {
  EXPECT_NE(PopulationSeed(1, 50), PopulationSeed(1, 100));
  EXPECT_NE(PopulationSeed(1, 50), PopulationSeed(2, 50));
  EXPECT_NE(PopulationSeed(1, 50), SimulationSeed(1, 50));
  EXPECT_NE(TestSetSeed(1), TestSetSeed(2));
  EXPECT_NE(TestSetSeed(1), PopulationSeed(1, 50));
}

TEST(RunSweepTest, SingleCellSingleRoundGivesOneRow) {
  ExperimentConfig c = TinyConfig();
  c.modes = {Mode::kOracleCorrection};
  c.client_counts = {30};
  c.seeds = {9};
  c.train.rounds = 1;
  ASSERT_OK_AND_ASSIGN(ExperimentResult r, RunSweep(c));
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0].mode, Mode::kOracleCorrection);
  EXPECT_EQ(r.rows[0].n_clients, 30);
  EXPECT_EQ(r.rows[0].seed, 9u);
  EXPECT_EQ(r.rows[0].round, 0);
  EXPECT_FALSE(r.rows[0].solver_converged.has_value());
  EXPECT_GE(r.rows[0].accuracy, 0.0);
  EXPECT_LE(r.rows[0].accuracy, 1.0);
  EXPECT_LE(r.rows[0].m_responsive, 30);
}

TEST(RunSweepTest, RowsCoverGridInSortedOrder) {
  ExperimentConfig c = TinyConfig();
  ASSERT_OK_AND_ASSIGN(ExperimentResult r, RunSweep(c, 1, true));
  ASSERT_EQ(r.rows.size(), 2u * 2u * 2u * 2u);
  ASSERT_EQ(r.cells.size(), 8u);
  for (size_t i = 1; i < r.rows.size(); ++i) {
    const ResultRow& a = r.rows[i - 1];
    const ResultRow& b = r.rows[i];
    EXPECT_LT(std::tie(a.mode, a.n_clients, a.seed, a.round),
              std::tie(b.mode, b.n_clients, b.seed, b.round));
  }
  for (const ResultRow& row : r.rows) {
    EXPECT_EQ(row.solver_converged.has_value(), row.mode == Mode::kFlossCorrection);
  }
}

TEST(RunSweepTest, ModesShareCellPopulations) {
  ExperimentConfig c = TinyConfig();
  c.modes = {Mode::kUncorrectedMnar, Mode::kFlossCorrection};
  ASSERT_OK_AND_ASSIGN(ExperimentResult r, RunSweep(c));
  // Every mode prompts the same clients with the same stream in round 0.
  const size_t per_mode = r.rows.size() / 2;
  for (size_t i = 0; i < per_mode; ++i) {
    if (r.rows[i].round == 0) {
      EXPECT_EQ(r.rows[i].m_responsive, r.rows[i + per_mode].m_responsive);
    }
  }
}

TEST(RunSweepTest, CsvIsIndependentOfJobsAndRepeatable) {
  ExperimentConfig c = TinyConfig();
  ASSERT_OK_AND_ASSIGN(ExperimentResult a, RunSweep(c, 1));
  ASSERT_OK_AND_ASSIGN(ExperimentResult b, RunSweep(c, 1));
  ASSERT_OK_AND_ASSIGN(ExperimentResult d, RunSweep(c, 4));
  EXPECT_EQ(FormatCsv(a.rows), FormatCsv(b.rows));
  EXPECT_EQ(FormatCsv(a.rows), FormatCsv(d.rows));
}

TEST(RunSweepTest, RejectsInvalidConfig) {
  ExperimentConfig c = TinyConfig();
  c.seeds.clear();
  EXPECT_EQ(RunSweep(c).status().code(), absl::StatusCode::kInvalidArgument);
}

TEST(CsvTest, HeaderAndRows) {
  ResultRow row;
  row.mode = Mode::kFlossCorrection;
  row.n_clients = 50;
  row.seed = 2;
  row.round = 3;
  row.accuracy = 0.75;
  row.full_risk = 0.5;
  row.observed_risk = 0.25;
  row.m_responsive = 40;
  row.solver_converged = false;
  ResultRow other = row;
  other.mode = Mode::kFullParticipation;
  other.solver_converged.reset();
  const std::vector<std::string> lines =
      absl::StrSplit(FormatCsv({row, other}), '\n', absl::SkipEmpty());
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "# floss-sweep schema_version=1");
  EXPECT_EQ(lines[1],
            "mode,n_clients,seed,round,accuracy,full_risk,observed_risk,"
            "m_responsive,solver_converged");
  EXPECT_EQ(lines[2], "floss,50,2,3,0.75,0.5,0.25,40,false");
  EXPECT_EQ(lines[3], "full,50,2,3,0.75,0.5,0.25,40,");
}

TEST(CsvTest, WriteOverwritesFile) {
  const std::string path = TempPath("write.csv");
  {
    std::ofstream out(path);
    out << "stale contents that are longer than the new file\n"
        << std::string(4096, 'x');
  }
  ResultRow row;
  ASSERT_OK(WriteCsv({row}, path));
  EXPECT_EQ(ReadFile(path), FormatCsv({row}));
  std::filesystem::remove(path);
}

TEST(CsvTest, UnwritablePath) {
  EXPECT_FALSE(CheckWritable("/nonexistent-dir/out.csv").ok());
  EXPECT_FALSE(WriteCsv({}, "/nonexistent-dir/out.csv").ok());
  const std::string path = TempPath("writable.csv");
  EXPECT_OK(CheckWritable(path));
  std::filesystem::remove(path);
}

TEST(DsepQueryTest, Parse) {
  ASSERT_OK_AND_ASSIGN(DsepQuery q, ParseDsepQuery("Z;R;S,D'"));
  EXPECT_EQ(q.a, std::vector<std::string>{"Z"});
  EXPECT_EQ(q.b, std::vector<std::string>{"R"});
  EXPECT_EQ(q.c, (std::vector<std::string>{"S", "D'"}));
  ASSERT_OK_AND_ASSIGN(q, ParseDsepQuery(" R ; G ; "));
  EXPECT_EQ(q.a, std::vector<std::string>{"R"});
  EXPECT_EQ(q.b, std::vector<std::string>{"G"});
  EXPECT_TRUE(q.c.empty());
  ASSERT_OK_AND_ASSIGN(q, ParseDsepQuery("R;G"));
  EXPECT_TRUE(q.c.empty());
  EXPECT_FALSE(ParseDsepQuery("R").ok());
  EXPECT_FALSE(ParseDsepQuery(";G;").ok());
  EXPECT_FALSE(ParseDsepQuery("A;B;C;D").ok());
}

TEST(DsepCheckTest, ShippedGraphs) {
  ASSERT_OK_AND_ASSIGN(MDag mnar, LoadGraphSpec(FLOSS_GRAPH_DIR "/mnar_gradients.graph"));
  ASSERT_OK_AND_ASSIGN(std::string verdict, DsepCheck(mnar, *ParseDsepQuery("R;G;")));
  EXPECT_TRUE(absl::StartsWith(verdict, "not d-separated\nopen path: ")) << verdict;

  ASSERT_OK_AND_ASSIGN(MDag shadow,
                       LoadGraphSpec(FLOSS_GRAPH_DIR "/shadow_variable.graph"));
  ASSERT_OK_AND_ASSIGN(verdict, DsepCheck(shadow, *ParseDsepQuery("Z;R;S,D'")));
  EXPECT_EQ(verdict, "d-separated");
  EXPECT_FALSE(DsepCheck(shadow, *ParseDsepQuery("Z;Q;")).ok());
}

}  // namespace
}  // namespace floss
