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

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "absl/container/flat_hash_set.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "absl/strings/ascii.h"
#include "floss/experiment.h"
#include "floss/status_macros.h"

namespace floss {
namespace {

using Setter =
    std::function<absl::Status(ExperimentConfig&, absl::string_view)>;
using Getter = std::function<std::string(const ExperimentConfig&)>;

struct Field {
  std::string key;
  Setter set;
  Getter get;
};

// Shortest text that parses back to the same double.
std::string FormatReal(double v) {
  char buf[32];
  const std::to_chars_result r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::vector<absl::string_view> SplitList(absl::string_view value, char sep) {
  std::vector<absl::string_view> out;
  for (absl::string_view piece : absl::StrSplit(value, sep)) {
    piece = absl::StripAsciiWhitespace(piece);
    if (!piece.empty()) out.push_back(piece);
  }
  return out;
}

absl::Status ParseReal(absl::string_view text, double* out) {
  if (!absl::SimpleAtod(text, out)) {
    return absl::InvalidArgumentError(
        absl::StrCat("'", text, "' is not a number"));
  }
  return absl::OkStatus();
}

absl::Status ParseInt(absl::string_view text, int* out) {
  if (!absl::SimpleAtoi(text, out)) {
    return absl::InvalidArgumentError(
        absl::StrCat("'", text, "' is not an integer"));
  }
  return absl::OkStatus();
}

absl::Status ParseU64(absl::string_view text, uint64_t* out) {
  if (!absl::SimpleAtoi(text, out)) {
    return absl::InvalidArgumentError(
        absl::StrCat("'", text, "' is not an unsigned integer"));
  }
  return absl::OkStatus();
}

absl::Status ParseVector(absl::string_view text, Eigen::VectorXd* out) {
  std::vector<absl::string_view> parts = SplitList(text, ',');
  Eigen::VectorXd v(parts.size());
  for (size_t i = 0; i < parts.size(); ++i) {
    FLOSS_RETURN_IF_ERROR(ParseReal(parts[i], &v[i]));
  }
  *out = std::move(v);
  return absl::OkStatus();
}

std::string FormatVector(const Eigen::VectorXd& v) {
  std::vector<std::string> parts;
  for (Eigen::Index i = 0; i < v.size(); ++i) parts.push_back(FormatReal(v[i]));
  return absl::StrJoin(parts, ", ");
}

absl::Status ParseMatrix(absl::string_view text, Eigen::MatrixXd* out) {
  std::vector<absl::string_view> rows = SplitList(text, ';');
  std::vector<Eigen::VectorXd> parsed(rows.size());
  for (size_t r = 0; r < rows.size(); ++r) {
    FLOSS_RETURN_IF_ERROR(ParseVector(rows[r], &parsed[r]));
    if (parsed[r].size() != parsed[0].size()) {
      return absl::InvalidArgumentError("matrix rows differ in length");
    }
  }
  Eigen::MatrixXd m(parsed.size(), parsed.empty() ? 0 : parsed[0].size());
  for (size_t r = 0; r < parsed.size(); ++r) m.row(r) = parsed[r].transpose();
  *out = std::move(m);
  return absl::OkStatus();
}

std::string FormatMatrix(const Eigen::MatrixXd& m) {
  std::vector<std::string> rows;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    rows.push_back(FormatVector(m.row(r).transpose()));
  }
  return absl::StrJoin(rows, "; ");
}

template <typename T>
Field RealField(std::string key, T member) {
  return {std::move(key),
          [member](ExperimentConfig& c, absl::string_view v) {
            return ParseReal(v, &member(c));
          },
          [member](const ExperimentConfig& c) {
            return FormatReal(member(c));
          }};
}

template <typename T>
Field IntField(std::string key, T member) {
  return {std::move(key),
          [member](ExperimentConfig& c, absl::string_view v) {
            return ParseInt(v, &member(c));
          },
          [member](const ExperimentConfig& c) {
            return absl::StrCat(member(c));
          }};
}

template <typename T>
Field VectorField(std::string key, T member) {
  return {std::move(key),
          [member](ExperimentConfig& c, absl::string_view v) {
            return ParseVector(v, &member(c));
          },
          [member](const ExperimentConfig& c) {
            return FormatVector(member(c));
          }};
}

#define FLOSS_MEMBER(expr) [](auto& c) -> auto& { return c.expr; }

const std::vector<Field>& Fields() {
  static const std::vector<Field>* fields = new std::vector<Field>{
      IntField("population.n_users", FLOSS_MEMBER(population.n_users)),
      IntField("population.dim_d", FLOSS_MEMBER(population.dim_d)),
      IntField("population.dim_x", FLOSS_MEMBER(population.dim_x)),
      IntField("population.samples_per_user",
               FLOSS_MEMBER(population.samples_per_user)),
      VectorField("population.true_theta", FLOSS_MEMBER(population.true_theta)),
      VectorField("population.z_on_d", FLOSS_MEMBER(population.z_on_d)),
      RealField("population.z_noise", FLOSS_MEMBER(population.z_noise)),
      VectorField("population.x_on_z", FLOSS_MEMBER(population.x_on_z)),
      Field{"population.x_on_d",
            [](ExperimentConfig& c, absl::string_view v) {
              return ParseMatrix(v, &c.population.x_on_d);
            },
            [](const ExperimentConfig& c) {
              return FormatMatrix(c.population.x_on_d);
            }},
      RealField("population.x_noise", FLOSS_MEMBER(population.x_noise)),
      RealField("population.s_intercept", FLOSS_MEMBER(population.s_intercept)),
      RealField("population.s_on_loss", FLOSS_MEMBER(population.s_on_loss)),
      RealField("population.s_on_y", FLOSS_MEMBER(population.s_on_y)),
      VectorField("population.s_on_x", FLOSS_MEMBER(population.s_on_x)),
      VectorField("population.s_on_d", FLOSS_MEMBER(population.s_on_d)),
      RealField("population.s_noise", FLOSS_MEMBER(population.s_noise)),
      RealField("population.s_nonresponse",
                FLOSS_MEMBER(population.s_nonresponse)),
      RealField("population.r_intercept", FLOSS_MEMBER(population.r_intercept)),
      VectorField("population.r_on_d", FLOSS_MEMBER(population.r_on_d)),
      RealField("population.r_on_s", FLOSS_MEMBER(population.r_on_s)),
      RealField("population.latency_location",
                FLOSS_MEMBER(population.latency_location)),
      VectorField("population.latency_on_d",
                  FLOSS_MEMBER(population.latency_on_d)),
      RealField("population.latency_scale",
                FLOSS_MEMBER(population.latency_scale)),
      Field{"population.seed",
            [](ExperimentConfig& c, absl::string_view v) {
              return ParseU64(v, &c.population.seed);
            },
            [](const ExperimentConfig& c) {
              return absl::StrCat(c.population.seed);
            }},
      RealField("train.eta", FLOSS_MEMBER(train.eta)),
      IntField("train.k", FLOSS_MEMBER(train.k)),
      IntField("train.max_iterations", FLOSS_MEMBER(train.max_iterations)),
      RealField("train.straggler_cutoff", FLOSS_MEMBER(train.straggler_cutoff)),
      IntField("train.rounds", FLOSS_MEMBER(train.rounds)),
      RealField("dp.clip_norm", FLOSS_MEMBER(dp.clip_norm)),
      RealField("dp.noise_sigma", FLOSS_MEMBER(dp.noise_sigma)),
      RealField("propensity.tol", FLOSS_MEMBER(solver.tol)),
      IntField("propensity.max_iter", FLOSS_MEMBER(solver.max_iter)),
      RealField("propensity.weight_cap", FLOSS_MEMBER(weight_cap)),
      Field{"experiment.modes",
            [](ExperimentConfig& c, absl::string_view v) -> absl::Status {
              c.modes.clear();
              for (absl::string_view name : SplitList(v, ',')) {
                FLOSS_ASSIGN_OR_RETURN(Mode m, ParseMode(name));
                c.modes.push_back(m);
              }
              return absl::OkStatus();
            },
            [](const ExperimentConfig& c) {
              std::vector<std::string> names;
              for (Mode m : c.modes) names.emplace_back(ModeName(m));
              return absl::StrJoin(names, ", ");
            }},
      Field{"experiment.client_counts",
            [](ExperimentConfig& c, absl::string_view v) -> absl::Status {
              c.client_counts.clear();
              for (absl::string_view part : SplitList(v, ',')) {
                int n = 0;
                FLOSS_RETURN_IF_ERROR(ParseInt(part, &n));
                c.client_counts.push_back(n);
              }
              return absl::OkStatus();
            },
            [](const ExperimentConfig& c) {
              return absl::StrJoin(c.client_counts, ", ");
            }},
      Field{"experiment.seeds",
            [](ExperimentConfig& c, absl::string_view v) -> absl::Status {
              c.seeds.clear();
              for (absl::string_view part : SplitList(v, ',')) {
                uint64_t s = 0;
                FLOSS_RETURN_IF_ERROR(ParseU64(part, &s));
                c.seeds.push_back(s);
              }
              return absl::OkStatus();
            },
            [](const ExperimentConfig& c) {
              return absl::StrJoin(c.seeds, ", ");
            }},
      IntField("experiment.test_users", FLOSS_MEMBER(test_users)),
      Field{"experiment.output",
            [](ExperimentConfig& c, absl::string_view v) {
              c.output = std::string(v);
              return absl::OkStatus();
            },
            [](const ExperimentConfig& c) { return c.output; }},
  };
  return *fields;
}

#undef FLOSS_MEMBER

}  // namespace

ExperimentConfig ExperimentConfig::Default() {
  ExperimentConfig c;
  c.population = PopulationConfig::Default();
  c.modes = AllModes();
  c.client_counts = {50, 100, 200, 500, 1000};
  for (uint64_t s = 1; s <= 10; ++s) c.seeds.push_back(s);
  return c;
}

absl::Status ExperimentConfig::Validate() const {
  FLOSS_RETURN_IF_ERROR(population.Validate());
  FLOSS_RETURN_IF_ERROR(Settings(Mode::kFullParticipation).Validate());
  if (modes.empty()) {
    return absl::InvalidArgumentError("experiment.modes must not be empty");
  }
  absl::flat_hash_set<Mode> seen_modes;
  for (Mode m : modes) {
    if (!seen_modes.insert(m).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("experiment.modes lists '", ModeName(m), "' twice"));
    }
  }
  if (client_counts.empty()) {
    return absl::InvalidArgumentError(
        "experiment.client_counts must not be empty");
  }
  absl::flat_hash_set<int> seen_counts;
  for (int n : client_counts) {
    if (n < 1) {
      return absl::InvalidArgumentError(
          "experiment.client_counts entries must be >= 1");
    }
    if (!seen_counts.insert(n).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("experiment.client_counts lists ", n, " twice"));
    }
  }
  if (seeds.empty()) {
    return absl::InvalidArgumentError("experiment.seeds must not be empty");
  }
  absl::flat_hash_set<uint64_t> seen_seeds;
  for (uint64_t s : seeds) {
    if (!seen_seeds.insert(s).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("experiment.seeds lists ", s, " twice"));
    }
  }
  if (test_users < 1) {
    return absl::InvalidArgumentError("experiment.test_users must be >= 1");
  }
  if (output.empty()) {
    return absl::InvalidArgumentError("experiment.output must not be empty");
  }
  return absl::OkStatus();
}

SimulationSettings ExperimentConfig::Settings(Mode mode) const {
  SimulationSettings s;
  s.mode = mode;
  s.train = train;
  s.dp = dp;
  s.solver = solver;
  s.weight_cap = weight_cap;
  return s;
}

absl::StatusOr<ExperimentConfig> ParseExperimentConfig(absl::string_view text) {
  ExperimentConfig config = ExperimentConfig::Default();
  absl::flat_hash_set<std::string> seen;
  int line_no = 0;
  for (absl::string_view line : absl::StrSplit(text, '\n')) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != absl::string_view::npos) line = line.substr(0, hash);
    line = absl::StripAsciiWhitespace(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == absl::string_view::npos) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": expected 'section.key = value'"));
    }
    const std::string key(absl::StripAsciiWhitespace(line.substr(0, eq)));
    const absl::string_view value =
        absl::StripAsciiWhitespace(line.substr(eq + 1));
    const Field* field = nullptr;
    for (const Field& f : Fields()) {
      if (f.key == key) field = &f;
    }
    if (field == nullptr) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": unknown key '", key, "'"));
    }
    if (!seen.insert(key).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": duplicate key '", key, "'"));
    }
    absl::Status st = field->set(config, value);
    if (!st.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": ", key, ": ", st.message()));
    }
  }
  FLOSS_RETURN_IF_ERROR(config.Validate());
  return config;
}

std::string SerializeExperimentConfig(const ExperimentConfig& config) {
  std::string out;
  for (const Field& f : Fields()) {
    absl::StrAppend(&out, f.key, " = ", f.get(config), "\n");
  }
  return out;
}

absl::StatusOr<ExperimentConfig> LoadExperimentConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  absl::StatusOr<ExperimentConfig> config = ParseExperimentConfig(buffer.str());
  if (!config.ok()) {
    return absl::Status(config.status().code(),
                        absl::StrCat(path, ": ", config.status().message()));
  }
  return config;
}

}  // namespace floss
