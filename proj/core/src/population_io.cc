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

#include "floss/population_io.h"

#include <fstream>
#include <sstream>
#include <vector>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "floss/status_macros.h"

namespace floss {
namespace {

constexpr absl::string_view kColumns =
    "id\td_rest\tz\tsatisfaction\ts\ts_responded\tr\tlatency_location\t"
    "latency_scale\ttrue_pi\tdataset";

std::string Real(double v) { return absl::StrFormat("%.17g", v); }

std::string Vec(const Eigen::Ref<const Eigen::VectorXd>& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    out += Real(v[i]);
  }
  return out;
}

absl::Status RowError(int line, absl::string_view message) {
  return absl::InvalidArgumentError(
      absl::StrCat("population line ", line, ": ", message));
}

absl::StatusOr<double> ParseReal(absl::string_view s, int line) {
  double v;
  if (!absl::SimpleAtod(s, &v)) {
    return RowError(line, absl::StrCat("bad number '", s, "'"));
  }
  return v;
}

absl::StatusOr<Eigen::VectorXd> ParseVec(absl::string_view s, int expected,
                                         int line) {
  std::vector<absl::string_view> parts = absl::StrSplit(s, ',');
  if (static_cast<int>(parts.size()) != expected) {
    return RowError(line, absl::StrCat("expected ", expected,
                                       " components in '", s, "'"));
  }
  Eigen::VectorXd v(expected);
  for (int i = 0; i < expected; ++i) {
    FLOSS_ASSIGN_OR_RETURN(v[i], ParseReal(parts[i], line));
  }
  return v;
}

absl::StatusOr<int> ParseInt(absl::string_view s, int line) {
  int v;
  if (!absl::SimpleAtoi(s, &v)) {
    return RowError(line, absl::StrCat("bad integer '", s, "'"));
  }
  return v;
}

}  // namespace

std::string FormatPopulation(const Population& population) {
  const PopulationConfig& c = population.config;
  std::string out = absl::StrCat("# floss-population v1 dim_d=", c.dim_d,
                                 " dim_x=", c.dim_x, " samples_per_user=",
                                 c.samples_per_user, "\n", kColumns, "\n");
  for (const UserRecord& u : population.users) {
    std::string dataset;
    for (int i = 0; i < u.dataset.size(); ++i) {
      if (i > 0) dataset += ';';
      absl::StrAppend(&dataset, Vec(u.dataset.features.row(i).transpose()),
                      ":", static_cast<int>(u.dataset.labels[i]));
    }
    absl::StrAppend(&out, u.id, "\t", Vec(u.d_rest), "\t", Real(u.z), "\t",
                    Real(u.satisfaction), "\t",
                    u.s.has_value() ? Real(*u.s) : "NA", "\t",
                    u.s_responded ? 1 : 0, "\t", u.r, "\t",
                    Real(u.latency.location), "\t", Real(u.latency.scale),
                    "\t", Real(u.true_pi), "\t", dataset, "\n");
  }
  return out;
}

absl::StatusOr<Population> ParsePopulation(absl::string_view text,
                                           const PopulationConfig& config) {
  Population pop;
  pop.config = config;
  const std::string expected_magic = absl::StrCat(
      "# floss-population v1 dim_d=", config.dim_d, " dim_x=", config.dim_x,
      " samples_per_user=", config.samples_per_user);

  int line_no = 0;
  for (absl::string_view line : absl::StrSplit(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1) {
      if (line != expected_magic) {
        return RowError(1, absl::StrCat("header '", line,
                                        "' does not match config (expected '",
                                        expected_magic, "')"));
      }
      continue;
    }
    if (line_no == 2) {
      if (line != kColumns) return RowError(2, "unexpected column header");
      continue;
    }
    if (line.empty()) continue;

    std::vector<absl::string_view> col = absl::StrSplit(line, '\t');
    if (col.size() != 11) {
      return RowError(line_no,
                      absl::StrCat("expected 11 columns, got ", col.size()));
    }
    UserRecord u;
    FLOSS_ASSIGN_OR_RETURN(u.id, ParseInt(col[0], line_no));
    FLOSS_ASSIGN_OR_RETURN(u.d_rest, ParseVec(col[1], config.dim_d, line_no));
    FLOSS_ASSIGN_OR_RETURN(u.z, ParseReal(col[2], line_no));
    FLOSS_ASSIGN_OR_RETURN(u.satisfaction, ParseReal(col[3], line_no));
    if (col[4] != "NA") {
      FLOSS_ASSIGN_OR_RETURN(double s, ParseReal(col[4], line_no));
      u.s = s;
    }
    FLOSS_ASSIGN_OR_RETURN(int responded, ParseInt(col[5], line_no));
    FLOSS_ASSIGN_OR_RETURN(u.r, ParseInt(col[6], line_no));
    if ((responded != 0 && responded != 1) || (u.r != 0 && u.r != 1)) {
      return RowError(line_no, "s_responded and r must be 0 or 1");
    }
    u.s_responded = responded == 1;
    if (u.s_responded != u.s.has_value()) {
      return RowError(line_no, "s must be present exactly when s_responded");
    }
    FLOSS_ASSIGN_OR_RETURN(u.latency.location, ParseReal(col[7], line_no));
    FLOSS_ASSIGN_OR_RETURN(u.latency.scale, ParseReal(col[8], line_no));
    FLOSS_ASSIGN_OR_RETURN(u.true_pi, ParseReal(col[9], line_no));
    if (!(u.true_pi > 0 && u.true_pi <= 1)) {
      return RowError(line_no, "true_pi must lie in (0, 1]");
    }

    std::vector<absl::string_view> samples = absl::StrSplit(col[10], ';');
    if (static_cast<int>(samples.size()) != config.samples_per_user) {
      return RowError(line_no, absl::StrCat("expected ",
                                            config.samples_per_user,
                                            " samples, got ", samples.size()));
    }
    u.dataset.features.resize(config.samples_per_user, config.dim_x);
    u.dataset.labels.resize(config.samples_per_user);
    for (int i = 0; i < config.samples_per_user; ++i) {
      std::vector<absl::string_view> xy = absl::StrSplit(samples[i], ':');
      if (xy.size() != 2 || (xy[1] != "0" && xy[1] != "1")) {
        return RowError(line_no, absl::StrCat("bad sample '", samples[i], "'"));
      }
      FLOSS_ASSIGN_OR_RETURN(Eigen::VectorXd x,
                             ParseVec(xy[0], config.dim_x, line_no));
      u.dataset.features.row(i) = x.transpose();
      u.dataset.labels[i] = xy[1] == "1" ? 1.0 : 0.0;
    }
    pop.users.push_back(std::move(u));
  }
  if (line_no < 2) return RowError(line_no, "truncated population file");
  return pop;
}

absl::Status WritePopulation(const Population& population,
                             const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    return absl::PermissionDeniedError(
        absl::StrCat("cannot open ", path, " for writing"));
  }
  out << FormatPopulation(population);
  if (!out) return absl::DataLossError(absl::StrCat("write to ", path, " failed"));
  return absl::OkStatus();
}

absl::StatusOr<Population> ReadPopulation(const std::string& path,
                                          const PopulationConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParsePopulation(buffer.str(), config);
}

}  // namespace floss
