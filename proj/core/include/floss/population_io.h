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

#ifndef FLOSS_POPULATION_IO_H_
#define FLOSS_POPULATION_IO_H_

#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "floss/synth.h"

namespace floss {

// Tab-separated population dump, one row per user:
//
//   # floss-population v1 dim_d=<int> dim_x=<int> samples_per_user=<int>
//   id  d_rest  z  satisfaction  s  s_responded  r  latency_location
//   latency_scale  true_pi  dataset
//
// Vectors are comma-separated; `s` is NA when not recorded; the dataset is
// `x1,x2,...:y` samples joined by ';'. Reals are written with 17 significant
// digits so a dump reloads bit-exactly.
std::string FormatPopulation(const Population& population);

// Parses a dump into users; `config` supplies the dimensions to check
// against and is copied into the result.
absl::StatusOr<Population> ParsePopulation(absl::string_view text,
                                           const PopulationConfig& config);

absl::Status WritePopulation(const Population& population,
                             const std::string& path);
absl::StatusOr<Population> ReadPopulation(const std::string& path,
                                          const PopulationConfig& config);

}  // namespace floss

#endif  // FLOSS_POPULATION_IO_H_
