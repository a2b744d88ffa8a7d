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

#include "floss/rng.h"

namespace floss {

double Rng::Uniform() { return uniform_(engine_); }

double Rng::Gaussian() { return normal_(engine_); }

bool Rng::Bernoulli(double p) { return Uniform() < p; }

uint64_t MixSeed(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t DeriveSeed(uint64_t parent, std::initializer_list<uint64_t> labels) {
  uint64_t h = MixSeed(parent);
  for (uint64_t label : labels) h = MixSeed(h ^ MixSeed(label));
  return h;
}

}  // namespace floss
