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

#ifndef FLOSS_RNG_H_
#define FLOSS_RNG_H_

#include <cstdint>
#include <initializer_list>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace floss {

// Portable pseudo-random stream. The engine (64-bit Mersenne Twister) and the
// distribution code both come from Boost.Random headers, so a given seed
// yields the same sequence with every compiler and standard library; the
// std:: distributions make no such guarantee.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1).
  double Uniform();
  // Standard normal.
  double Gaussian();
  bool Bernoulli(double p);

  boost::random::mt19937_64& engine() { return engine_; }

 private:
  boost::random::mt19937_64 engine_;
  boost::random::uniform_01<double> uniform_;
  boost::random::normal_distribution<double> normal_;
};

// SplitMix64 finalizer; used to derive well-separated seeds.
uint64_t MixSeed(uint64_t x);

// Derives a child seed from a parent seed and a sequence of stream labels.
// Distinct label sequences give statistically independent streams.
uint64_t DeriveSeed(uint64_t parent, std::initializer_list<uint64_t> labels);

}  // namespace floss

#endif  // FLOSS_RNG_H_
