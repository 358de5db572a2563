//
// Copyright 2026 The DropEscape Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DROPESCAPE_RNG_H_
#define DROPESCAPE_RNG_H_

#include <array>
#include <cstddef>
#include <cstdint>

namespace dropescape {

// Mixes a 64-bit value with the SplitMix64 finalizer.
uint64_t SplitMix64(uint64_t x);

// Combines a seed and a stream id into a new seed. Used to hand independent,
// reproducible streams to parallel trials and to boosting runs.
uint64_t DeriveSeed(uint64_t seed, uint64_t stream);

// Pseudo-random generator addressed by an explicit (seed, stream) pair.
//
// The engine is xoshiro256** whose 256-bit state is filled by SplitMix64 from
// DeriveSeed(seed, stream). All derived variates (uniform, Bernoulli, normal,
// Laplace) are computed here from raw 64-bit outputs rather than through
// <random> distributions, so identical (seed, stream) pairs give identical
// sequences on every standard library.
class SeededRng {
 public:
  explicit SeededRng(uint64_t seed, uint64_t stream = 0);

  uint64_t seed() const { return seed_; }
  uint64_t stream() const { return stream_; }

  // A generator on a child stream. Does not advance this generator.
  SeededRng Fork(uint64_t child) const;

  uint64_t NextU64();

  // Uniform on [0, 1) with 53 random bits.
  double Uniform();

  // Uniform on the open interval (0, 1).
  double UniformOpen();

  // Uniform integer in [0, n). n must be positive.
  size_t UniformIndex(size_t n);

  // True with probability `p`. p >= 1 is always true, p <= 0 always false.
  bool Bernoulli(double p);

  // Standard normal variate by the Box-Muller transform (one value per call).
  double StandardNormal();

  // Zero-mean Laplace variate with the given scale; no argument checking.
  double Laplace(double scale);

 private:
  uint64_t seed_;
  uint64_t stream_;
  std::array<uint64_t, 4> state_;
};

}  // namespace dropescape

#endif  // DROPESCAPE_RNG_H_
