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

#ifndef DROPESCAPE_CORE_MATH_H_
#define DROPESCAPE_CORE_MATH_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dropescape/rng.h"

namespace dropescape {

using RealVector = std::vector<double>;

// Binary dropout mask. A bit of 1 keeps the coordinate (or node); each bit is
// 1 with probability `rate`, so `rate` is the keep rate.
class DropoutMask {
 public:
  DropoutMask() = default;

  // Fails unless every bit is 0 or 1 and rate is in (0, 1].
  static absl::StatusOr<DropoutMask> Create(std::vector<uint8_t> bits,
                                            double rate);
  static DropoutMask AllOnes(size_t size, double rate = 1.0);
  static DropoutMask AllZeros(size_t size, double rate = 0.5);

  size_t size() const { return bits_.size(); }
  double rate() const { return rate_; }
  std::span<const uint8_t> bits() const { return bits_; }
  uint8_t operator[](size_t i) const { return bits_[i]; }
  size_t CountOnes() const;

  friend bool operator==(const DropoutMask&, const DropoutMask&) = default;

 private:
  DropoutMask(std::vector<uint8_t> bits, double rate)
      : bits_(std::move(bits)), rate_(rate) {}

  std::vector<uint8_t> bits_;
  double rate_ = 1.0;
};

// Returns an error unless rate lies in (0, 1].
absl::Status ValidateKeepRate(double rate);

// Returns an error if any entry is NaN or infinite.
absl::Status ValidateFinite(std::span<const double> values);

// Coordinatewise product x * b.
absl::StatusOr<RealVector> Hadamard(std::span<const double> x,
                                    const DropoutMask& mask);

// Draws `size` independent bits, each 1 with probability `rate`.
absl::StatusOr<DropoutMask> SampleMask(size_t size, double rate,
                                       SeededRng& rng);

// Fills `bits` in place; the caller guarantees rate is valid. Hot loops use
// this to avoid allocating a mask per step.
void FillMaskBits(double rate, SeededRng& rng, std::span<uint8_t> bits);

// One draw from the Laplace density exp(-|x| / scale) / (2 scale).
absl::StatusOr<double> SampleLaplace(double scale, SeededRng& rng);

// `size` independent N(0, sigma^2) draws.
absl::StatusOr<RealVector> SampleGaussianVector(size_t size, double sigma,
                                                SeededRng& rng);

double Dot(std::span<const double> a, std::span<const double> b);
double SquaredNorm(std::span<const double> x);
double Norm(std::span<const double> x);

}  // namespace dropescape

#endif  // DROPESCAPE_CORE_MATH_H_
