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

#include "dropescape/core_math.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "absl/strings/str_cat.h"

namespace dropescape {

absl::StatusOr<DropoutMask> DropoutMask::Create(std::vector<uint8_t> bits,
                                                double rate) {
  if (absl::Status s = ValidateKeepRate(rate); !s.ok()) return s;
  for (uint8_t bit : bits) {
    if (bit > 1) {
      return absl::InvalidArgumentError("Mask bits must be 0 or 1.");
    }
  }
  return DropoutMask(std::move(bits), rate);
}

DropoutMask DropoutMask::AllOnes(size_t size, double rate) {
  return DropoutMask(std::vector<uint8_t>(size, 1), rate);
}

DropoutMask DropoutMask::AllZeros(size_t size, double rate) {
  return DropoutMask(std::vector<uint8_t>(size, 0), rate);
}

size_t DropoutMask::CountOnes() const {
  return static_cast<size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

absl::Status ValidateKeepRate(double rate) {
  if (!(rate > 0.0 && rate <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("Keep rate must lie in (0, 1], got ", rate));
  }
  return absl::OkStatus();
}

absl::Status ValidateFinite(std::span<const double> values) {
  for (size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      return absl::InvalidArgumentError(
          absl::StrCat("Non-finite entry at index ", i));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<RealVector> Hadamard(std::span<const double> x,
                                    const DropoutMask& mask) {
  if (x.size() != mask.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Dimension mismatch: vector has ", x.size(), " entries, mask has ",
        mask.size()));
  }
  RealVector out(x.size());
  for (size_t j = 0; j < x.size(); ++j) out[j] = mask[j] ? x[j] : 0.0;
  return out;
}

void FillMaskBits(double rate, SeededRng& rng, std::span<uint8_t> bits) {
  for (uint8_t& bit : bits) bit = rng.Bernoulli(rate) ? 1 : 0;
}

absl::StatusOr<DropoutMask> SampleMask(size_t size, double rate,
                                       SeededRng& rng) {
  if (absl::Status s = ValidateKeepRate(rate); !s.ok()) return s;
  std::vector<uint8_t> bits(size);
  FillMaskBits(rate, rng, bits);
  return DropoutMask::Create(std::move(bits), rate);
}

absl::StatusOr<double> SampleLaplace(double scale, SeededRng& rng) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    return absl::InvalidArgumentError(
        absl::StrCat("Laplace scale must be positive, got ", scale));
  }
  return rng.Laplace(scale);
}

absl::StatusOr<RealVector> SampleGaussianVector(size_t size, double sigma,
                                                SeededRng& rng) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    return absl::InvalidArgumentError(
        absl::StrCat("Gaussian sigma must be positive, got ", sigma));
  }
  RealVector out(size);
  for (double& v : out) v = sigma * rng.StandardNormal();
  return out;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double SquaredNorm(std::span<const double> x) { return Dot(x, x); }

double Norm(std::span<const double> x) { return std::sqrt(SquaredNorm(x)); }

}  // namespace dropescape
