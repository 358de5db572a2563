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

#include "dropescape/projection.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "absl/strings/str_cat.h"

namespace dropescape {
namespace {

void SimplexInPlace(std::span<double> theta) {
  RealVector sorted(theta.begin(), theta.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  // Largest k with sorted[k-1] - (sum of top k - 1) / k > 0.
  double prefix = 0.0;
  double tau = 0.0;
  for (size_t k = 0; k < sorted.size(); ++k) {
    prefix += sorted[k];
    const double candidate = (prefix - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) tau = candidate;
  }
  for (double& v : theta) v = std::max(v - tau, 0.0);
}

void BallInPlace(std::span<double> theta, double radius) {
  const double norm = Norm(theta);
  if (norm <= radius) return;
  const double scale = radius / norm;
  for (double& v : theta) v *= scale;
}

}  // namespace

absl::StatusOr<RealVector> ProjectSimplex(std::span<const double> theta) {
  if (theta.empty()) {
    return absl::InvalidArgumentError(
        "Dimension error: cannot project an empty vector onto the simplex.");
  }
  if (absl::Status s = ValidateFinite(theta); !s.ok()) return s;
  RealVector out(theta.begin(), theta.end());
  SimplexInPlace(out);
  return out;
}

absl::StatusOr<RealVector> ProjectL2Ball(std::span<const double> theta,
                                         double radius) {
  if (!(radius > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("Ball radius must be positive, got ", radius));
  }
  RealVector out(theta.begin(), theta.end());
  BallInPlace(out, radius);
  return out;
}

ConstraintSet ConstraintSet::Simplex() {
  ConstraintSet c;
  c.kind_ = Kind::kSimplex;
  c.radius_ = 1.0;
  return c;
}

absl::StatusOr<ConstraintSet> ConstraintSet::L2Ball(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    return absl::InvalidArgumentError(
        absl::StrCat("Ball radius must be positive and finite, got ", radius));
  }
  ConstraintSet c;
  c.kind_ = Kind::kL2Ball;
  c.radius_ = radius;
  return c;
}

absl::StatusOr<ConstraintSet> ConstraintSet::Box(double lower, double upper) {
  if (!(lower <= upper) || !std::isfinite(lower) || !std::isfinite(upper)) {
    return absl::InvalidArgumentError(
        absl::StrCat("Invalid box [", lower, ", ", upper, "]"));
  }
  ConstraintSet c;
  c.kind_ = Kind::kBox;
  c.lower_ = lower;
  c.upper_ = upper;
  return c;
}

double ConstraintSet::MaxNorm(size_t dim) const {
  switch (kind_) {
    case Kind::kUnconstrained:
      return std::numeric_limits<double>::infinity();
    case Kind::kSimplex:
      return 1.0;
    case Kind::kL2Ball:
      return radius_;
    case Kind::kBox:
      return std::sqrt(static_cast<double>(dim)) *
             std::max(std::abs(lower_), std::abs(upper_));
  }
  return std::numeric_limits<double>::infinity();
}

void ConstraintSet::ProjectInPlace(std::span<double> theta) const {
  switch (kind_) {
    case Kind::kUnconstrained:
      return;
    case Kind::kSimplex:
      if (!theta.empty()) SimplexInPlace(theta);
      return;
    case Kind::kL2Ball:
      BallInPlace(theta, radius_);
      return;
    case Kind::kBox:
      for (double& v : theta) v = std::clamp(v, lower_, upper_);
      return;
  }
}

RealVector ConstraintSet::Project(std::span<const double> theta) const {
  RealVector out(theta.begin(), theta.end());
  ProjectInPlace(out);
  return out;
}

double ConstraintSet::Distance(std::span<const double> theta) const {
  const RealVector projected = Project(theta);
  double sum = 0.0;
  for (size_t j = 0; j < theta.size(); ++j) {
    const double d = theta[j] - projected[j];
    sum += d * d;
  }
  return std::sqrt(sum);
}

std::string ConstraintSet::DebugString() const {
  switch (kind_) {
    case Kind::kUnconstrained:
      return "unconstrained";
    case Kind::kSimplex:
      return "simplex";
    case Kind::kL2Ball:
      return absl::StrCat("l2ball(", radius_, ")");
    case Kind::kBox:
      return absl::StrCat("box(", lower_, ",", upper_, ")");
  }
  return "unknown";
}

}  // namespace dropescape
