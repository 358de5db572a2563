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

#ifndef DROPESCAPE_PROJECTION_H_
#define DROPESCAPE_PROJECTION_H_

#include <cstddef>
#include <span>
#include <string>

#include "absl/status/statusor.h"
#include "dropescape/core_math.h"

namespace dropescape {

// Euclidean projection onto the probability simplex
// {theta : theta_j >= 0, sum_j theta_j = 1}, by sorting and thresholding.
absl::StatusOr<RealVector> ProjectSimplex(std::span<const double> theta);

// Radial projection onto {theta : ||theta||_2 <= radius}.
absl::StatusOr<RealVector> ProjectL2Ball(std::span<const double> theta,
                                         double radius);

// Constraint set descriptor shared by the trainers.
class ConstraintSet {
 public:
  enum class Kind { kUnconstrained, kSimplex, kL2Ball, kBox };

  static ConstraintSet Unconstrained() { return ConstraintSet(); }
  static ConstraintSet Simplex();
  static absl::StatusOr<ConstraintSet> L2Ball(double radius);
  // The box [lower, upper]^p.
  static absl::StatusOr<ConstraintSet> Box(double lower, double upper);

  Kind kind() const { return kind_; }
  double radius() const { return radius_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  bool bounded() const { return kind_ != Kind::kUnconstrained; }

  // Largest L2 norm of a point of the set in `dim` dimensions; infinite when
  // unbounded.
  double MaxNorm(size_t dim) const;

  // Projects in place. Never fails for a well-formed descriptor.
  void ProjectInPlace(std::span<double> theta) const;
  RealVector Project(std::span<const double> theta) const;

  // Distance from theta to the set in the L2 norm.
  double Distance(std::span<const double> theta) const;

  std::string DebugString() const;

 private:
  ConstraintSet() = default;

  Kind kind_ = Kind::kUnconstrained;
  double radius_ = 0.0;
  double lower_ = 0.0;
  double upper_ = 0.0;
};

}  // namespace dropescape

#endif  // DROPESCAPE_PROJECTION_H_
