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

#ifndef DROPESCAPE_GLM_H_
#define DROPESCAPE_GLM_H_

#include <string>
#include <string_view>

#include "absl/status/statusor.h"

namespace dropescape {

enum class LossKind { kSquared, kLogistic };

struct LossValue {
  double value = 0.0;
  double first = 0.0;   // d loss / du
  double second = 0.0;  // d^2 loss / du^2
};

// A per-example convex loss l(u; y) of the linear prediction u.
//
//   squared:  (u - y)^2                       (curvature 2 everywhere)
//   logistic: log(1 + exp(-y u)), y in {-1, +1}
class GlmLoss {
 public:
  static GlmLoss Squared() { return GlmLoss(LossKind::kSquared); }
  static GlmLoss Logistic() { return GlmLoss(LossKind::kLogistic); }
  static absl::StatusOr<GlmLoss> FromName(std::string_view name);

  LossKind kind() const { return kind_; }
  std::string name() const;

  // Validates the label and evaluates value and derivatives.
  absl::StatusOr<LossValue> Eval(double u, double y) const;

  // Same as Eval without label checks; for inner loops over validated data.
  LossValue EvalUnchecked(double u, double y) const;
  double Value(double u, double y) const;
  double Derivative(double u, double y) const;

  absl::Status ValidateLabel(double y) const;

  // Minimum of d^2 l / du^2 over |u| <= u_bound.
  double StrongConvexityOver(double u_bound) const;

  // Maximum of |d l / du| over |u| <= u_bound and |y| <= y_bound.
  double LipschitzOver(double u_bound, double y_bound) const;

 private:
  explicit GlmLoss(LossKind kind) : kind_(kind) {}
  LossKind kind_;
};

}  // namespace dropescape

#endif  // DROPESCAPE_GLM_H_
