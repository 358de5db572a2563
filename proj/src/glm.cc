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

#include "dropescape/glm.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"

namespace dropescape {
namespace {

// 1 / (1 + exp(-z)) without overflow.
double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(-z)) without overflow.
double Softplus(double z) {
  return std::log1p(std::exp(-std::abs(z))) + std::max(-z, 0.0);
}

}  // namespace

absl::StatusOr<GlmLoss> GlmLoss::FromName(std::string_view name) {
  if (name == "squared") return Squared();
  if (name == "logistic") return Logistic();
  return absl::InvalidArgumentError(
      absl::StrCat("Unknown loss '", std::string(name), "'; expected squared or logistic"));
}

std::string GlmLoss::name() const {
  return kind_ == LossKind::kSquared ? "squared" : "logistic";
}

absl::Status GlmLoss::ValidateLabel(double y) const {
  if (!std::isfinite(y)) return absl::InvalidArgumentError("Non-finite label");
  if (kind_ == LossKind::kLogistic && y != 1.0 && y != -1.0) {
    return absl::InvalidArgumentError(
        absl::StrCat("Label error: logistic loss needs y in {-1, +1}, got ", y));
  }
  return absl::OkStatus();
}

absl::StatusOr<LossValue> GlmLoss::Eval(double u, double y) const {
  if (!std::isfinite(u)) return absl::InvalidArgumentError("Non-finite u");
  if (absl::Status s = ValidateLabel(y); !s.ok()) return s;
  return EvalUnchecked(u, y);
}

LossValue GlmLoss::EvalUnchecked(double u, double y) const {
  if (kind_ == LossKind::kSquared) {
    const double r = u - y;
    return {r * r, 2.0 * r, 2.0};
  }
  const double z = y * u;
  const double s = Sigmoid(z);
  return {Softplus(z), -y * (1.0 - s), s * (1.0 - s)};
}

double GlmLoss::Value(double u, double y) const {
  if (kind_ == LossKind::kSquared) return (u - y) * (u - y);
  return Softplus(y * u);
}

double GlmLoss::Derivative(double u, double y) const {
  if (kind_ == LossKind::kSquared) return 2.0 * (u - y);
  return -y * (1.0 - Sigmoid(y * u));
}

double GlmLoss::StrongConvexityOver(double u_bound) const {
  if (kind_ == LossKind::kSquared) return 2.0;
  const double s = Sigmoid(std::abs(u_bound));
  return s * (1.0 - s);
}

double GlmLoss::LipschitzOver(double u_bound, double y_bound) const {
  if (kind_ == LossKind::kSquared) return 2.0 * (u_bound + y_bound);
  return Sigmoid(std::abs(u_bound));
}

}  // namespace dropescape
