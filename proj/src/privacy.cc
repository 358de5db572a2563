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

#include "dropescape/privacy.h"

#include <cmath>

#include "absl/strings/str_cat.h"

namespace dropescape {
namespace {

absl::Status ValidateSensitivity(double sensitivity) {
  if (!(sensitivity > 0.0) || !std::isfinite(sensitivity)) {
    return absl::InvalidArgumentError(
        absl::StrCat("Sensitivity must be positive and finite, got ",
                     sensitivity));
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<PrivacyBudget> PrivacyBudget::Create(double epsilon,
                                                    double delta) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be positive, got ", epsilon));
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("delta must lie in (0, 1), got ", delta));
  }
  return PrivacyBudget(epsilon, delta);
}

double PrivacyBudget::LogInverseDelta() const { return -std::log(delta_); }

absl::StatusOr<double> GaussianMechanismSigma(double sensitivity,
                                              const PrivacyBudget& budget) {
  if (absl::Status s = ValidateSensitivity(sensitivity); !s.ok()) return s;
  return 2.0 * sensitivity * std::sqrt(budget.LogInverseDelta()) /
         budget.epsilon();
}

absl::StatusOr<RealVector> GaussianPerturb(std::span<const double> theta,
                                           double sensitivity,
                                           const PrivacyBudget& budget,
                                           SeededRng& rng) {
  absl::StatusOr<double> sigma = GaussianMechanismSigma(sensitivity, budget);
  if (!sigma.ok()) return sigma.status();
  RealVector out(theta.begin(), theta.end());
  for (double& v : out) v += *sigma * rng.StandardNormal();
  return out;
}

absl::StatusOr<PtrOutcome> PtrGateWithNoise(double value, double sensitivity,
                                            double zeta,
                                            const PrivacyBudget& budget,
                                            double laplace_draw) {
  if (absl::Status s = ValidateSensitivity(sensitivity); !s.ok()) return s;
  if (!std::isfinite(value) || !std::isfinite(zeta)) {
    return absl::InvalidArgumentError("Gate value and zeta must be finite");
  }
  PtrOutcome out;
  out.noisy_value = value + laplace_draw;
  out.threshold =
      zeta + sensitivity * budget.LogInverseDelta() / budget.epsilon();
  out.pass = out.noisy_value > out.threshold;
  return out;
}

absl::StatusOr<PtrOutcome> PtrGate(double value, double sensitivity,
                                   double zeta, const PrivacyBudget& budget,
                                   SeededRng& rng) {
  if (absl::Status s = ValidateSensitivity(sensitivity); !s.ok()) return s;
  return PtrGateWithNoise(value, sensitivity, zeta, budget,
                          rng.Laplace(sensitivity / budget.epsilon()));
}

}  // namespace dropescape
