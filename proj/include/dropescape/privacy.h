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

#ifndef DROPESCAPE_PRIVACY_H_
#define DROPESCAPE_PRIVACY_H_

#include <span>

#include "absl/status/statusor.h"
#include "dropescape/core_math.h"
#include "dropescape/rng.h"

namespace dropescape {

// An (epsilon, delta) pair with epsilon > 0 and 0 < delta < 1.
class PrivacyBudget {
 public:
  static absl::StatusOr<PrivacyBudget> Create(double epsilon, double delta);

  double epsilon() const { return epsilon_; }
  double delta() const { return delta_; }
  // log(1 / delta).
  double LogInverseDelta() const;

 private:
  PrivacyBudget(double epsilon, double delta)
      : epsilon_(epsilon), delta_(delta) {}
  double epsilon_;
  double delta_;
};

// Standard deviation 2 * sensitivity * sqrt(log(1/delta)) / epsilon of the
// Gaussian mechanism, i.e. variance 4 sensitivity^2 log(1/delta) / epsilon^2.
absl::StatusOr<double> GaussianMechanismSigma(double sensitivity,
                                              const PrivacyBudget& budget);

// theta + N(0, sigma^2 I) with sigma from GaussianMechanismSigma. A zero
// sensitivity is rejected; release the exact value explicitly instead.
absl::StatusOr<RealVector> GaussianPerturb(std::span<const double> theta,
                                           double sensitivity,
                                           const PrivacyBudget& budget,
                                           SeededRng& rng);

struct PtrOutcome {
  bool pass = false;
  double noisy_value = 0.0;  // g_hat
  double threshold = 0.0;    // zeta + sensitivity * log(1/delta) / epsilon
};

// Propose-test-release safety test:
//   g_hat = g + Lap(sensitivity / epsilon),
//   pass iff g_hat > zeta + sensitivity * log(1/delta) / epsilon.
absl::StatusOr<PtrOutcome> PtrGate(double value, double sensitivity,
                                   double zeta, const PrivacyBudget& budget,
                                   SeededRng& rng);

// PtrGate with the Laplace draw supplied by the caller (for pinned-noise
// tests and replay).
absl::StatusOr<PtrOutcome> PtrGateWithNoise(double value, double sensitivity,
                                            double zeta,
                                            const PrivacyBudget& budget,
                                            double laplace_draw);

}  // namespace dropescape

#endif  // DROPESCAPE_PRIVACY_H_
