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

#ifndef DROPESCAPE_DP_GLM_H_
#define DROPESCAPE_DP_GLM_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "dropescape/core_math.h"
#include "dropescape/dataset.h"
#include "dropescape/dropout_sgd.h"
#include "dropescape/glm.h"
#include "dropescape/privacy.h"

namespace dropescape {

struct StabilityInputs {
  double lipschitz = 1.0;     // G
  double norm_bound = 1.0;    // B
  double lambda = 1.0;        // Lambda
  double delta1 = 1.0;        // Delta_1
  double iterations = 2.0;    // T, at least 2
  double n = 1.0;             // may be +infinity
  double c = 1.0;             // calibration constant
};

struct StabilityBound {
  double eps_mod = 0.0;
  StabilityInputs inputs;
  bool high_probability = false;
  double high_probability_factor = 1.0;  // sqrt(log(1/delta)) or 1
};

// eps_mod = c (G B / Lambda) (sqrt(log T max{Delta1/Lambda, Lambda/Delta1} / T)
//           + 1/n),
// times sqrt(log(1/delta)) when `highprob_delta` is given.
absl::StatusOr<StabilityBound> EpsilonModBound(
    const StabilityInputs& in,
    std::optional<double> highprob_delta = std::nullopt);

// The constant c for which `measured` sits at 1/margin of the bound. Fit once
// per instance family, then reuse on new instances.
absl::StatusOr<double> CalibrateStabilityConstant(double measured,
                                                  StabilityInputs in,
                                                  double margin = 2.0);

struct BoostedResult {
  RealVector theta_star;
  size_t j_star = 0;
  std::vector<double> risks;  // J of every candidate
  std::vector<RealVector> candidates;
};

// Mask samples for the Monte Carlo J of non-quadratic losses.
inline constexpr int64_t kBoostingRiskSamples = 10'000;

// Every candidate's J is evaluated with DeriveSeed(cfg.seed, kRiskEvalStream).
inline constexpr uint64_t kRiskEvalStream = 0x5249534b00000000ULL;

// Runs TrainDropoutSgd k times, run j seeded with DeriveSeed(cfg.seed, j), and
// keeps the run with the smallest dropout risk J (exact for the squared loss,
// Monte Carlo with a common seed otherwise; ties go to the lowest j).
absl::StatusOr<BoostedResult> BoostedDropoutSgd(const Dataset& d,
                                                const GlmLoss& loss,
                                                const SgdConfig& cfg, int64_t k,
                                                int threads = 1);

// Dropout risk J used for selection and reporting.
absl::StatusOr<double> EvaluateDropoutRisk(std::span<const double> theta,
                                           const Dataset& d,
                                           const GlmLoss& loss,
                                           double keep_rate, uint64_t seed);

// ceil(log(1/delta)), at least 1. Values within 1e-9 of an integer round down
// so that delta = e^-3 gives exactly 3.
int64_t BoostingRuns(const PrivacyBudget& budget);

enum class GateSensitivity {
  kSquared,    // B^2 / n with the squared column statistic
  kUnsquared,  // B / n with the unsquared column statistic
};

struct PrivateGlmOptions {
  double calibration = 1.0;
  GateSensitivity sensitivity = GateSensitivity::kSquared;
  // Replaces the gate's Laplace draw.
  std::optional<double> pinned_gate_noise;
  int threads = 1;
};

struct PrivateGlmResult {
  bool pass = false;
  double lambda = 0.0;
  double lambda_hat = 0.0;
  double zeta = 0.0;
  double threshold = 0.0;
  double gate_sensitivity = 0.0;
  int64_t k = 0;
  double sigma = 0.0;
  double eps_mod = 0.0;
  // Set only when the gate passes.
  RealVector theta;
  RealVector nonprivate_theta;
  std::optional<double> final_dropout_risk;
  std::optional<double> nonprivate_dropout_risk;
};

// Smallest Lambda whose high-probability eps_mod yields a Gaussian sigma of at
// most sigma_cap, found by bisection.
absl::StatusOr<double> LambdaForSigmaCap(StabilityInputs in,
                                         const PrivacyBudget& budget,
                                         double sigma_cap);

// Propose-test-release private training:
//   1. zeta = max(LambdaForSigmaCap, Delta1 / 2);
//   2. gate Lambda(d) with the PTR test (sensitivity B^2/n or B/n);
//   3. on pass, boosted dropout SGD with k = BoostingRuns(budget);
//   4. Gaussian output perturbation with sensitivity eps_mod at Lambda = zeta;
//   5. project onto the constraint set when `proper`.
// A failed gate is reported in the result with pass = false, not as an error.
absl::StatusOr<PrivateGlmResult> PrivateGlmTrain(
    const Dataset& d, const GlmLoss& loss, const SgdConfig& cfg,
    const PrivacyBudget& budget, double sigma_cap, bool proper,
    const PrivateGlmOptions& options = {});

struct StabilityMeasurement {
  double mean = 0.0;
  double median = 0.0;
  std::vector<double> distances;
};

// Estimates E ||theta_T(D) - theta_T(D')||_2 for the replace-one neighbour D'
// obtained by swapping row `row_index`. Trial t trains on both datasets with
// seed DeriveSeed(cfg.seed, t), so the pair shares its sample and mask streams.
absl::StatusOr<StabilityMeasurement> ModelStabilityMeasure(
    const Dataset& d, size_t row_index, std::span<const double> replacement_x,
    double replacement_y, const GlmLoss& loss, const SgdConfig& cfg,
    int64_t trials, int threads = 1);

}  // namespace dropescape

#endif  // DROPESCAPE_DP_GLM_H_
