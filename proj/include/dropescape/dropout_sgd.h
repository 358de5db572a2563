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

#ifndef DROPESCAPE_DROPOUT_SGD_H_
#define DROPESCAPE_DROPOUT_SGD_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"
#include "dropescape/core_math.h"
#include "dropescape/dataset.h"
#include "dropescape/glm.h"
#include "dropescape/projection.h"

namespace dropescape {

// Step size as a function of the 1-based step index t.
using LearningRateRule = std::function<double(int64_t t)>;

// Default schedule eta_t = 1 / (delta1 * t).
LearningRateRule InverseTimeRate(double delta1);

struct SgdConfig {
  int64_t iterations = 0;
  double keep_rate = 0.5;
  ConstraintSet constraint = ConstraintSet::Unconstrained();
  // Empty means InverseTimeRate(Delta1(d)).
  LearningRateRule learning_rate;
  // Empty means the zero vector, projected onto the constraint set.
  RealVector initial_theta;
  uint64_t seed = 0;
  // Record the dropout risk every `log_every` steps (0 disables logging).
  int64_t log_every = 0;
  // Mask samples for the Monte Carlo risk of non-quadratic losses in the log.
  int64_t log_risk_samples = 256;
};

struct RiskPoint {
  int64_t step = 0;
  double dropout_risk = 0.0;
};

struct TrainedModel {
  RealVector theta;
  std::vector<RiskPoint> trajectory;
  int64_t iterations = 0;
  double keep_rate = 0.0;
  uint64_t seed = 0;
};

// Dropout stochastic gradient descent.
//
// Each step samples a row uniformly and a mask b with keep rate alpha, forms
// the unbiased prediction u = <theta, b * x> / alpha, and moves
//   theta <- Proj_C(theta - eta_t * l'(u; y) * (b * x) / alpha).
// The row and mask for step t come from SeededRng(cfg.seed) only, so two runs
// with the same seed on replace-one neighbours share all randomness.
absl::StatusOr<TrainedModel> TrainDropoutSgd(const Dataset& d,
                                             const GlmLoss& loss,
                                             const SgdConfig& cfg);

// Monte Carlo dropout risk (1/n) sum_i E_b[l(<theta, b * x_i> / alpha; y_i)]
// with `samples` fresh masks per row.
absl::StatusOr<double> DropoutRiskMonteCarlo(std::span<const double> theta,
                                             const Dataset& d,
                                             const GlmLoss& loss,
                                             double keep_rate, int64_t samples,
                                             uint64_t seed);

// Exact dropout risk of the squared loss at keep rate alpha:
//   (1/n) sum_i (y_i - <x_i, theta>)^2
//     + (1 - alpha) / alpha * theta^T diag((1/n) sum_i x_i x_i^T) theta.
absl::StatusOr<double> ExactDropoutRiskLeastSquares(
    std::span<const double> theta, const Dataset& d, double keep_rate = 0.5);

// Gradient of ExactDropoutRiskLeastSquares with respect to theta.
RealVector ExactDropoutRiskLeastSquaresGradient(std::span<const double> theta,
                                                const Dataset& d,
                                                double keep_rate = 0.5);

struct ErmOptions {
  // Stop once the gradient-mapping norm is at most this.
  double tolerance = 1e-10;
  int64_t max_iterations = 1'000'000;
  RealVector initial_theta;  // empty means zero
};

// Minimises (1/n) sum_i l(2 <x_i * b_i, theta>; y_i) over the constraint set
// by projected gradient descent with a fixed set of per-row masks.
absl::StatusOr<RealVector> SolveDropoutErm(const Dataset& d,
                                           std::span<const DropoutMask> masks,
                                           const GlmLoss& loss,
                                           const ConstraintSet& c,
                                           const ErmOptions& options = {});

// Minimises ExactDropoutRiskLeastSquares over the constraint set by projected
// gradient descent. Used as the reference optimum for excess-risk checks.
absl::StatusOr<RealVector> MinimizeExactDropoutRiskLeastSquares(
    const Dataset& d, double keep_rate, const ConstraintSet& c,
    const ErmOptions& options = {});

// Hessian of the exact squared-loss dropout risk:
//   2 * [S + (1 - alpha) / alpha * diag(S)],  S = (1/n) sum_i x_i x_i^T.
absl::StatusOr<Eigen::MatrixXd> ExpectedDropoutHessianLeastSquares(
    const Dataset& d, double keep_rate);

// Smallest eigenvalue of ExpectedDropoutHessianLeastSquares. keep_rate = 1
// gives the unmasked Hessian 2S.
absl::StatusOr<double> ExpectedHessianMinEigenvalue(const Dataset& d,
                                                    double keep_rate = 0.5);

}  // namespace dropescape

#endif  // DROPESCAPE_DROPOUT_SGD_H_
