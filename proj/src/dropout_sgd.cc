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

#include "dropescape/dropout_sgd.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "absl/strings/str_cat.h"

namespace dropescape {
namespace {

absl::Status ValidateTheta(std::span<const double> theta, const Dataset& d) {
  if (theta.size() != d.dim()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Dimension error: theta has ", theta.size(), " entries, data has ",
        d.dim(), " features"));
  }
  return ValidateFinite(theta);
}

absl::Status ValidateLabels(const Dataset& d, const GlmLoss& loss) {
  for (double y : d.labels()) {
    if (absl::Status s = loss.ValidateLabel(y); !s.ok()) return s;
  }
  return absl::OkStatus();
}

Eigen::MatrixXd SecondMoment(const Dataset& d) {
  const Eigen::Index p = static_cast<Eigen::Index>(d.dim());
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(p, p);
  for (size_t i = 0; i < d.size(); ++i) {
    const Eigen::Map<const Eigen::VectorXd> x(d.row(i).data(), p);
    s.selfadjointView<Eigen::Lower>().rankUpdate(x);
  }
  s = s.selfadjointView<Eigen::Lower>();
  return s / static_cast<double>(d.size());
}

double MaxEigenvalue(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

using GradientFn = std::function<void(std::span<const double>, RealVector&)>;

// Accelerated projected gradient with gradient-based restarts. Stops when the
// gradient mapping L * ||theta - Proj(theta - grad / L)|| is at most tol.
absl::StatusOr<RealVector> ProjectedGradientSolve(const GradientFn& gradient,
                                                  double smoothness,
                                                  const ConstraintSet& c,
                                                  RealVector theta,
                                                  const ErmOptions& options) {
  c.ProjectInPlace(theta);
  if (!(smoothness > 0.0)) return theta;
  const size_t p = theta.size();
  const double step = 1.0 / smoothness;
  RealVector y = theta, grad(p), next(p);
  double momentum = 1.0;
  double residual = std::numeric_limits<double>::infinity();
  for (int64_t it = 0; it < options.max_iterations; ++it) {
    // Convergence check at the current iterate.
    gradient(theta, grad);
    for (size_t j = 0; j < p; ++j) next[j] = theta[j] - step * grad[j];
    c.ProjectInPlace(next);
    double mapping = 0.0;
    for (size_t j = 0; j < p; ++j) {
      const double g = (theta[j] - next[j]) * smoothness;
      mapping += g * g;
    }
    residual = std::sqrt(mapping);
    if (residual <= options.tolerance) return theta;

    gradient(y, grad);
    for (size_t j = 0; j < p; ++j) next[j] = y[j] - step * grad[j];
    c.ProjectInPlace(next);
    // Restart when the step opposes the momentum direction.
    double alignment = 0.0;
    for (size_t j = 0; j < p; ++j) {
      alignment += (y[j] - next[j]) * (next[j] - theta[j]);
    }
    double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    double beta = (momentum - 1.0) / next_momentum;
    if (alignment > 0.0) {
      next_momentum = 1.0;
      beta = 0.0;
    }
    for (size_t j = 0; j < p; ++j) {
      y[j] = next[j] + beta * (next[j] - theta[j]);
    }
    theta.swap(next);
    momentum = next_momentum;
  }
  return absl::ResourceExhaustedError(absl::StrCat(
      "Convergence error: gradient mapping ", residual, " above tolerance ",
      options.tolerance, " after ", options.max_iterations, " iterations"));
}

}  // namespace

LearningRateRule InverseTimeRate(double delta1) {
  return [delta1](int64_t t) { return 1.0 / (delta1 * static_cast<double>(t)); };
}

absl::StatusOr<TrainedModel> TrainDropoutSgd(const Dataset& d,
                                             const GlmLoss& loss,
                                             const SgdConfig& cfg) {
  if (d.empty()) return absl::FailedPreconditionError("Data error: empty dataset");
  if (cfg.iterations < 0) {
    return absl::InvalidArgumentError("Iteration count must be >= 0");
  }
  if (absl::Status s = ValidateKeepRate(cfg.keep_rate); !s.ok()) return s;
  if (absl::Status s = ValidateLabels(d, loss); !s.ok()) return s;
  const size_t p = d.dim();

  TrainedModel model;
  model.iterations = cfg.iterations;
  model.keep_rate = cfg.keep_rate;
  model.seed = cfg.seed;
  if (cfg.initial_theta.empty()) {
    model.theta.assign(p, 0.0);
    cfg.constraint.ProjectInPlace(model.theta);
  } else {
    if (absl::Status s = ValidateTheta(cfg.initial_theta, d); !s.ok()) return s;
    model.theta = cfg.initial_theta;
  }
  if (cfg.iterations == 0) return model;

  LearningRateRule rate = cfg.learning_rate;
  if (!rate) {
    const double delta1 = Delta1(d);
    if (!(delta1 > 0.0)) {
      return absl::FailedPreconditionError(
          "Degenerate data: Delta_1 = 0, so the default step size "
          "1/(Delta_1 t) is undefined.");
    }
    rate = InverseTimeRate(delta1);
  }

  const bool exact_risk = loss.kind() == LossKind::kSquared;
  auto log_risk = [&](int64_t step) -> absl::Status {
    absl::StatusOr<double> risk =
        exact_risk ? ExactDropoutRiskLeastSquares(model.theta, d, cfg.keep_rate)
                   : DropoutRiskMonteCarlo(model.theta, d, loss, cfg.keep_rate,
                                           cfg.log_risk_samples,
                                           DeriveSeed(cfg.seed, 1));
    if (!risk.ok()) return risk.status();
    model.trajectory.push_back({step, *risk});
    return absl::OkStatus();
  };
  if (cfg.log_every > 0) {
    if (absl::Status s = log_risk(0); !s.ok()) return s;
  }

  SeededRng rng(cfg.seed);
  const double inv_rate = 1.0 / cfg.keep_rate;
  std::vector<uint8_t> bits(p);
  RealVector& theta = model.theta;
  for (int64_t t = 1; t <= cfg.iterations; ++t) {
    const size_t i = rng.UniformIndex(d.size());
    FillMaskBits(cfg.keep_rate, rng, bits);
    const auto x = d.row(i);
    double u = 0.0;
    for (size_t j = 0; j < p; ++j) {
      if (bits[j]) u += theta[j] * x[j];
    }
    u *= inv_rate;
    const double scale = rate(t) * inv_rate * loss.Derivative(u, d.label(i));
    for (size_t j = 0; j < p; ++j) {
      if (bits[j]) theta[j] -= scale * x[j];
    }
    cfg.constraint.ProjectInPlace(theta);
    if (cfg.log_every > 0 && t % cfg.log_every == 0) {
      if (absl::Status s = log_risk(t); !s.ok()) return s;
    }
  }
  if (absl::Status s = ValidateFinite(theta); !s.ok()) {
    return absl::InternalError(
        absl::StrCat("Training diverged: ", s.message()));
  }
  return model;
}

absl::StatusOr<double> DropoutRiskMonteCarlo(std::span<const double> theta,
                                             const Dataset& d,
                                             const GlmLoss& loss,
                                             double keep_rate, int64_t samples,
                                             uint64_t seed) {
  if (samples < 1) return absl::InvalidArgumentError("samples must be >= 1");
  if (d.empty()) return absl::FailedPreconditionError("Data error: empty dataset");
  if (absl::Status s = ValidateKeepRate(keep_rate); !s.ok()) return s;
  if (absl::Status s = ValidateTheta(theta, d); !s.ok()) return s;
  if (absl::Status s = ValidateLabels(d, loss); !s.ok()) return s;

  SeededRng rng(seed);
  const double inv_rate = 1.0 / keep_rate;
  double total = 0.0;
  for (size_t i = 0; i < d.size(); ++i) {
    const auto x = d.row(i);
    double row_total = 0.0;
    for (int64_t s = 0; s < samples; ++s) {
      double u = 0.0;
      for (size_t j = 0; j < x.size(); ++j) {
        if (rng.Bernoulli(keep_rate)) u += theta[j] * x[j];
      }
      row_total += loss.Value(u * inv_rate, d.label(i));
    }
    total += row_total / static_cast<double>(samples);
  }
  return total / static_cast<double>(d.size());
}

absl::StatusOr<double> ExactDropoutRiskLeastSquares(
    std::span<const double> theta, const Dataset& d, double keep_rate) {
  if (d.empty()) return absl::FailedPreconditionError("Data error: empty dataset");
  if (absl::Status s = ValidateKeepRate(keep_rate); !s.ok()) return s;
  if (absl::Status s = ValidateTheta(theta, d); !s.ok()) return s;
  const double variance_factor = (1.0 - keep_rate) / keep_rate;
  double fit = 0.0;
  double penalty = 0.0;
  for (size_t i = 0; i < d.size(); ++i) {
    const auto x = d.row(i);
    const double r = d.label(i) - Dot(x, theta);
    fit += r * r;
    for (size_t j = 0; j < x.size(); ++j) {
      const double v = x[j] * theta[j];
      penalty += v * v;
    }
  }
  return (fit + variance_factor * penalty) / static_cast<double>(d.size());
}

RealVector ExactDropoutRiskLeastSquaresGradient(std::span<const double> theta,
                                                const Dataset& d,
                                                double keep_rate) {
  const double variance_factor = (1.0 - keep_rate) / keep_rate;
  const double inv_n = 1.0 / static_cast<double>(d.size());
  RealVector grad(d.dim(), 0.0);
  for (size_t i = 0; i < d.size(); ++i) {
    const auto x = d.row(i);
    const double r = Dot(x, theta) - d.label(i);
    for (size_t j = 0; j < x.size(); ++j) {
      grad[j] += 2.0 * inv_n * (r * x[j] + variance_factor * x[j] * x[j] * theta[j]);
    }
  }
  return grad;
}

absl::StatusOr<RealVector> SolveDropoutErm(const Dataset& d,
                                           std::span<const DropoutMask> masks,
                                           const GlmLoss& loss,
                                           const ConstraintSet& c,
                                           const ErmOptions& options) {
  if (d.empty()) return absl::FailedPreconditionError("Data error: empty dataset");
  if (masks.size() != d.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Need one mask per row: ", masks.size(), " masks for ", d.size(),
        " rows"));
  }
  for (const DropoutMask& m : masks) {
    if (m.size() != d.dim()) {
      return absl::InvalidArgumentError("Dimension error: mask length");
    }
  }
  if (!(options.tolerance > 0.0)) {
    return absl::InvalidArgumentError("Tolerance must be positive");
  }
  if (absl::Status s = ValidateLabels(d, loss); !s.ok()) return s;
  RealVector theta = options.initial_theta;
  if (theta.empty()) theta.assign(d.dim(), 0.0);
  if (absl::Status s = ValidateTheta(theta, d); !s.ok()) return s;

  // Masked rows z_i = x_i * b_i.
  const size_t n = d.size(), p = d.dim();
  RealVector masked(n * p);
  for (size_t i = 0; i < n; ++i) {
    const auto x = d.row(i);
    for (size_t j = 0; j < p; ++j) masked[i * p + j] = masks[i][j] ? x[j] : 0.0;
  }
  absl::StatusOr<Dataset> masked_data =
      Dataset::FromFlat(p, masked, RealVector(d.labels().begin(), d.labels().end()));
  if (!masked_data.ok()) return masked_data.status();

  // d^2/dtheta^2 of l(2 <z, theta>) is 4 l'' z z^T.
  const double curvature_bound = loss.kind() == LossKind::kSquared ? 2.0 : 0.25;
  const double smoothness =
      4.0 * curvature_bound * MaxEigenvalue(SecondMoment(*masked_data));
  const double inv_n = 1.0 / static_cast<double>(n);
  GradientFn gradient = [&](std::span<const double> th, RealVector& grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (size_t i = 0; i < n; ++i) {
      const double* z = masked.data() + i * p;
      double u = 0.0;
      for (size_t j = 0; j < p; ++j) u += z[j] * th[j];
      const double g = 2.0 * inv_n * loss.Derivative(2.0 * u, d.label(i));
      for (size_t j = 0; j < p; ++j) grad[j] += g * z[j];
    }
  };
  return ProjectedGradientSolve(gradient, smoothness, c, std::move(theta),
                                options);
}

absl::StatusOr<RealVector> MinimizeExactDropoutRiskLeastSquares(
    const Dataset& d, double keep_rate, const ConstraintSet& c,
    const ErmOptions& options) {
  absl::StatusOr<Eigen::MatrixXd> hessian =
      ExpectedDropoutHessianLeastSquares(d, keep_rate);
  if (!hessian.ok()) return hessian.status();
  RealVector theta = options.initial_theta;
  if (theta.empty()) theta.assign(d.dim(), 0.0);
  if (absl::Status s = ValidateTheta(theta, d); !s.ok()) return s;
  GradientFn gradient = [&](std::span<const double> th, RealVector& grad) {
    grad = ExactDropoutRiskLeastSquaresGradient(th, d, keep_rate);
  };
  return ProjectedGradientSolve(gradient, MaxEigenvalue(*hessian), c,
                                std::move(theta), options);
}

absl::StatusOr<Eigen::MatrixXd> ExpectedDropoutHessianLeastSquares(
    const Dataset& d, double keep_rate) {
  if (d.empty()) return absl::FailedPreconditionError("Data error: empty dataset");
  if (absl::Status s = ValidateKeepRate(keep_rate); !s.ok()) return s;
  const Eigen::MatrixXd s = SecondMoment(d);
  const double variance_factor = (1.0 - keep_rate) / keep_rate;
  Eigen::MatrixXd h = s;
  h.diagonal() += variance_factor * s.diagonal();
  return 2.0 * h;
}

absl::StatusOr<double> ExpectedHessianMinEigenvalue(const Dataset& d,
                                                    double keep_rate) {
  absl::StatusOr<Eigen::MatrixXd> h =
      ExpectedDropoutHessianLeastSquares(d, keep_rate);
  if (!h.ok()) return h.status();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(*h,
                                                        Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

}  // namespace dropescape
