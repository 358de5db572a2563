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

#include "dropescape/dp_glm.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/strings/str_cat.h"
#include "dropescape/parallel.h"
#include "dropescape/rng.h"

namespace dropescape {
namespace {

// Stream ids kept apart from the boosting run indices 0..k-1.
constexpr uint64_t kPrivacyStream = 0x5052495600000000ULL;

absl::Status RequirePositive(double value, const char* name) {
  if (!(value > 0.0) || std::isnan(value)) {
    return absl::InvalidArgumentError(
        absl::StrCat("Parameter error: ", name, " must be positive, got ",
                     value));
  }
  return absl::OkStatus();
}

double Median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid]
                                : 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace

absl::StatusOr<StabilityBound> EpsilonModBound(
    const StabilityInputs& in, std::optional<double> highprob_delta) {
  for (auto [value, name] :
       {std::pair{in.lipschitz, "G"}, {in.norm_bound, "B"},
        {in.lambda, "Lambda"}, {in.delta1, "Delta1"}, {in.iterations, "T"},
        {in.n, "n"}, {in.c, "c"}}) {
    if (absl::Status s = RequirePositive(value, name); !s.ok()) return s;
  }
  if (!std::isfinite(in.iterations) || in.iterations < 2.0) {
    return absl::InvalidArgumentError(
        absl::StrCat("Parameter error: T must be at least 2, got ",
                     in.iterations));
  }
  for (double v : {in.lipschitz, in.norm_bound, in.lambda, in.delta1, in.c}) {
    if (!std::isfinite(v)) {
      return absl::InvalidArgumentError("Parameter error: non-finite input");
    }
  }
  StabilityBound out;
  out.inputs = in;
  const double spread =
      std::max(in.delta1 / in.lambda, in.lambda / in.delta1);
  const double rate =
      std::sqrt(std::log(in.iterations) * spread / in.iterations) + 1.0 / in.n;
  out.eps_mod = in.c * in.lipschitz * in.norm_bound / in.lambda * rate;
  if (highprob_delta.has_value()) {
    const double delta = *highprob_delta;
    if (!(delta > 0.0 && delta < 1.0)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "Parameter error: delta must lie in (0, 1), got ", delta));
    }
    out.high_probability = true;
    out.high_probability_factor = std::sqrt(-std::log(delta));
    out.eps_mod *= out.high_probability_factor;
  }
  return out;
}

absl::StatusOr<double> CalibrateStabilityConstant(double measured,
                                                  StabilityInputs in,
                                                  double margin) {
  if (!(measured >= 0.0)) {
    return absl::InvalidArgumentError("Measured stability must be >= 0");
  }
  if (absl::Status s = RequirePositive(margin, "margin"); !s.ok()) return s;
  in.c = 1.0;
  absl::StatusOr<StabilityBound> unit = EpsilonModBound(in);
  if (!unit.ok()) return unit.status();
  // A zero measurement still needs a usable positive constant.
  return std::max(margin * measured / unit->eps_mod,
                  std::numeric_limits<double>::min());
}

absl::StatusOr<double> EvaluateDropoutRisk(std::span<const double> theta,
                                           const Dataset& d,
                                           const GlmLoss& loss,
                                           double keep_rate, uint64_t seed) {
  if (loss.kind() == LossKind::kSquared) {
    return ExactDropoutRiskLeastSquares(theta, d, keep_rate);
  }
  return DropoutRiskMonteCarlo(theta, d, loss, keep_rate, kBoostingRiskSamples,
                               seed);
}

absl::StatusOr<BoostedResult> BoostedDropoutSgd(const Dataset& d,
                                                const GlmLoss& loss,
                                                const SgdConfig& cfg, int64_t k,
                                                int threads) {
  if (k < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("Parameter error: k must be >= 1, got ", k));
  }
  const size_t runs = static_cast<size_t>(k);
  std::vector<absl::StatusOr<TrainedModel>> models(
      runs, absl::UnknownError("not run"));
  std::vector<absl::StatusOr<double>> risks(runs,
                                            absl::UnknownError("not run"));
  const uint64_t eval_seed = DeriveSeed(cfg.seed, kRiskEvalStream);
  ParallelFor(runs, threads, [&](size_t j) {
    SgdConfig run_cfg = cfg;
    run_cfg.seed = DeriveSeed(cfg.seed, j);
    models[j] = TrainDropoutSgd(d, loss, run_cfg);
    if (models[j].ok()) {
      risks[j] = EvaluateDropoutRisk(models[j]->theta, d, loss, cfg.keep_rate,
                                     eval_seed);
    }
  });
  BoostedResult out;
  for (size_t j = 0; j < runs; ++j) {
    if (!models[j].ok()) return models[j].status();
    if (!risks[j].ok()) return risks[j].status();
    out.risks.push_back(*risks[j]);
    out.candidates.push_back(std::move(models[j]->theta));
  }
  out.j_star = static_cast<size_t>(
      std::min_element(out.risks.begin(), out.risks.end()) -
      out.risks.begin());
  out.theta_star = out.candidates[out.j_star];
  return out;
}

int64_t BoostingRuns(const PrivacyBudget& budget) {
  const double runs = std::ceil(budget.LogInverseDelta() - 1e-9);
  return std::max<int64_t>(1, static_cast<int64_t>(runs));
}

absl::StatusOr<double> LambdaForSigmaCap(StabilityInputs in,
                                         const PrivacyBudget& budget,
                                         double sigma_cap) {
  if (absl::Status s = RequirePositive(sigma_cap, "sigma_cap"); !s.ok()) {
    return s;
  }
  auto sigma_at = [&](double lambda) -> absl::StatusOr<double> {
    in.lambda = lambda;
    absl::StatusOr<StabilityBound> b = EpsilonModBound(in, budget.delta());
    if (!b.ok()) return b.status();
    return GaussianMechanismSigma(b->eps_mod, budget);
  };
  // sigma is strictly decreasing in Lambda.
  double hi = in.delta1 > 0.0 ? in.delta1 : 1.0;
  for (int i = 0;; ++i) {
    absl::StatusOr<double> s = sigma_at(hi);
    if (!s.ok()) return s.status();
    if (*s <= sigma_cap) break;
    if (i > 2000) {
      return absl::InvalidArgumentError("Parameter error: sigma_cap too small");
    }
    hi *= 2.0;
  }
  double lo = hi;
  for (int i = 0;; ++i) {
    absl::StatusOr<double> s = sigma_at(lo);
    if (!s.ok()) return s.status();
    if (*s > sigma_cap) break;
    if (i > 2000) return lo;
    lo *= 0.5;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    absl::StatusOr<double> s = sigma_at(mid);
    if (!s.ok()) return s.status();
    (*s <= sigma_cap ? hi : lo) = mid;
  }
  return hi;
}

absl::StatusOr<PrivateGlmResult> PrivateGlmTrain(
    const Dataset& d, const GlmLoss& loss, const SgdConfig& cfg,
    const PrivacyBudget& budget, double sigma_cap, bool proper,
    const PrivateGlmOptions& options) {
  if (d.empty()) return absl::FailedPreconditionError("Data error: empty");
  if (cfg.iterations < 2) {
    return absl::InvalidArgumentError("Parameter error: need T >= 2");
  }
  if (!cfg.constraint.bounded()) {
    return absl::InvalidArgumentError(
        "Parameter error: private training needs a bounded constraint set");
  }
  const bool squared = options.sensitivity == GateSensitivity::kSquared;
  const double n = static_cast<double>(d.size());
  const double b = d.norm_bound();

  PrivateGlmResult out;
  absl::StatusOr<double> lambda = LambdaStatistic(
      d, squared ? LambdaVariant::kSquared : LambdaVariant::kUnsquared);
  if (!lambda.ok()) return lambda.status();
  out.lambda = *lambda;
  out.gate_sensitivity = squared ? b * b / n : b / n;
  out.k = BoostingRuns(budget);

  absl::StatusOr<double> g =
      LipschitzOverConstraint(loss, d, cfg.constraint, 1.0 / cfg.keep_rate);
  if (!g.ok()) return g.status();
  const double delta1 = Delta1(d);
  StabilityInputs in{.lipschitz = std::max(*g, 1e-300),
                     .norm_bound = b,
                     .lambda = delta1,
                     .delta1 = delta1,
                     .iterations = static_cast<double>(cfg.iterations),
                     .n = n,
                     .c = options.calibration};
  absl::StatusOr<double> lambda_sigma = LambdaForSigmaCap(in, budget, sigma_cap);
  if (!lambda_sigma.ok()) return lambda_sigma.status();
  out.zeta = std::max(*lambda_sigma, delta1 / 2.0);

  SeededRng rng(cfg.seed, kPrivacyStream);
  const double gate_noise =
      options.pinned_gate_noise.has_value()
          ? *options.pinned_gate_noise
          : rng.Laplace(out.gate_sensitivity / budget.epsilon());
  absl::StatusOr<PtrOutcome> gate = PtrGateWithNoise(
      out.lambda, out.gate_sensitivity, out.zeta, budget, gate_noise);
  if (!gate.ok()) return gate.status();
  out.lambda_hat = gate->noisy_value;
  out.threshold = gate->threshold;
  out.pass = gate->pass;
  if (!out.pass) return out;

  in.lambda = out.zeta;
  absl::StatusOr<StabilityBound> bound = EpsilonModBound(in, budget.delta());
  if (!bound.ok()) return bound.status();
  out.eps_mod = bound->eps_mod;
  absl::StatusOr<double> sigma = GaussianMechanismSigma(out.eps_mod, budget);
  if (!sigma.ok()) return sigma.status();
  out.sigma = *sigma;

  absl::StatusOr<BoostedResult> boosted =
      BoostedDropoutSgd(d, loss, cfg, out.k, options.threads);
  if (!boosted.ok()) return boosted.status();
  out.nonprivate_theta = boosted->theta_star;
  out.nonprivate_dropout_risk = boosted->risks[boosted->j_star];

  absl::StatusOr<RealVector> noisy =
      GaussianPerturb(boosted->theta_star, out.eps_mod, budget, rng);
  if (!noisy.ok()) return noisy.status();
  out.theta = *std::move(noisy);
  if (proper) cfg.constraint.ProjectInPlace(out.theta);

  absl::StatusOr<double> risk =
      EvaluateDropoutRisk(out.theta, d, loss, cfg.keep_rate,
                          DeriveSeed(cfg.seed, kRiskEvalStream));
  if (!risk.ok()) return risk.status();
  out.final_dropout_risk = *risk;
  return out;
}

absl::StatusOr<StabilityMeasurement> ModelStabilityMeasure(
    const Dataset& d, size_t row_index, std::span<const double> replacement_x,
    double replacement_y, const GlmLoss& loss, const SgdConfig& cfg,
    int64_t trials, int threads) {
  if (trials < 1) {
    return absl::InvalidArgumentError("Parameter error: trials must be >= 1");
  }
  absl::StatusOr<Dataset> neighbour =
      d.WithRowReplaced(row_index, replacement_x, replacement_y);
  if (!neighbour.ok()) return neighbour.status();

  const size_t count = static_cast<size_t>(trials);
  std::vector<absl::StatusOr<double>> distances(
      count, absl::UnknownError("not run"));
  ParallelFor(count, threads, [&](size_t t) {
    SgdConfig trial_cfg = cfg;
    trial_cfg.seed = DeriveSeed(cfg.seed, t);
    absl::StatusOr<TrainedModel> a = TrainDropoutSgd(d, loss, trial_cfg);
    if (!a.ok()) {
      distances[t] = a.status();
      return;
    }
    absl::StatusOr<TrainedModel> b =
        TrainDropoutSgd(*neighbour, loss, trial_cfg);
    if (!b.ok()) {
      distances[t] = b.status();
      return;
    }
    double sq = 0.0;
    for (size_t j = 0; j < a->theta.size(); ++j) {
      const double diff = a->theta[j] - b->theta[j];
      sq += diff * diff;
    }
    distances[t] = std::sqrt(sq);
  });
  StabilityMeasurement out;
  double total = 0.0;
  for (auto& dist : distances) {
    if (!dist.ok()) return dist.status();
    out.distances.push_back(*dist);
    total += *dist;
  }
  out.mean = total / static_cast<double>(count);
  out.median = Median(out.distances);
  return out;
}

}  // namespace dropescape
