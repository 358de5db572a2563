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

// End-to-end acceptance checks. Prints one [PASS]/[FAIL] line per criterion
// and exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "Eigen/Dense"
#include "absl/strings/str_format.h"
#include "dropescape/dataset.h"
#include "dropescape/dp_glm.h"
#include "dropescape/dp_simplex.h"
#include "dropescape/dropout_sgd.h"
#include "dropescape/experiment.h"
#include "dropescape/netescape.h"
#include "dropescape/privacy.h"
#include "dropescape/projection.h"
#include "test_fixtures.h"
#include "test_oracles.h"

namespace dropescape {
namespace {

using testing_fixtures::Median;
using testing_fixtures::WellConditionedLeastSquares;

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome Fail(const absl::Status& status) {
  return {false, std::string(status.message())};
}

#define ACCEPT_ASSIGN(lhs, expr)              \
  auto lhs##_or = (expr);                     \
  if (!lhs##_or.ok()) return Fail(lhs##_or.status()); \
  auto& lhs = *lhs##_or

RealVector Gaussian(size_t p, SeededRng& rng) {
  RealVector v(p);
  for (double& x : v) x = rng.StandardNormal();
  return v;
}

// 1. The node-dropout perturbation is unbiased.
Outcome UnbiasedPerturbation() {
  SeededRng rng(101);
  RealVector alphas(8);
  std::vector<RealVector> thetas;
  for (double& a : alphas) a = 0.1 + rng.Uniform();
  for (int i = 0; i < 8; ++i) thetas.push_back(Gaussian(4, rng));
  ACCEPT_ASSIGN(net, OneHiddenNet::Create(alphas, thetas, Link::Identity()));
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    const RealVector x = Gaussian(4, rng);
    ACCEPT_ASSIGN(mean, ExhaustiveMaskMean(net, x));
    ACCEPT_ASSIGN(g, NetEval(net, x));
    worst = std::max(worst, std::abs(mean - g));
  }
  return {worst <= 1e-12, absl::StrFormat("max |E g_hat - g| = %.3g", worst)};
}

// 2. Escape frequency on a constructed instance.
Outcome EscapeFrequency() {
  ACCEPT_ASSIGN(inst, OrthonormalEscapeInstance(8, 10, 1.0, 0.9, 202));
  const SampleDistribution dist{DistributionKind::kStandardNormal, 10};
  ACCEPT_ASSIGN(report, EscapeTrial(inst.g, inst.f, dist, 10'000, 100'000, 203));
  const bool pass =
      report.preconditions_hold() && report.success_frequency >= 0.115;
  return {pass,
          absl::StrFormat("frequency %.4f, factor %.4f, norm pre %d, error "
                          "pre %d (error %.4g vs threshold %.4g)",
                          report.success_frequency, report.factor,
                          report.norm_precondition, report.error_precondition,
                          report.initial_error, report.error_threshold)};
}

// 3. Error decomposition identity on shared samples.
Outcome ErrorIdentityHolds() {
  const SampleDistribution dist{DistributionKind::kStandardNormal, 4};
  ACCEPT_ASSIGN(samples, SampleSet::Draw(dist, 2000, 301));
  SeededRng rng(302);
  double worst = 0.0;
  auto random_net = [&](Link link) {
    RealVector alphas(5);
    std::vector<RealVector> thetas;
    for (double& a : alphas) a = rng.Uniform();
    for (int i = 0; i < 5; ++i) thetas.push_back(Gaussian(4, rng));
    return *OneHiddenNet::Create(alphas, thetas, link);
  };
  for (int t = 0; t < 100; ++t) {
    const Link link = t % 3 == 0   ? Link::Identity()
                      : t % 3 == 1 ? Link::Tanh()
                                   : *Link::Monomial(2);
    const OneHiddenNet g = random_net(link);
    const OneHiddenNet f = random_net(link);
    const PerturbedNet gh = DropoutPerturb(g, rng);
    const ErrorIdentity e = ErrorIdentityDecompose(
        AsFunction(g), AsFunction(gh.net), AsFunction(f), samples);
    const double scale =
        std::max({std::abs(e.lhs), std::abs(e.a), std::abs(e.b), 1e-300});
    worst = std::max(worst, std::abs(e.lhs - (e.a + e.b)) / scale);
  }
  return {worst <= 1e-9, absl::StrFormat("max relative gap %.3g", worst)};
}

// 4. Closed-form least-squares dropout risk.
Outcome ClosedFormRisk() {
  const Dataset d = testing_fixtures::GaussianDataset(20, 5, 401);
  SeededRng rng(402);
  const RealVector theta = Gaussian(5, rng);
  ACCEPT_ASSIGN(exact, ExactDropoutRiskLeastSquares(theta, d, 0.5));
  // 50,000 masks per row: 10^6 masked evaluations in total.
  ACCEPT_ASSIGN(mc, DropoutRiskMonteCarlo(theta, d, GlmLoss::Squared(), 0.5,
                                          50'000, 403));
  const double rel = std::abs(mc - exact) / exact;

  const Dataset d10 = testing_fixtures::GaussianDataset(20, 10, 404);
  const RealVector theta10 = Gaussian(10, rng);
  ACCEPT_ASSIGN(exact10, ExactDropoutRiskLeastSquares(theta10, d10, 0.5));
  const double enumerated =
      testing_oracles::ExhaustiveDropoutRiskLeastSquares(theta10, d10, 0.5);
  const double gap = std::abs(exact10 - enumerated);
  return {rel <= 0.005 && gap <= 1e-12 * std::max(1.0, enumerated),
          absl::StrFormat("MC relative error %.3g%%, enumeration gap %.3g",
                          100 * rel, gap)};
}

// Central second differences of a scalar function of theta.
Eigen::MatrixXd FiniteDifferenceHessian(
    const std::function<double(const RealVector&)>& f, const RealVector& at,
    double h) {
  const size_t p = at.size();
  Eigen::MatrixXd hess(p, p);
  for (size_t j = 0; j < p; ++j) {
    for (size_t k = 0; k < p; ++k) {
      auto eval = [&](double sj, double sk) {
        RealVector t = at;
        t[j] += sj * h;
        t[k] += sk * h;
        return f(t);
      };
      hess(j, k) = (eval(1, 1) - eval(1, -1) - eval(-1, 1) + eval(-1, -1)) /
                   (4 * h * h);
    }
  }
  return hess;
}

double MinEigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (m + m.transpose()));
  return solver.eigenvalues().minCoeff();
}

// All rows parallel to `direction`, with varied scales.
Dataset RankOne(const RealVector& direction, size_t n, uint64_t seed) {
  SeededRng rng(seed);
  std::vector<RealVector> rows;
  RealVector labels;
  for (size_t i = 0; i < n; ++i) {
    const double scale = 0.5 + rng.Uniform();
    RealVector r = direction;
    for (double& v : r) v *= scale;
    rows.push_back(r);
    labels.push_back(rng.StandardNormal());
  }
  return *Dataset::Create(rows, labels);
}

// 5. Dropout makes the least-squares risk strongly convex on rank-1 data.
Outcome StrongConvexification() {
  const double s = 1.0 / std::sqrt(2.0);
  const Dataset d2 = RankOne({s, s}, 10, 501);
  ACCEPT_ASSIGN(dropout2, ExpectedHessianMinEigenvalue(d2, 0.5));
  ACCEPT_ASSIGN(plain2, ExpectedHessianMinEigenvalue(d2, 1.0));
  const double delta2 = Delta1(d2);
  const bool exact_ok =
      delta2 > 0 && dropout2 >= 2 * delta2 * (1 - 1e-12) && std::abs(plain2) <= 1e-12;

  const Dataset d5 = RankOne({0.1, -0.4, 0.3, 0.8, -0.2}, 12, 502);
  const RealVector at = {0.3, -0.2, 0.5, 0.1, -0.4};
  const Eigen::MatrixXd fd_dropout = FiniteDifferenceHessian(
      [&](const RealVector& t) {
        return *ExactDropoutRiskLeastSquares(t, d5, 0.5);
      },
      at, 1e-3);
  const Eigen::MatrixXd fd_plain = FiniteDifferenceHessian(
      [&](const RealVector& t) {
        return *ExactDropoutRiskLeastSquares(t, d5, 1.0);
      },
      at, 1e-3);
  ACCEPT_ASSIGN(analytic, ExpectedDropoutHessianLeastSquares(d5, 0.5));
  const double fd_gap = (fd_dropout - analytic).cwiseAbs().maxCoeff();
  const double fd_min = MinEigenvalue(fd_dropout);
  const double fd_plain_min = MinEigenvalue(fd_plain);
  const double delta5 = Delta1(d5);
  const bool fd_ok = fd_gap <= 1e-4 && fd_min >= 2 * delta5 - 1e-4 &&
                     delta5 > 0 && std::abs(fd_plain_min) <= 1e-4;
  return {exact_ok && fd_ok,
          absl::StrFormat("p=2: min eig %.4g vs 2*Delta1 %.4g, unmasked %.2g; "
                          "p=5 FD: min eig %.4g vs 2*Delta1 %.4g, unmasked "
                          "%.2g, max gap %.2g",
                          dropout2, 2 * delta2, plain2, fd_min, 2 * delta5,
                          fd_plain_min, fd_gap)};
}

// 6. Excess dropout risk of SGD shrinks with the horizon.
Outcome SgdRate() {
  const Dataset d = WellConditionedLeastSquares(200, 5, 0.5, 22);
  ACCEPT_ASSIGN(c, ConstraintSet::L2Ball(10.0));
  ACCEPT_ASSIGN(star, MinimizeExactDropoutRiskLeastSquares(d, 0.5, c));
  ACCEPT_ASSIGN(j_star, ExactDropoutRiskLeastSquares(star, d, 0.5));
  std::vector<double> at_t, at_4t;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    for (int64_t t : {1000, 4000}) {
      SgdConfig cfg;
      cfg.constraint = c;
      cfg.seed = seed;
      cfg.iterations = t;
      ACCEPT_ASSIGN(model, TrainDropoutSgd(d, GlmLoss::Squared(), cfg));
      ACCEPT_ASSIGN(j, ExactDropoutRiskLeastSquares(model.theta, d, 0.5));
      (t == 1000 ? at_t : at_4t).push_back(j - j_star);
    }
  }
  const double ratio = Median(at_4t) / Median(at_t);
  return {ratio <= 0.75,
          absl::StrFormat("median excess %.4g at T, %.4g at 4T, ratio %.3f",
                          Median(at_t), Median(at_4t), ratio)};
}

// 7. Binomial likelihood-ratio bound.
Outcome BinomialRatio() {
  int checked = 0, violations = 0, expected = 0;
  for (int64_t nu = 2; nu <= 40; nu += 2) {
    expected += static_cast<int>(nu / 2);  // k = 0 .. nu/2 - 1
    ACCEPT_ASSIGN(rows, BinomialRatioCheck(nu));
    for (const BinomialRatioRow& r : rows) {
      ++checked;
      if (!r.within_bound) ++violations;
    }
  }
  return {violations == 0 && checked == expected,
          absl::StrFormat("%d (nu, k) pairs, %d violations", checked,
                          violations)};
}

// Random neighbours: row k of d is replaced by its complement; both datasets
// have every column count >= 2.
std::pair<BinaryDataset, BinaryDataset> AuditPair(size_t n, uint64_t seed) {
  for (uint64_t attempt = 0;; ++attempt) {
    const uint64_t s = DeriveSeed(seed, attempt);
    const BinaryDataset d = *RandomBinaryDataset(n, 2, 0.5, s);
    const size_t k = SeededRng(s, 1).UniformIndex(n);
    std::vector<uint8_t> row(d.row(k).begin(), d.row(k).end());
    for (auto& b : row) b ^= 1;
    const BinaryDataset e = *d.WithRowReplaced(k, row);
    bool ok = true;
    for (size_t j = 0; j < 2; ++j) {
      ok &= d.ColumnCount(j) >= 2 && e.ColumnCount(j) >= 2;
    }
    if (ok) return {d, e};
  }
}

// 8. Exact privacy audit of the dropout argmin.
Outcome PrivacyAudit() {
  std::vector<double> medians;
  double worst_sum = 0.0, worst_factor_gap = 0.0;
  bool all_finite = true;
  for (size_t n : {6, 10, 14}) {
    std::vector<double> ratios;
    for (uint64_t inst = 0; inst < 20; ++inst) {
      const auto [d, e] = AuditPair(n, 800 + 100 * n + inst);
      ACCEPT_ASSIGN(factored, AuditArgminDistributionFactorized(d, e));
      const ArgminAudit* audit = &factored;
      ArgminAudit exhaustive;
      if (n * 2 <= kMaxExhaustiveAuditBits) {
        ACCEPT_ASSIGN(ex, AuditArgminDistribution(d, e));
        exhaustive = ex;
        for (size_t j = 0; j < 2; ++j) {
          worst_factor_gap =
              std::max({worst_factor_gap,
                        std::abs(ex.prob_d[j] - factored.prob_d[j]),
                        std::abs(ex.prob_d_prime[j] - factored.prob_d_prime[j])});
        }
        audit = &exhaustive;
      }
      double sd = 0.0, se = 0.0;
      for (size_t j = 0; j < 2; ++j) {
        sd += audit->prob_d[j];
        se += audit->prob_d_prime[j];
      }
      worst_sum = std::max({worst_sum, std::abs(sd - 1), std::abs(se - 1)});
      all_finite &= std::isfinite(audit->max_ratio);
      ratios.push_back(audit->max_ratio);
    }
    medians.push_back(Median(ratios));
  }
  const bool pass = worst_sum <= 1e-12 && worst_factor_gap <= 1e-12 &&
                    all_finite && medians[0] > medians[1] &&
                    medians[1] > medians[2];
  return {pass,
          absl::StrFormat("median max ratio %.4f (n=6), %.4f (n=10), %.4f "
                          "(n=14); sum error %.2g; exhaustive vs factorized "
                          "%.2g",
                          medians[0], medians[1], medians[2], worst_sum,
                          worst_factor_gap)};
}

// 9. Tail behaviour of the propose-test-release gate.
Outcome PtrTails() {
  const double eta = 0.01, zeta = 0.5, delta = 0.01;
  ACCEPT_ASSIGN(budget, PrivacyBudget::Create(1.0, delta));
  const double margin = 2 * eta * std::log(1 / delta) / budget.epsilon();
  const int trials = 100'000;
  SeededRng rng(901);
  int wrong_fail = 0, wrong_pass = 0;
  for (int t = 0; t < trials; ++t) {
    ACCEPT_ASSIGN(high, PtrGate(zeta + margin, eta, zeta, budget, rng));
    ACCEPT_ASSIGN(low, PtrGate(zeta - margin, eta, zeta, budget, rng));
    wrong_fail += !high.pass;
    wrong_pass += low.pass;
  }
  const double bound = delta + 3 * std::sqrt(delta * (1 - delta) / trials);
  const double fail_rate = wrong_fail / double(trials);
  const double pass_rate = wrong_pass / double(trials);
  return {fail_rate <= bound && pass_rate <= bound,
          absl::StrFormat("wrongful fail %.5f, wrongful pass %.5f, bound %.5f",
                          fail_rate, pass_rate, bound)};
}

// 10. Gaussian mechanism variance.
Outcome GaussianMechanism() {
  const double eta = 0.1;
  ACCEPT_ASSIGN(budget, PrivacyBudget::Create(1.0, 0.01));
  SeededRng rng(1001);
  ACCEPT_ASSIGN(noisy,
                GaussianPerturb(RealVector(1'000'000, 0.0), eta, budget, rng));
  double mean = 0.0;
  for (double v : noisy) mean += v / noisy.size();
  double var = 0.0;
  for (double v : noisy) var += (v - mean) * (v - mean);
  var /= noisy.size() - 1;
  const double expected = 4 * eta * eta * budget.LogInverseDelta() /
                          (budget.epsilon() * budget.epsilon());
  const double rel = std::abs(var - expected) / expected;
  return {rel <= 0.02, absl::StrFormat("variance %.5f vs %.5f (%.3f%%)", var,
                                       expected, 100 * rel)};
}

// 11. Model stability improves with n at T = n^2.
Outcome StabilityScaling() {
  auto measure = [](size_t n) -> absl::StatusOr<double> {
    const Dataset d = WellConditionedLeastSquares(n, 3, 0.3, 16);
    SgdConfig cfg;
    cfg.iterations = static_cast<int64_t>(n * n);
    cfg.constraint = *ConstraintSet::L2Ball(5.0);
    cfg.seed = 1101;
    const RealVector x = {-1, 1, 1};
    absl::StatusOr<StabilityMeasurement> m = ModelStabilityMeasure(
        d, 0, x, -d.label(0), GlmLoss::Squared(), cfg, 20);
    if (!m.ok()) return m.status();
    return m->median;
  };
  ACCEPT_ASSIGN(small, measure(100));
  ACCEPT_ASSIGN(large, measure(400));
  return {large <= 0.7 * small,
          absl::StrFormat("median distance %.5g (n=100), %.5g (n=400), ratio "
                          "%.3f",
                          small, large, large / small)};
}

// 12. Stability benchmark on separable logistic data.
Outcome StabilityBenchmark() {
  ExperimentConfig cfg;
  cfg.data.synthetic = "separable_logistic";
  cfg.data.n = 400;
  cfg.data.p = 20;
  cfg.loss = LossKind::kLogistic;
  cfg.rhos = {0.0, 0.5};
  cfg.methods = {Method::kNone, Method::kDropout};
  cfg.repeats = 20;
  cfg.seed = 1201;
  ACCEPT_ASSIGN(first, RunStabilityExperiment(cfg));
  ACCEPT_ASSIGN(second, RunStabilityExperiment(cfg));
  const std::string csv = FormatStabilityCsv(first.rows);
  const bool reproducible = csv == FormatStabilityCsv(second.rows);
  double none = -1, dropout = -1;
  for (const StabilityRow& row : first.rows) {
    if (row.rho != 0.5) continue;
    (row.method == Method::kNone ? none : dropout) = row.marginal_error;
  }
  return {reproducible && none >= 0 && dropout >= 0 && dropout <= none,
          absl::StrFormat("marginal error at rho=0.5: dropout %.4f, none %.4f; "
                          "reproducible %d",
                          dropout, none, reproducible)};
}

// 13. Simplex projection against independent oracles.
Outcome SimplexProjection() {
  SeededRng rng(1301);
  double grid_gap = 0.0, qp_gap = 0.0, feas = 0.0, idem = 0.0;
  for (int t = 0; t < 50; ++t) {
    RealVector v(3);
    for (double& x : v) x = 1.5 * rng.StandardNormal();
    ACCEPT_ASSIGN(p, ProjectSimplex(v));
    const RealVector grid = testing_oracles::SimplexProjectionByGrid(v, 1e-4);
    const RealVector qp = testing_oracles::SimplexProjectionByActiveSets(v);
    double sum = 0.0;
    for (size_t j = 0; j < 3; ++j) {
      grid_gap = std::max(grid_gap, std::abs(p[j] - grid[j]));
      qp_gap = std::max(qp_gap, std::abs(p[j] - qp[j]));
      feas = std::max(feas, -std::min(p[j], 0.0));
      sum += p[j];
    }
    feas = std::max(feas, std::abs(sum - 1));
    ACCEPT_ASSIGN(again, ProjectSimplex(p));
    for (size_t j = 0; j < 3; ++j) idem = std::max(idem, std::abs(again[j] - p[j]));
  }
  return {grid_gap <= 1e-4 && qp_gap <= 1e-10 && feas <= 1e-12 && idem <= 1e-12,
          absl::StrFormat("grid gap %.2g, QP gap %.2g, feasibility %.2g, "
                          "idempotence %.2g",
                          grid_gap, qp_gap, feas, idem)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

int Main() {
  const std::vector<Criterion> criteria = {
      {1, "unbiased_node_perturbation", 1, UnbiasedPerturbation},
      {2, "escape_frequency", 60, EscapeFrequency},
      {3, "error_identity", 5, ErrorIdentityHolds},
      {4, "closed_form_dropout_risk", 30, ClosedFormRisk},
      {5, "strong_convexification", 5, StrongConvexification},
      {6, "sgd_excess_risk_rate", 60, SgdRate},
      {7, "binomial_ratio_bound", 1, BinomialRatio},
      {8, "exhaustive_privacy_audit", 30, PrivacyAudit},
      {9, "ptr_gate_tails", 10, PtrTails},
      {10, "gaussian_mechanism_variance", 5, GaussianMechanism},
      {11, "model_stability_scaling", 120, StabilityScaling},
      {12, "stability_benchmark", 120, StabilityBenchmark},
      {13, "simplex_projection", 5, SimplexProjection},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome = c.run();
    const double seconds = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - start)
                               .count();
    std::string detail = outcome.detail;
    if (seconds > c.budget_seconds) {
      outcome.pass = false;
      detail += absl::StrFormat("; over the %.0f s budget", c.budget_seconds);
    }
    if (!outcome.pass) ++failures;
    std::printf("[%s] %2d %-30s (%.2f s) %s\n", outcome.pass ? "PASS" : "FAIL",
                c.id, c.name, seconds, detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failures);
  return failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace dropescape

int main() { return dropescape::Main(); }
