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

#ifndef DROPESCAPE_NETESCAPE_H_
#define DROPESCAPE_NETESCAPE_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "dropescape/core_math.h"
#include "dropescape/rng.h"

namespace dropescape {

enum class LinkKind { kIdentity, kTanh, kMonomial };

// Node nonlinearity phi.
class Link {
 public:
  static Link Identity() { return Link(LinkKind::kIdentity, 1); }
  static Link Tanh() { return Link(LinkKind::kTanh, 1); }
  // u^degree, degree >= 1.
  static absl::StatusOr<Link> Monomial(int degree);

  LinkKind kind() const { return kind_; }
  int degree() const { return degree_; }
  double Eval(double u) const;
  double Derivative(double u) const;

 private:
  Link(LinkKind kind, int degree) : kind_(kind), degree_(degree) {}
  LinkKind kind_;
  int degree_;
};

// x -> sum_i alpha_i phi_i(<theta_i, x>) with fixed output weights alpha.
class OneHiddenNet {
 public:
  // An empty network with no nodes.
  OneHiddenNet() = default;

  static absl::StatusOr<OneHiddenNet> Create(RealVector alphas,
                                             std::vector<RealVector> thetas,
                                             std::vector<Link> links);
  // All nodes share one link.
  static absl::StatusOr<OneHiddenNet> Create(RealVector alphas,
                                             std::vector<RealVector> thetas,
                                             Link link);

  size_t m() const { return alphas_.size(); }
  size_t dim() const { return dim_; }
  const RealVector& alphas() const { return alphas_; }
  const std::vector<RealVector>& thetas() const { return thetas_; }
  const std::vector<Link>& links() const { return links_; }
  // min_i |alpha_i|.
  double AlphaMin() const;

  // phi_i(<theta_i, x>), no dimension check.
  double Node(size_t i, std::span<const double> x) const;
  double EvalUnchecked(std::span<const double> x) const;

  OneHiddenNet WithAlphas(RealVector alphas) const;
  OneHiddenNet WithThetas(std::vector<RealVector> thetas) const;

 private:
  size_t dim_ = 0;
  RealVector alphas_;
  std::vector<RealVector> thetas_;
  std::vector<Link> links_;
};

absl::StatusOr<double> NetEval(const OneHiddenNet& net,
                               std::span<const double> x);

// The perturbed network x -> 2 sum_i alpha_i b_i phi_i(<theta_i, x>).
OneHiddenNet ApplyNodeMask(const OneHiddenNet& net,
                           std::span<const uint8_t> mask);

struct PerturbedNet {
  OneHiddenNet net;
  std::vector<uint8_t> mask;
};

// Draws b_i ~ unif{0, 1} for every node and applies it.
PerturbedNet DropoutPerturb(const OneHiddenNet& net, SeededRng& rng);

// Mean of the perturbed output at x over all 2^m node masks. m <= 20.
absl::StatusOr<double> ExhaustiveMaskMean(const OneHiddenNet& net,
                                          std::span<const double> x);

enum class DistributionKind { kStandardNormal, kUniformCube };

struct SampleDistribution {
  DistributionKind kind = DistributionKind::kStandardNormal;
  size_t dim = 1;

  void Draw(SeededRng& rng, std::span<double> out) const;
};

// An immutable set of i.i.d. draws shared by every evaluation in a trial.
class SampleSet {
 public:
  static absl::StatusOr<SampleSet> Draw(const SampleDistribution& dist,
                                        size_t samples, uint64_t seed);

  size_t size() const { return size_; }
  size_t dim() const { return dim_; }
  std::span<const double> row(size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }

 private:
  size_t size_ = 0;
  size_t dim_ = 0;
  RealVector values_;
};

using ScalarFunction = std::function<double(std::span<const double>)>;

ScalarFunction AsFunction(const OneHiddenNet& net);

// Mean of (g(x) - f(x))^2 over the set.
double DistSq(const ScalarFunction& g, const ScalarFunction& f,
              const SampleSet& samples);
// Mean of g(x) h(x) over the set.
double InnerProd(const ScalarFunction& g, const ScalarFunction& h,
                 const SampleSet& samples);

// The same estimates over `samples` fresh draws from `dist`.
absl::StatusOr<double> DistSqMc(const ScalarFunction& g,
                                const ScalarFunction& f,
                                const SampleDistribution& dist,
                                size_t samples, uint64_t seed);
absl::StatusOr<double> InnerProdMc(const ScalarFunction& g,
                                   const ScalarFunction& h,
                                   const SampleDistribution& dist,
                                   size_t samples, uint64_t seed);

struct ErrorIdentity {
  double lhs = 0.0;  // ||g_hat - f||^2 - ||g - f||^2
  double a = 0.0;    // ||g_hat - g||^2
  double b = 0.0;    // 2 <g_hat - g, g - f>
};

ErrorIdentity ErrorIdentityDecompose(const ScalarFunction& g,
                                     const ScalarFunction& g_hat,
                                     const ScalarFunction& f,
                                     const SampleSet& samples);

// 1 - sqrt(alpha_min / (16 m)).
double EscapeFactor(double alpha_min, size_t m);

struct EscapeReport {
  double initial_error = 0.0;
  std::vector<double> perturbed_errors;
  std::vector<uint8_t> successes;
  double success_frequency = 0.0;
  double factor = 0.0;
  double g_norm_sq = 0.0;
  double f_norm_sq = 0.0;
  // ||alpha||^2 max_i ||g_i||^2 sqrt(m) / (16 sqrt(alpha_min)).
  double error_threshold = 0.0;
  bool norm_precondition = false;   // ||g|| >= ||f||
  bool error_precondition = false;  // initial_error >= error_threshold

  bool preconditions_hold() const {
    return norm_precondition && error_precondition;
  }
};

// Monte Carlo check of the dropout escape property. All functions are
// evaluated on one shared sample set (stream 0 of `seed`) through the Gram
// matrix of the node outputs of g and f; draw j uses stream j + 1 for its
// mask. Preconditions are reported, not enforced.
absl::StatusOr<EscapeReport> EscapeTrial(const OneHiddenNet& g,
                                         const OneHiddenNet& f,
                                         const SampleDistribution& dist,
                                         size_t n_draws, size_t mc_samples,
                                         uint64_t seed);

struct EscapeInstance {
  OneHiddenNet g;
  OneHiddenNet f;
};

// Identity-link pair in p >= m dimensions: g has weights g_alpha on a random
// orthonormal frame theta_1..theta_m, and f has weights f_weight on the
// opposite directions -theta_i.
absl::StatusOr<EscapeInstance> OrthonormalEscapeInstance(size_t m, size_t p,
                                                         double g_alpha,
                                                         double f_weight,
                                                         uint64_t seed);

// Squared pointwise error (target - g(x))^2 and its gradient with respect to
// every theta_i: -2 (target - g(x)) alpha_i phi_i'(<theta_i, x>) x.
double PointwiseSquaredError(const OneHiddenNet& net, double target,
                             std::span<const double> x);
std::vector<RealVector> PointwiseGradient(const OneHiddenNet& net,
                                          double target,
                                          std::span<const double> x);

// Plain SGD on the hidden weights; the output weights stay fixed.
absl::StatusOr<OneHiddenNet> SgdTrainNet(const ScalarFunction& f,
                                         const OneHiddenNet& net,
                                         const SampleDistribution& dist,
                                         double eta, int64_t steps,
                                         uint64_t seed);

struct EscapeLoopConfig {
  double eta = 0.01;
  int64_t steps_per_round = 1000;
  // Stagnant when the estimated expected gradient norm is below this.
  double stagnation_tol = 1e-3;
  int64_t max_rounds = 50;
  size_t gradient_samples = 256;
  size_t eval_samples = 10'000;
  // Errors at or below this count as an exact fit.
  double zero_error = 1e-20;
};

struct EscapeLoopResult {
  OneHiddenNet best;
  double best_error = 0.0;
  // Error of the current network after each round, starting with round 0.
  std::vector<double> trajectory;
  int64_t rounds = 0;
  int64_t perturbations_tried = 0;
  int64_t perturbations_accepted = 0;
  bool max_rounds_reached = false;
};

// Alternates SGD phases with dropout perturbations. A round is stagnant when
// the gradient-norm estimate is below the tolerance; a stagnant round draws a
// perturbation and keeps it only if the error on the fixed evaluation set
// strictly decreases.
absl::StatusOr<EscapeLoopResult> DropoutEscapeLoop(
    const ScalarFunction& f, const OneHiddenNet& net,
    const SampleDistribution& dist, const EscapeLoopConfig& cfg,
    uint64_t seed);

}  // namespace dropescape

#endif  // DROPESCAPE_NETESCAPE_H_
