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

#include "dropescape/netescape.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "Eigen/Dense"
#include "absl/strings/str_cat.h"

namespace dropescape {
namespace {

constexpr size_t kMaxExhaustiveNodes = 20;

std::vector<double> Evaluate(const ScalarFunction& fn,
                             const SampleSet& samples) {
  std::vector<double> out(samples.size());
  for (size_t s = 0; s < samples.size(); ++s) out[s] = fn(samples.row(s));
  return out;
}

absl::Status CheckSamples(size_t samples) {
  if (samples < 1) {
    return absl::InvalidArgumentError("Parameter error: samples must be >= 1");
  }
  return absl::OkStatus();
}

double MeanSquaredError(const OneHiddenNet& net, const ScalarFunction& f,
                        const SampleSet& samples) {
  double total = 0.0;
  for (size_t s = 0; s < samples.size(); ++s) {
    const auto x = samples.row(s);
    const double diff = net.EvalUnchecked(x) - f(x);
    total += diff * diff;
  }
  return total / static_cast<double>(samples.size());
}

// Norm of the averaged gradient over the sample set.
double MeanGradientNorm(const OneHiddenNet& net, const ScalarFunction& f,
                        const SampleSet& samples) {
  std::vector<RealVector> total(net.m(), RealVector(net.dim(), 0.0));
  for (size_t s = 0; s < samples.size(); ++s) {
    const auto x = samples.row(s);
    const auto grad = PointwiseGradient(net, f(x), x);
    for (size_t i = 0; i < net.m(); ++i) {
      for (size_t j = 0; j < net.dim(); ++j) total[i][j] += grad[i][j];
    }
  }
  double sq = 0.0;
  const double scale = 1.0 / static_cast<double>(samples.size());
  for (const RealVector& row : total) {
    for (double v : row) sq += (v * scale) * (v * scale);
  }
  return std::sqrt(sq);
}

}  // namespace

absl::StatusOr<Link> Link::Monomial(int degree) {
  if (degree < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("Monomial degree must be >= 1, got ", degree));
  }
  return Link(LinkKind::kMonomial, degree);
}

double Link::Eval(double u) const {
  switch (kind_) {
    case LinkKind::kIdentity:
      return u;
    case LinkKind::kTanh:
      return std::tanh(u);
    case LinkKind::kMonomial: {
      double out = 1.0;
      for (int k = 0; k < degree_; ++k) out *= u;
      return out;
    }
  }
  return 0.0;
}

double Link::Derivative(double u) const {
  switch (kind_) {
    case LinkKind::kIdentity:
      return 1.0;
    case LinkKind::kTanh: {
      const double t = std::tanh(u);
      return 1.0 - t * t;
    }
    case LinkKind::kMonomial: {
      double out = degree_;
      for (int k = 1; k < degree_; ++k) out *= u;
      return out;
    }
  }
  return 0.0;
}

absl::StatusOr<OneHiddenNet> OneHiddenNet::Create(
    RealVector alphas, std::vector<RealVector> thetas,
    std::vector<Link> links) {
  if (alphas.empty()) {
    return absl::InvalidArgumentError("A network needs at least one node");
  }
  if (thetas.size() != alphas.size() || links.size() != alphas.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Dimension mismatch: ", alphas.size(), " alphas, ", thetas.size(),
        " thetas, ", links.size(), " links"));
  }
  const size_t dim = thetas.front().size();
  if (dim == 0) return absl::InvalidArgumentError("Empty weight vector");
  for (size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] >= 0.0) || !std::isfinite(alphas[i])) {
      return absl::InvalidArgumentError(absl::StrCat(
          "Output weights must be finite and nonnegative; alpha_", i, " = ",
          alphas[i]));
    }
    if (thetas[i].size() != dim) {
      return absl::InvalidArgumentError(
          absl::StrCat("Dimension mismatch in theta_", i));
    }
    if (absl::Status s = ValidateFinite(thetas[i]); !s.ok()) return s;
  }
  OneHiddenNet net;
  net.dim_ = dim;
  net.alphas_ = std::move(alphas);
  net.thetas_ = std::move(thetas);
  net.links_ = std::move(links);
  return net;
}

absl::StatusOr<OneHiddenNet> OneHiddenNet::Create(
    RealVector alphas, std::vector<RealVector> thetas, Link link) {
  std::vector<Link> links(alphas.size(), link);
  return Create(std::move(alphas), std::move(thetas), std::move(links));
}

double OneHiddenNet::AlphaMin() const {
  double out = std::numeric_limits<double>::infinity();
  for (double a : alphas_) out = std::min(out, std::abs(a));
  return out;
}

double OneHiddenNet::Node(size_t i, std::span<const double> x) const {
  return links_[i].Eval(Dot(thetas_[i], x));
}

double OneHiddenNet::EvalUnchecked(std::span<const double> x) const {
  double out = 0.0;
  for (size_t i = 0; i < alphas_.size(); ++i) {
    if (alphas_[i] != 0.0) out += alphas_[i] * Node(i, x);
  }
  return out;
}

OneHiddenNet OneHiddenNet::WithAlphas(RealVector alphas) const {
  OneHiddenNet out = *this;
  out.alphas_ = std::move(alphas);
  return out;
}

OneHiddenNet OneHiddenNet::WithThetas(std::vector<RealVector> thetas) const {
  OneHiddenNet out = *this;
  out.thetas_ = std::move(thetas);
  return out;
}

absl::StatusOr<double> NetEval(const OneHiddenNet& net,
                               std::span<const double> x) {
  if (x.size() != net.dim()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Dimension mismatch: input has ", x.size(), " entries, network expects ",
        net.dim()));
  }
  return net.EvalUnchecked(x);
}

OneHiddenNet ApplyNodeMask(const OneHiddenNet& net,
                           std::span<const uint8_t> mask) {
  RealVector alphas(net.m());
  for (size_t i = 0; i < net.m(); ++i) {
    alphas[i] = mask[i] ? 2.0 * net.alphas()[i] : 0.0;
  }
  return net.WithAlphas(std::move(alphas));
}

PerturbedNet DropoutPerturb(const OneHiddenNet& net, SeededRng& rng) {
  std::vector<uint8_t> mask(net.m());
  FillMaskBits(0.5, rng, mask);
  OneHiddenNet perturbed = ApplyNodeMask(net, mask);
  return {std::move(perturbed), std::move(mask)};
}

absl::StatusOr<double> ExhaustiveMaskMean(const OneHiddenNet& net,
                                          std::span<const double> x) {
  if (x.size() != net.dim()) {
    return absl::InvalidArgumentError("Dimension mismatch");
  }
  const size_t m = net.m();
  if (m > kMaxExhaustiveNodes) {
    return absl::ResourceExhaustedError(absl::StrCat(
        "Size error: exhaustive enumeration needs m <= ", kMaxExhaustiveNodes));
  }
  RealVector weighted(m);
  for (size_t i = 0; i < m; ++i) {
    weighted[i] = 2.0 * net.alphas()[i] * net.Node(i, x);
  }
  const uint64_t total = uint64_t{1} << m;
  double sum = 0.0;
  for (uint64_t mask = 0; mask < total; ++mask) {
    double value = 0.0;
    for (size_t i = 0; i < m; ++i) {
      if ((mask >> i) & 1) value += weighted[i];
    }
    sum += value;
  }
  return sum / static_cast<double>(total);
}

void SampleDistribution::Draw(SeededRng& rng, std::span<double> out) const {
  for (double& v : out) {
    v = kind == DistributionKind::kStandardNormal
            ? rng.StandardNormal()
            : 2.0 * rng.Uniform() - 1.0;
  }
}

absl::StatusOr<SampleSet> SampleSet::Draw(const SampleDistribution& dist,
                                          size_t samples, uint64_t seed) {
  if (absl::Status s = CheckSamples(samples); !s.ok()) return s;
  if (dist.dim == 0) return absl::InvalidArgumentError("Dimension must be >= 1");
  SampleSet set;
  set.size_ = samples;
  set.dim_ = dist.dim;
  set.values_.resize(samples * dist.dim);
  SeededRng rng(seed);
  dist.Draw(rng, set.values_);
  return set;
}

ScalarFunction AsFunction(const OneHiddenNet& net) {
  return [net](std::span<const double> x) { return net.EvalUnchecked(x); };
}

double DistSq(const ScalarFunction& g, const ScalarFunction& f,
              const SampleSet& samples) {
  double total = 0.0;
  for (size_t s = 0; s < samples.size(); ++s) {
    const double diff = g(samples.row(s)) - f(samples.row(s));
    total += diff * diff;
  }
  return total / static_cast<double>(samples.size());
}

double InnerProd(const ScalarFunction& g, const ScalarFunction& h,
                 const SampleSet& samples) {
  double total = 0.0;
  for (size_t s = 0; s < samples.size(); ++s) {
    total += g(samples.row(s)) * h(samples.row(s));
  }
  return total / static_cast<double>(samples.size());
}

absl::StatusOr<double> DistSqMc(const ScalarFunction& g,
                                const ScalarFunction& f,
                                const SampleDistribution& dist,
                                size_t samples, uint64_t seed) {
  absl::StatusOr<SampleSet> set = SampleSet::Draw(dist, samples, seed);
  if (!set.ok()) return set.status();
  return DistSq(g, f, *set);
}

absl::StatusOr<double> InnerProdMc(const ScalarFunction& g,
                                   const ScalarFunction& h,
                                   const SampleDistribution& dist,
                                   size_t samples, uint64_t seed) {
  absl::StatusOr<SampleSet> set = SampleSet::Draw(dist, samples, seed);
  if (!set.ok()) return set.status();
  return InnerProd(g, h, *set);
}

ErrorIdentity ErrorIdentityDecompose(const ScalarFunction& g,
                                     const ScalarFunction& g_hat,
                                     const ScalarFunction& f,
                                     const SampleSet& samples) {
  const std::vector<double> gv = Evaluate(g, samples);
  const std::vector<double> hv = Evaluate(g_hat, samples);
  const std::vector<double> fv = Evaluate(f, samples);
  double perturbed = 0.0, base = 0.0, a = 0.0, b = 0.0;
  for (size_t s = 0; s < gv.size(); ++s) {
    const double e_hat = hv[s] - fv[s];
    const double e = gv[s] - fv[s];
    const double dg = hv[s] - gv[s];
    perturbed += e_hat * e_hat;
    base += e * e;
    a += dg * dg;
    b += dg * e;
  }
  const double n = static_cast<double>(gv.size());
  return {.lhs = (perturbed - base) / n, .a = a / n, .b = 2.0 * b / n};
}

double EscapeFactor(double alpha_min, size_t m) {
  return 1.0 - std::sqrt(alpha_min / (16.0 * static_cast<double>(m)));
}

absl::StatusOr<EscapeReport> EscapeTrial(const OneHiddenNet& g,
                                         const OneHiddenNet& f,
                                         const SampleDistribution& dist,
                                         size_t n_draws, size_t mc_samples,
                                         uint64_t seed) {
  if (g.dim() != f.dim() || g.dim() != dist.dim) {
    return absl::InvalidArgumentError("Dimension mismatch between g, f, D");
  }
  const double alpha_min = g.AlphaMin();
  if (!(alpha_min > 0.0)) {
    return absl::InvalidArgumentError(
        "Parameter error: alpha_min must be positive");
  }
  absl::StatusOr<SampleSet> samples =
      SampleSet::Draw(dist, mc_samples, DeriveSeed(seed, 0));
  if (!samples.ok()) return samples.status();

  // Node outputs of g followed by those of f; every error below is a
  // quadratic form in their Gram matrix.
  const size_t mg = g.m();
  const size_t nodes = mg + f.m();
  Eigen::MatrixXd h(nodes, samples->size());
  for (size_t s = 0; s < samples->size(); ++s) {
    const auto x = samples->row(s);
    for (size_t i = 0; i < mg; ++i) h(i, s) = g.Node(i, x);
    for (size_t k = 0; k < f.m(); ++k) h(mg + k, s) = f.Node(k, x);
  }
  const Eigen::MatrixXd gram =
      (h * h.transpose()) / static_cast<double>(samples->size());

  Eigen::VectorXd coef(nodes);
  for (size_t i = 0; i < mg; ++i) coef(i) = g.alphas()[i];
  for (size_t k = 0; k < f.m(); ++k) coef(mg + k) = -f.alphas()[k];

  EscapeReport report;
  report.factor = EscapeFactor(alpha_min, mg);
  report.initial_error = coef.dot(gram * coef);
  const Eigen::VectorXd ga = coef.head(mg);
  const Eigen::VectorXd fa = -coef.tail(f.m());
  report.g_norm_sq = ga.dot(gram.topLeftCorner(mg, mg) * ga);
  report.f_norm_sq = fa.dot(gram.bottomRightCorner(f.m(), f.m()) * fa);
  const double max_node = gram.diagonal().head(mg).maxCoeff();
  report.error_threshold = ga.squaredNorm() * max_node *
                           std::sqrt(static_cast<double>(mg)) /
                           (16.0 * std::sqrt(alpha_min));
  report.norm_precondition = report.g_norm_sq >= report.f_norm_sq;
  report.error_precondition = report.initial_error >= report.error_threshold;

  report.perturbed_errors.resize(n_draws);
  report.successes.resize(n_draws);
  std::vector<uint8_t> mask(mg);
  size_t hits = 0;
  for (size_t j = 0; j < n_draws; ++j) {
    SeededRng rng(seed, j + 1);
    FillMaskBits(0.5, rng, mask);
    Eigen::VectorXd c = coef;
    for (size_t i = 0; i < mg; ++i) c(i) = mask[i] ? 2.0 * coef(i) : 0.0;
    const double err = c.dot(gram * c);
    report.perturbed_errors[j] = err;
    report.successes[j] = err <= report.factor * report.initial_error;
    hits += report.successes[j];
  }
  report.success_frequency =
      n_draws == 0 ? 0.0
                   : static_cast<double>(hits) / static_cast<double>(n_draws);
  return report;
}

absl::StatusOr<EscapeInstance> OrthonormalEscapeInstance(size_t m, size_t p,
                                                         double g_alpha,
                                                         double f_weight,
                                                         uint64_t seed) {
  if (m < 1 || p < m) {
    return absl::InvalidArgumentError(
        absl::StrCat("Parameter error: need 1 <= m <= p, got m = ", m,
                     ", p = ", p));
  }
  SeededRng rng(seed);
  Eigen::MatrixXd gaussian(p, m);
  for (size_t c = 0; c < m; ++c) {
    for (size_t r = 0; r < p; ++r) gaussian(r, c) = rng.StandardNormal();
  }
  const Eigen::MatrixXd q =
      Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian).householderQ() *
      Eigen::MatrixXd::Identity(p, m);
  std::vector<RealVector> frame(m, RealVector(p)), opposite(m, RealVector(p));
  for (size_t i = 0; i < m; ++i) {
    for (size_t r = 0; r < p; ++r) {
      frame[i][r] = q(r, i);
      opposite[i][r] = -q(r, i);
    }
  }
  absl::StatusOr<OneHiddenNet> g = OneHiddenNet::Create(
      RealVector(m, g_alpha), std::move(frame), Link::Identity());
  if (!g.ok()) return g.status();
  absl::StatusOr<OneHiddenNet> f = OneHiddenNet::Create(
      RealVector(m, f_weight), std::move(opposite), Link::Identity());
  if (!f.ok()) return f.status();
  return EscapeInstance{*std::move(g), *std::move(f)};
}

double PointwiseSquaredError(const OneHiddenNet& net, double target,
                             std::span<const double> x) {
  const double diff = target - net.EvalUnchecked(x);
  return diff * diff;
}

std::vector<RealVector> PointwiseGradient(const OneHiddenNet& net,
                                          double target,
                                          std::span<const double> x) {
  const double residual = target - net.EvalUnchecked(x);
  std::vector<RealVector> grad(net.m(), RealVector(net.dim(), 0.0));
  for (size_t i = 0; i < net.m(); ++i) {
    const double scale = -2.0 * residual * net.alphas()[i] *
                         net.links()[i].Derivative(Dot(net.thetas()[i], x));
    for (size_t j = 0; j < net.dim(); ++j) grad[i][j] = scale * x[j];
  }
  return grad;
}

absl::StatusOr<OneHiddenNet> SgdTrainNet(const ScalarFunction& f,
                                         const OneHiddenNet& net,
                                         const SampleDistribution& dist,
                                         double eta, int64_t steps,
                                         uint64_t seed) {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    return absl::InvalidArgumentError("Parameter error: eta must be positive");
  }
  if (steps < 0) return absl::InvalidArgumentError("steps must be >= 0");
  if (dist.dim != net.dim()) {
    return absl::InvalidArgumentError("Dimension mismatch");
  }
  SeededRng rng(seed);
  std::vector<RealVector> thetas = net.thetas();
  OneHiddenNet current = net;
  RealVector x(net.dim());
  for (int64_t t = 0; t < steps; ++t) {
    dist.Draw(rng, x);
    const auto grad = PointwiseGradient(current, f(x), x);
    for (size_t i = 0; i < net.m(); ++i) {
      for (size_t j = 0; j < net.dim(); ++j) thetas[i][j] -= eta * grad[i][j];
    }
    if (absl::Status s = ValidateFinite(thetas.front()); !s.ok()) {
      return absl::InternalError(
          absl::StrCat("Numerical error: SGD diverged at step ", t + 1));
    }
    current = current.WithThetas(thetas);
  }
  return current;
}

absl::StatusOr<EscapeLoopResult> DropoutEscapeLoop(
    const ScalarFunction& f, const OneHiddenNet& net,
    const SampleDistribution& dist, const EscapeLoopConfig& cfg,
    uint64_t seed) {
  if (cfg.max_rounds < 1) {
    return absl::InvalidArgumentError("max_rounds must be >= 1");
  }
  absl::StatusOr<SampleSet> eval =
      SampleSet::Draw(dist, cfg.eval_samples, DeriveSeed(seed, 0));
  if (!eval.ok()) return eval.status();

  OneHiddenNet current = net;
  double error = MeanSquaredError(current, f, *eval);
  EscapeLoopResult result;
  result.best = current;
  result.best_error = error;
  result.trajectory.push_back(error);
  bool done = false;
  for (int64_t round = 1; round <= cfg.max_rounds; ++round) {
    result.rounds = round;
    if (error <= cfg.zero_error) {
      done = true;
      break;
    }
    const uint64_t base = 3 * static_cast<uint64_t>(round);
    absl::StatusOr<SampleSet> probe = SampleSet::Draw(
        dist, cfg.gradient_samples, DeriveSeed(seed, base + 1));
    if (!probe.ok()) return probe.status();
    if (MeanGradientNorm(current, f, *probe) < cfg.stagnation_tol) {
      SeededRng rng(seed, base + 2);
      PerturbedNet candidate = DropoutPerturb(current, rng);
      ++result.perturbations_tried;
      const double candidate_error = MeanSquaredError(candidate.net, f, *eval);
      if (candidate_error < error) {
        current = std::move(candidate.net);
        error = candidate_error;
        ++result.perturbations_accepted;
      }
    } else {
      absl::StatusOr<OneHiddenNet> trained =
          SgdTrainNet(f, current, dist, cfg.eta, cfg.steps_per_round,
                      DeriveSeed(seed, base + 3));
      if (!trained.ok()) return trained.status();
      current = *std::move(trained);
      error = MeanSquaredError(current, f, *eval);
    }
    result.trajectory.push_back(error);
    if (error < result.best_error) {
      result.best = current;
      result.best_error = error;
    }
  }
  if (!done && result.best_error > cfg.zero_error) {
    result.max_rounds_reached = true;
  }
  return result;
}

}  // namespace dropescape
