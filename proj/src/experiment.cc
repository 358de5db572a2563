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

#include "dropescape/experiment.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#include "Eigen/Dense"
#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "dropescape/dropout_sgd.h"
#include "dropescape/parallel.h"
#include "dropescape/projection.h"
#include "dropescape/rng.h"

namespace dropescape {
namespace {

constexpr size_t kQuadraturePoints = 20;
constexpr uint64_t kMethodStream = 1000;
constexpr uint64_t kRemovalStream = 2000;

absl::string_view AsAbsl(std::string_view s) { return {s.data(), s.size()}; }

absl::Status ConfigError(std::string_view key, std::string_view value,
                         std::string_view expected) {
  return absl::InvalidArgumentError(
      absl::StrCat("Config error: ", std::string(key), " = '",
                   std::string(value), "' is not ", std::string(expected)));
}

const QuadratureRule& DefaultRule() {
  static const QuadratureRule* rule =
      new QuadratureRule(*GaussHermite(kQuadraturePoints));
  return *rule;
}

double DropoutSpread(std::span<const double> theta, std::span<const double> x,
                     double alpha) {
  double s2 = 0.0;
  for (size_t j = 0; j < x.size(); ++j) s2 += x[j] * x[j] * theta[j] * theta[j];
  return (1.0 - alpha) / alpha * s2;
}

absl::Status CheckRiskInputs(std::span<const double> theta, const Dataset& d,
                             double alpha) {
  if (d.empty()) return absl::FailedPreconditionError("Data error: empty");
  if (theta.size() != d.dim()) {
    return absl::InvalidArgumentError("Dimension mismatch: theta");
  }
  return ValidateKeepRate(alpha);
}

using Objective = std::function<double(const RealVector&)>;
using Gradient = std::function<RealVector(const RealVector&)>;

// Projected gradient descent with Armijo backtracking. Deterministic.
RealVector Descend(const Objective& f, const Gradient& grad,
                   const ConstraintSet& c, RealVector theta,
                   int64_t iterations) {
  c.ProjectInPlace(theta);
  double value = f(theta);
  double step = 1.0;
  for (int64_t it = 0; it < iterations; ++it) {
    const RealVector g = grad(theta);
    if (SquaredNorm(g) < 1e-24) break;
    bool moved = false;
    for (int tries = 0; tries < 60; ++tries) {
      RealVector next = theta;
      for (size_t j = 0; j < next.size(); ++j) next[j] -= step * g[j];
      c.ProjectInPlace(next);
      double decrease = 0.0;
      for (size_t j = 0; j < next.size(); ++j) {
        decrease += g[j] * (theta[j] - next[j]);
      }
      const double next_value = f(next);
      if (next_value <= value - 0.5 * decrease && decrease > 0.0) {
        theta = std::move(next);
        value = next_value;
        moved = true;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return theta;
}

double RegularizedRisk(const RealVector& theta, const Dataset& d,
                       const GlmLoss& loss, double lambda) {
  double total = 0.0;
  for (size_t i = 0; i < d.size(); ++i) {
    total += loss.Value(Dot(theta, d.row(i)), d.label(i));
  }
  return total / static_cast<double>(d.size()) + lambda * SquaredNorm(theta);
}

RealVector RegularizedGradient(const RealVector& theta, const Dataset& d,
                               const GlmLoss& loss, double lambda) {
  RealVector g(theta.size(), 0.0);
  for (size_t i = 0; i < d.size(); ++i) {
    const auto x = d.row(i);
    const double slope = loss.Derivative(Dot(theta, x), d.label(i));
    for (size_t j = 0; j < g.size(); ++j) g[j] += slope * x[j];
  }
  const double inv_n = 1.0 / static_cast<double>(d.size());
  for (size_t j = 0; j < g.size(); ++j) {
    g[j] = g[j] * inv_n + 2.0 * lambda * theta[j];
  }
  return g;
}

RealVector TrainL2(const Dataset& d, const GlmLoss& loss, double lambda,
                   const ConstraintSet& c, int64_t iterations) {
  return Descend(
      [&](const RealVector& t) { return RegularizedRisk(t, d, loss, lambda); },
      [&](const RealVector& t) {
        return RegularizedGradient(t, d, loss, lambda);
      },
      c, RealVector(d.dim(), 0.0), iterations);
}

// k-fold cross-validation over contiguous folds; the criterion is the mean
// held-out loss. Ties keep the smaller penalty.
double SelectL2Penalty(const Dataset& d, const GlmLoss& loss,
                       const ExperimentConfig& cfg, const ConstraintSet& c) {
  const std::vector<double> grid =
      cfg.l2_grid.empty() ? DefaultL2Grid() : cfg.l2_grid;
  const size_t n = d.size();
  const size_t folds =
      std::max<size_t>(1, std::min<size_t>(cfg.cv_folds, n));
  if (folds < 2) return grid.front();
  double best_lambda = grid.front();
  double best_score = std::numeric_limits<double>::infinity();
  for (double lambda : grid) {
    double score = 0.0;
    for (size_t f = 0; f < folds; ++f) {
      const size_t begin = f * n / folds;
      const size_t end = (f + 1) * n / folds;
      std::vector<size_t> train_idx, val_idx;
      for (size_t i = 0; i < n; ++i) {
        (i >= begin && i < end ? val_idx : train_idx).push_back(i);
      }
      const Dataset train = d.Subset(train_idx);
      const RealVector theta =
          TrainL2(train, loss, lambda, c, cfg.gd_iterations);
      for (size_t i : val_idx) {
        score += loss.Value(Dot(theta, d.row(i)), d.label(i));
      }
    }
    if (score < best_score) {
      best_score = score;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

// Sample standard deviation; zero for fewer than two values.
double SampleStd(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const double mean =
      std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return std::sqrt(sq / static_cast<double>(values.size() - 1));
}

}  // namespace

absl::StatusOr<KeyValueConfig> KeyValueConfig::Parse(std::string_view text) {
  KeyValueConfig cfg;
  size_t line_no = 0;
  for (absl::string_view line : absl::StrSplit(AsAbsl(text), '\n')) {
    ++line_no;
    if (const size_t hash = line.find('#'); hash != absl::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = absl::StripAsciiWhitespace(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == absl::string_view::npos) {
      return absl::InvalidArgumentError(absl::StrCat(
          "Config error at line ", line_no, ": expected key=value"));
    }
    const absl::string_view key = absl::StripAsciiWhitespace(line.substr(0, eq));
    if (key.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("Config error at line ", line_no, ": empty key"));
    }
    cfg.Set(std::string(key),
            std::string(absl::StripAsciiWhitespace(line.substr(eq + 1))));
  }
  return cfg;
}

absl::StatusOr<KeyValueConfig> KeyValueConfig::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return absl::NotFoundError(absl::StrCat("Cannot read config ", path));
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return Parse(buffer.str());
}

bool KeyValueConfig::Has(std::string_view key) const {
  return values_.find(key) != values_.end();
}

void KeyValueConfig::Set(std::string key, std::string value) {
  read_[key] = false;
  values_[std::move(key)] = std::move(value);
}

std::string KeyValueConfig::GetString(std::string_view key,
                                      std::string fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  read_[it->first] = true;
  return it->second;
}

absl::StatusOr<double> KeyValueConfig::GetDouble(std::string_view key,
                                                 double fallback) const {
  if (!Has(key)) return fallback;
  const std::string raw = GetString(key, "");
  double value = 0.0;
  if (!absl::SimpleAtod(raw, &value)) return ConfigError(key, raw, "a number");
  return value;
}

absl::StatusOr<int64_t> KeyValueConfig::GetInt(std::string_view key,
                                               int64_t fallback) const {
  if (!Has(key)) return fallback;
  const std::string raw = GetString(key, "");
  int64_t value = 0;
  if (!absl::SimpleAtoi(raw, &value)) {
    return ConfigError(key, raw, "an integer");
  }
  return value;
}

absl::StatusOr<bool> KeyValueConfig::GetBool(std::string_view key,
                                             bool fallback) const {
  if (!Has(key)) return fallback;
  const std::string raw = GetString(key, "");
  bool value = false;
  if (!absl::SimpleAtob(raw, &value)) return ConfigError(key, raw, "a boolean");
  return value;
}

absl::StatusOr<std::vector<double>> KeyValueConfig::GetDoubleList(
    std::string_view key, std::vector<double> fallback) const {
  if (!Has(key)) return fallback;
  std::vector<double> out;
  for (const std::string& item : GetStringList(key, {})) {
    double value = 0.0;
    if (!absl::SimpleAtod(item, &value)) {
      return ConfigError(key, item, "a number");
    }
    out.push_back(value);
  }
  return out;
}

std::vector<std::string> KeyValueConfig::GetStringList(
    std::string_view key, std::vector<std::string> fallback) const {
  if (!Has(key)) return fallback;
  std::vector<std::string> out;
  for (absl::string_view item :
       absl::StrSplit(GetString(key, ""), ',', absl::SkipWhitespace())) {
    out.emplace_back(absl::StripAsciiWhitespace(item));
  }
  return out;
}

std::vector<std::string> KeyValueConfig::UnreadKeys() const {
  std::vector<std::string> out;
  for (const auto& [key, was_read] : read_) {
    if (!was_read) out.push_back(key);
  }
  return out;
}

absl::StatusOr<QuadratureRule> GaussHermite(size_t points) {
  if (points < 1) return absl::InvalidArgumentError("points must be >= 1");
  // Symmetric Jacobi matrix of the Hermite recurrence.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(points, points);
  for (size_t k = 1; k < points; ++k) {
    const double off = std::sqrt(static_cast<double>(k) / 2.0);
    jacobi(k, k - 1) = off;
    jacobi(k - 1, k) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  if (solver.info() != Eigen::Success) {
    return absl::InternalError("Gauss-Hermite eigensolve failed");
  }
  QuadratureRule rule;
  const double mass = std::sqrt(M_PI);
  for (size_t k = 0; k < points; ++k) {
    const double v0 = solver.eigenvectors()(0, k);
    rule.nodes.push_back(solver.eigenvalues()(k));
    rule.weights.push_back(mass * v0 * v0);
  }
  // The rule is symmetric about 0; enforce it exactly.
  for (size_t k = 0; k < points / 2; ++k) {
    const size_t m = points - 1 - k;
    const double node = 0.5 * (rule.nodes[m] - rule.nodes[k]);
    const double weight = 0.5 * (rule.weights[k] + rule.weights[m]);
    rule.nodes[k] = -node;
    rule.nodes[m] = node;
    rule.weights[k] = rule.weights[m] = weight;
  }
  if (points % 2 == 1) rule.nodes[points / 2] = 0.0;
  return rule;
}

absl::StatusOr<double> DeterministicDropoutRisk(std::span<const double> theta,
                                                const Dataset& d,
                                                const GlmLoss& loss,
                                                double alpha) {
  if (absl::Status s = CheckRiskInputs(theta, d, alpha); !s.ok()) return s;
  if (loss.kind() == LossKind::kSquared) {
    return ExactDropoutRiskLeastSquares(theta, d, alpha);
  }
  const QuadratureRule& rule = DefaultRule();
  const double inv_sqrt_pi = 1.0 / std::sqrt(M_PI);
  double total = 0.0;
  for (size_t i = 0; i < d.size(); ++i) {
    const auto x = d.row(i);
    const double mu = Dot(theta, x);
    const double s = std::sqrt(DropoutSpread(theta, x, alpha));
    double expected = 0.0;
    for (size_t k = 0; k < rule.nodes.size(); ++k) {
      expected += rule.weights[k] *
                  loss.Value(mu + M_SQRT2 * s * rule.nodes[k], d.label(i));
    }
    total += expected * inv_sqrt_pi;
  }
  return total / static_cast<double>(d.size());
}

absl::StatusOr<RealVector> DeterministicDropoutRiskGradient(
    std::span<const double> theta, const Dataset& d, const GlmLoss& loss,
    double alpha) {
  if (absl::Status s = CheckRiskInputs(theta, d, alpha); !s.ok()) return s;
  if (loss.kind() == LossKind::kSquared) {
    return ExactDropoutRiskLeastSquaresGradient(theta, d, alpha);
  }
  const QuadratureRule& rule = DefaultRule();
  const double inv_sqrt_pi = 1.0 / std::sqrt(M_PI);
  const double c = (1.0 - alpha) / alpha;
  RealVector grad(theta.size(), 0.0);
  for (size_t i = 0; i < d.size(); ++i) {
    const auto x = d.row(i);
    const double mu = Dot(theta, x);
    const double s = std::sqrt(DropoutSpread(theta, x, alpha));
    // Derivative of the quadrature sum itself, so the gradient is exact for
    // the risk that DeterministicDropoutRisk reports. ds/dtheta_j is
    // c x_j^2 theta_j / s, and the spread term vanishes when s = 0.
    double slope = 0.0, spread = 0.0;
    for (size_t k = 0; k < rule.nodes.size(); ++k) {
      const double first = loss.Derivative(mu + M_SQRT2 * s * rule.nodes[k],
                                           d.label(i));
      slope += rule.weights[k] * first;
      spread += rule.weights[k] * first * M_SQRT2 * rule.nodes[k];
    }
    slope *= inv_sqrt_pi;
    spread = s > 0.0 ? spread * inv_sqrt_pi / s : 0.0;
    for (size_t j = 0; j < grad.size(); ++j) {
      grad[j] += slope * x[j] + spread * c * x[j] * x[j] * theta[j];
    }
  }
  for (double& g : grad) g /= static_cast<double>(d.size());
  return grad;
}

absl::StatusOr<double> AdversarialRiskBound(double eps, double delta, double m,
                                            double b, double base_risk) {
  if (!(eps >= 0.0) || !(delta >= 0.0) || !(m >= 0.0) || !(b >= 0.0) ||
      !(base_risk >= 0.0)) {
    return absl::InvalidArgumentError(
        "Parameter error: inputs must be nonnegative");
  }
  if (!(delta < 1.0)) {
    return absl::InvalidArgumentError("Parameter error: delta must be < 1");
  }
  return std::exp(m * eps) * base_risk + m * b * delta;
}

std::vector<double> DefaultL2Grid() {
  std::vector<double> grid;
  for (int k = 0; k < 7; ++k) grid.push_back(std::pow(10.0, -4.0 + 5.0 * k / 6.0));
  return grid;
}

absl::StatusOr<Method> ParseMethod(std::string_view name) {
  if (name == "none") return Method::kNone;
  if (name == "l2") return Method::kL2;
  if (name == "dropout") return Method::kDropout;
  if (name == "deterministic_dropout") return Method::kDeterministicDropout;
  return absl::InvalidArgumentError(absl::StrCat(
      "Config error: unknown method '", std::string(name),
      "'; expected none, l2, dropout or deterministic_dropout"));
}

std::string MethodName(Method method) {
  switch (method) {
    case Method::kNone:
      return "none";
    case Method::kL2:
      return "l2";
    case Method::kDropout:
      return "dropout";
    case Method::kDeterministicDropout:
      return "deterministic_dropout";
  }
  return "unknown";
}

absl::StatusOr<DataSource> DataSourceFromKeyValues(const KeyValueConfig& kv) {
  DataSource src;
  src.path = kv.GetString("data", "");
  absl::StatusOr<DataFormat> format =
      ParseDataFormat(kv.GetString("format", "csv"));
  if (!format.ok()) return format.status();
  src.format = *format;
  src.synthetic = kv.GetString("synthetic", src.synthetic);
  absl::StatusOr<int64_t> n = kv.GetInt("synthetic_n", 400);
  absl::StatusOr<int64_t> p = kv.GetInt("synthetic_p", 20);
  absl::StatusOr<double> noise = kv.GetDouble("synthetic_noise", src.noise);
  absl::StatusOr<int64_t> seed = kv.GetInt("synthetic_seed", 7);
  for (const absl::Status& s :
       {n.status(), p.status(), noise.status(), seed.status()}) {
    if (!s.ok()) return s;
  }
  if (*n < 1 || *p < 1 || *noise < 0.0) {
    return absl::InvalidArgumentError(
        "Config error: synthetic_n and synthetic_p must be >= 1 and "
        "synthetic_noise >= 0");
  }
  src.n = static_cast<size_t>(*n);
  src.p = static_cast<size_t>(*p);
  src.noise = *noise;
  src.seed = static_cast<uint64_t>(*seed);
  return src;
}

absl::StatusOr<ExperimentConfig> ExperimentConfigFromKeyValues(
    const KeyValueConfig& kv) {
  ExperimentConfig cfg;
  absl::StatusOr<DataSource> source = DataSourceFromKeyValues(kv);
  if (!source.ok()) return source.status();
  cfg.data = *source;

#define DROPESCAPE_READ(expr, target)        \
  do {                                       \
    auto value = (expr);                     \
    if (!value.ok()) return value.status();  \
    target = *value;                         \
  } while (0)

  int64_t seed = 0, threads = 0;
  const std::string loss = kv.GetString("loss", "logistic");
  absl::StatusOr<GlmLoss> parsed_loss = GlmLoss::FromName(loss);
  if (!parsed_loss.ok()) return parsed_loss.status();
  cfg.loss = parsed_loss->kind();

  DROPESCAPE_READ(kv.GetDouble("train_fraction", cfg.train_fraction),
                  cfg.train_fraction);
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) {
    return absl::InvalidArgumentError(
        "Config error: train_fraction must lie in (0, 1)");
  }
  DROPESCAPE_READ(kv.GetDoubleList("rho", cfg.rhos), cfg.rhos);
  if (cfg.rhos.empty()) return absl::InvalidArgumentError("Config error: rho");
  for (double rho : cfg.rhos) {
    if (!(rho >= 0.0 && rho < 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("Config error: rho must lie in [0, 1), got ", rho));
    }
  }
  const std::string removal = kv.GetString("removal", "random");
  if (removal == "random") {
    cfg.removal = RemovalMode::kRandom;
  } else if (removal == "adversarial") {
    cfg.removal = RemovalMode::kAdversarial;
  } else {
    return ConfigError("removal", removal, "random or adversarial");
  }
  if (kv.Has("methods")) {
    cfg.methods.clear();
    for (const std::string& name : kv.GetStringList("methods", {})) {
      absl::StatusOr<Method> m = ParseMethod(name);
      if (!m.ok()) return m.status();
      cfg.methods.push_back(*m);
    }
    if (cfg.methods.empty()) {
      return absl::InvalidArgumentError("Config error: methods is empty");
    }
  }
  DROPESCAPE_READ(kv.GetInt("repeats", cfg.repeats), cfg.repeats);
  if (cfg.repeats < 1) {
    return absl::InvalidArgumentError("Config error: repeats must be >= 1");
  }
  DROPESCAPE_READ(kv.GetInt("seed", 1), seed);
  cfg.seed = static_cast<uint64_t>(seed);
  DROPESCAPE_READ(kv.GetDouble("keep_rate", cfg.keep_rate), cfg.keep_rate);
  if (absl::Status s = ValidateKeepRate(cfg.keep_rate); !s.ok()) return s;
  DROPESCAPE_READ(kv.GetInt("iterations", cfg.iterations), cfg.iterations);
  DROPESCAPE_READ(kv.GetDouble("radius", cfg.radius), cfg.radius);
  if (cfg.iterations < 0 || cfg.radius < 0.0) {
    return absl::InvalidArgumentError(
        "Config error: iterations and radius must be >= 0");
  }
  DROPESCAPE_READ(kv.GetDoubleList("l2_grid", cfg.l2_grid), cfg.l2_grid);
  for (double lambda : cfg.l2_grid) {
    if (!(lambda >= 0.0)) {
      return absl::InvalidArgumentError("Config error: l2_grid must be >= 0");
    }
  }
  DROPESCAPE_READ(kv.GetInt("cv_folds", cfg.cv_folds), cfg.cv_folds);
  DROPESCAPE_READ(kv.GetInt("gd_iterations", cfg.gd_iterations),
                  cfg.gd_iterations);
  DROPESCAPE_READ(kv.GetInt("threads", 1), threads);
  cfg.threads = static_cast<int>(std::max<int64_t>(1, threads));
#undef DROPESCAPE_READ

  if (std::vector<std::string> unread = kv.UnreadKeys(); !unread.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("Config error: unknown key '", unread.front(), "'"));
  }
  return cfg;
}

double TestError(std::span<const double> theta, const Dataset& d,
                 LossKind loss) {
  if (d.empty()) return 0.0;
  double total = 0.0;
  for (size_t i = 0; i < d.size(); ++i) {
    const double u = Dot(theta, d.row(i));
    if (loss == LossKind::kLogistic) {
      total += d.label(i) * u <= 0.0 ? 1.0 : 0.0;
    } else {
      total += (u - d.label(i)) * (u - d.label(i));
    }
  }
  return total / static_cast<double>(d.size());
}

absl::StatusOr<RealVector> TrainMethod(Method method, const Dataset& train,
                                       const GlmLoss& loss,
                                       const ExperimentConfig& cfg,
                                       uint64_t seed) {
  ConstraintSet constraint = ConstraintSet::Unconstrained();
  if (cfg.radius > 0.0) {
    absl::StatusOr<ConstraintSet> ball = ConstraintSet::L2Ball(cfg.radius);
    if (!ball.ok()) return ball.status();
    constraint = *ball;
  }
  switch (method) {
    case Method::kNone:
    case Method::kDropout: {
      SgdConfig sgd;
      sgd.iterations = cfg.iterations > 0
                           ? cfg.iterations
                           : 10 * static_cast<int64_t>(train.size());
      sgd.keep_rate = method == Method::kNone ? 1.0 : cfg.keep_rate;
      sgd.constraint = constraint;
      sgd.seed = seed;
      absl::StatusOr<TrainedModel> model = TrainDropoutSgd(train, loss, sgd);
      if (!model.ok()) return model.status();
      return model->theta;
    }
    case Method::kL2: {
      const double lambda = SelectL2Penalty(train, loss, cfg, constraint);
      return TrainL2(train, loss, lambda, constraint, cfg.gd_iterations);
    }
    case Method::kDeterministicDropout: {
      return Descend(
          [&](const RealVector& t) {
            return *DeterministicDropoutRisk(t, train, loss, cfg.keep_rate);
          },
          [&](const RealVector& t) {
            return *DeterministicDropoutRiskGradient(t, train, loss,
                                                     cfg.keep_rate);
          },
          constraint, RealVector(train.dim(), 0.0), cfg.gd_iterations);
    }
  }
  return absl::InvalidArgumentError("Unknown method");
}

absl::StatusOr<ExperimentResult> RunStabilityExperiment(
    const ExperimentConfig& cfg) {
  absl::StatusOr<Dataset> data =
      LoadDataSource(cfg.data, cfg.loss == LossKind::kLogistic);
  if (!data.ok()) return data.status();
  const GlmLoss loss = cfg.loss == LossKind::kLogistic ? GlmLoss::Logistic()
                                                       : GlmLoss::Squared();
  const size_t n = data->size();
  const size_t n_train = static_cast<size_t>(
      std::llround(cfg.train_fraction * static_cast<double>(n)));
  if (n_train < 2 || n_train >= n) {
    return absl::FailedPreconditionError(absl::StrCat(
        "Data error: a train fraction of ", cfg.train_fraction, " on ", n,
        " rows leaves an empty split"));
  }

  const size_t methods = cfg.methods.size();
  const size_t rhos = cfg.rhos.size();
  const size_t repeats = static_cast<size_t>(cfg.repeats);
  // errors[(method * repeats + r) * rhos + k], NaN marks a failed cell.
  std::vector<double> errors(methods * repeats * rhos,
                             std::numeric_limits<double>::quiet_NaN());
  std::vector<double> baselines(methods * repeats,
                                std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> messages(methods * repeats);

  ParallelFor(methods * repeats, cfg.threads, [&](size_t cell) {
    const size_t mi = cell / repeats;
    const size_t r = cell % repeats;
    const Method method = cfg.methods[mi];
    const uint64_t repeat_seed = DeriveSeed(cfg.seed, r);
    const uint64_t train_seed = DeriveSeed(
        repeat_seed, kMethodStream + static_cast<uint64_t>(method));

    // Train/test split, identical for every method within a repeat.
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    SeededRng split_rng(repeat_seed);
    for (size_t i = n - 1; i > 0; --i) {
      std::swap(order[i], order[split_rng.UniformIndex(i + 1)]);
    }
    std::vector<size_t> train_idx(order.begin(), order.begin() + n_train);
    std::vector<size_t> test_idx(order.begin() + n_train, order.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    const Dataset train = data->Subset(train_idx);
    const Dataset test = data->Subset(test_idx);

    absl::StatusOr<RealVector> full =
        TrainMethod(method, train, loss, cfg, train_seed);
    if (!full.ok()) {
      messages[cell] = absl::StrCat(MethodName(method), " repeat ", r, ": ",
                                    full.status().message());
      return;
    }
    baselines[cell] = TestError(*full, test, cfg.loss);
    for (size_t k = 0; k < rhos; ++k) {
      const double rho = cfg.rhos[k];
      if (rho == 0.0) {
        errors[cell * rhos + k] = baselines[cell];
        continue;
      }
      absl::StatusOr<Dataset> reduced =
          cfg.removal == RemovalMode::kRandom
              ? RandomRemoval(train, rho, DeriveSeed(repeat_seed,
                                                     kRemovalStream + k))
              : AdversarialRemoval(train, rho, *full);
      absl::StatusOr<RealVector> theta =
          reduced.ok() ? TrainMethod(method, *reduced, loss, cfg, train_seed)
                       : absl::StatusOr<RealVector>(reduced.status());
      if (!theta.ok()) {
        absl::StrAppend(&messages[cell], MethodName(method), " repeat ", r,
                        " rho ", rho, ": ", theta.status().message(), "; ");
        continue;
      }
      errors[cell * rhos + k] = TestError(*theta, test, cfg.loss);
    }
  });

  ExperimentResult result;
  for (const std::string& m : messages) {
    if (!m.empty()) result.failures.push_back(m);
  }
  for (size_t mi = 0; mi < methods; ++mi) {
    for (size_t k = 0; k < rhos; ++k) {
      StabilityRow row;
      row.method = cfg.methods[mi];
      row.rho = cfg.rhos[k];
      std::vector<double> values;
      double marginal = 0.0;
      for (size_t r = 0; r < repeats; ++r) {
        const size_t cell = mi * repeats + r;
        const double err = errors[cell * rhos + k];
        if (std::isnan(err) || std::isnan(baselines[cell])) {
          ++row.failures;
          continue;
        }
        values.push_back(err);
        marginal += std::abs(err - baselines[cell]);
      }
      if (values.empty()) {
        row.test_error = row.marginal_error = row.std =
            std::numeric_limits<double>::quiet_NaN();
      } else {
        row.test_error =
            std::accumulate(values.begin(), values.end(), 0.0) / values.size();
        row.marginal_error = marginal / static_cast<double>(values.size());
        row.std = SampleStd(values);
      }
      result.rows.push_back(row);
    }
  }
  return result;
}

std::string FormatStabilityCsv(std::span<const StabilityRow> rows) {
  std::string out = "method,rho,test_error,marginal_error,std\n";
  for (const StabilityRow& row : rows) {
    absl::StrAppendFormat(&out, "%s,%.6g,%.10g,%.10g,%.10g\n",
                          MethodName(row.method), row.rho, row.test_error,
                          row.marginal_error, row.std);
  }
  return out;
}

}  // namespace dropescape
