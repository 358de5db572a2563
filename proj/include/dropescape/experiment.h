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

#ifndef DROPESCAPE_EXPERIMENT_H_
#define DROPESCAPE_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "dropescape/core_math.h"
#include "dropescape/data_io.h"
#include "dropescape/dataset.h"
#include "dropescape/glm.h"

namespace dropescape {

// Flat key=value configuration. '#' starts a comment; blank lines are
// ignored; later keys override earlier ones.
class KeyValueConfig {
 public:
  static absl::StatusOr<KeyValueConfig> Parse(std::string_view text);
  static absl::StatusOr<KeyValueConfig> Load(const std::string& path);

  bool Has(std::string_view key) const;
  void Set(std::string key, std::string value);
  std::string GetString(std::string_view key, std::string fallback) const;
  absl::StatusOr<double> GetDouble(std::string_view key,
                                   double fallback) const;
  absl::StatusOr<int64_t> GetInt(std::string_view key, int64_t fallback) const;
  absl::StatusOr<bool> GetBool(std::string_view key, bool fallback) const;
  absl::StatusOr<std::vector<double>> GetDoubleList(
      std::string_view key, std::vector<double> fallback) const;
  std::vector<std::string> GetStringList(
      std::string_view key, std::vector<std::string> fallback) const;

  // Keys that no Get call has asked for; used to reject typos.
  std::vector<std::string> UnreadKeys() const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
  mutable std::map<std::string, bool, std::less<>> read_;
};

// Gauss-Hermite rule for the weight exp(-t^2), by the Golub-Welsch
// eigenvalue method.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
absl::StatusOr<QuadratureRule> GaussHermite(size_t points);

// Deterministic (marginalised) dropout risk at keep rate alpha. With
// mu = <theta, x> and s^2 = (1 - alpha) / alpha * sum_j x_j^2 theta_j^2:
//   squared:  (mu - y)^2 + s^2, exactly;
//   logistic: E l(u; y) for u ~ N(mu, s^2), by 20-point Gauss-Hermite.
absl::StatusOr<double> DeterministicDropoutRisk(std::span<const double> theta,
                                                const Dataset& d,
                                                const GlmLoss& loss,
                                                double alpha);

// Gradient of DeterministicDropoutRisk. For the logistic loss it uses
//   E[l'(u)] x + (1 - alpha) / alpha * E[l''(u)] (x * x * theta),
// which stays finite as s -> 0.
absl::StatusOr<RealVector> DeterministicDropoutRiskGradient(
    std::span<const double> theta, const Dataset& d, const GlmLoss& loss,
    double alpha);

// e^(m eps) base_risk + m B delta.
absl::StatusOr<double> AdversarialRiskBound(double eps, double delta, double m,
                                            double b, double base_risk);

enum class RemovalMode { kRandom, kAdversarial };

enum class Method { kNone, kL2, kDropout, kDeterministicDropout };

// Seven log-spaced penalties from 1e-4 to 1e1.
std::vector<double> DefaultL2Grid();

absl::StatusOr<Method> ParseMethod(std::string_view name);
std::string MethodName(Method method);

struct ExperimentConfig {
  DataSource data;
  LossKind loss = LossKind::kLogistic;
  double train_fraction = 0.7;
  std::vector<double> rhos = {0.0, 0.5};
  RemovalMode removal = RemovalMode::kRandom;
  std::vector<Method> methods = {Method::kNone, Method::kDropout};
  int64_t repeats = 20;
  uint64_t seed = 1;

  double keep_rate = 0.5;
  // SGD steps; 0 means 10 times the reduced training-set size.
  int64_t iterations = 0;
  // L2-ball radius for the SGD methods; 0 means unconstrained.
  double radius = 0.0;
  // Empty means DefaultL2Grid().
  std::vector<double> l2_grid;
  int64_t cv_folds = 5;
  int64_t gd_iterations = 500;
  int threads = 1;
};

// Reads data, format, synthetic, synthetic_n, synthetic_p, synthetic_noise
// and synthetic_seed.
absl::StatusOr<DataSource> DataSourceFromKeyValues(const KeyValueConfig& kv);

// Reads the experiment keys. Unknown keys are an error.
absl::StatusOr<ExperimentConfig> ExperimentConfigFromKeyValues(
    const KeyValueConfig& kv);

struct StabilityRow {
  Method method = Method::kNone;
  double rho = 0.0;
  double test_error = 0.0;       // mean over successful repeats
  double marginal_error = 0.0;   // mean |error - baseline error|
  double std = 0.0;              // sample std of the test error
  int64_t failures = 0;
};

struct ExperimentResult {
  std::vector<StabilityRow> rows;  // method-major, rho in config order
  std::vector<std::string> failures;
};

// Repeat r splits the data with seed DeriveSeed(seed, r). Training for
// (method, repeat) uses one seed for every rho, so the rho = 0 cell is the
// baseline run itself. Adversarial removal ranks rows with the method's own
// full-training-set model.
absl::StatusOr<ExperimentResult> RunStabilityExperiment(
    const ExperimentConfig& cfg);

// Header "method,rho,test_error,marginal_error,std" and one line per row.
std::string FormatStabilityCsv(std::span<const StabilityRow> rows);

// Held-out error: the misclassified fraction (margin y <theta, x> <= 0) for
// the logistic loss, the mean squared error otherwise.
double TestError(std::span<const double> theta, const Dataset& d,
                 LossKind loss);

// Trains one method on `train`. Exposed for tests.
absl::StatusOr<RealVector> TrainMethod(Method method, const Dataset& train,
                                       const GlmLoss& loss,
                                       const ExperimentConfig& cfg,
                                       uint64_t seed);

}  // namespace dropescape

#endif  // DROPESCAPE_EXPERIMENT_H_
