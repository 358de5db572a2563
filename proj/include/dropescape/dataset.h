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

#ifndef DROPESCAPE_DATASET_H_
#define DROPESCAPE_DATASET_H_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "dropescape/core_math.h"
#include "dropescape/glm.h"
#include "dropescape/projection.h"

namespace dropescape {

// n labelled rows in p dimensions with a declared bound B on every row norm.
// Immutable after construction; rows are stored contiguously.
class Dataset {
 public:
  // An empty dataset. Most statistics reject it.
  Dataset() = default;

  // Fails if rows are ragged, empty, non-finite, or if some row norm exceeds
  // `norm_bound`. Without a bound, B = max_i ||x_i||_2.
  static absl::StatusOr<Dataset> Create(
      const std::vector<RealVector>& rows, RealVector labels,
      std::optional<double> norm_bound = std::nullopt);

  // Same as Create from row-major storage.
  static absl::StatusOr<Dataset> FromFlat(
      size_t dim, RealVector features, RealVector labels,
      std::optional<double> norm_bound = std::nullopt);

  size_t size() const { return labels_.size(); }
  size_t dim() const { return dim_; }
  bool empty() const { return labels_.empty(); }
  double norm_bound() const { return norm_bound_; }

  std::span<const double> row(size_t i) const {
    return {features_.data() + i * dim_, dim_};
  }
  double label(size_t i) const { return labels_[i]; }
  std::span<const double> labels() const { return labels_; }
  std::span<const double> features() const { return features_; }

  // Rows in the given order; the norm bound is carried over.
  Dataset Subset(std::span<const size_t> indices) const;

  // Replace-one neighbour. The new row must respect the norm bound.
  absl::StatusOr<Dataset> WithRowReplaced(size_t index,
                                          std::span<const double> row,
                                          double label) const;

 private:
  size_t dim_ = 0;
  RealVector features_;
  RealVector labels_;
  double norm_bound_ = 0.0;
};

// Delta_1 = min_j (1/n) sum_i x_i(j)^2. Zero for an empty dataset.
double Delta1(const Dataset& d);

// sum_i x_i(j)^2 for every column j.
RealVector ColumnSumsOfSquares(const Dataset& d);

enum class LambdaVariant {
  // (1/n) min_k min_j sum_{i != k} x_i(j)^2; the GLM stability statistic.
  kSquared,
  // min_j min_k (1/n) sum_{i != k} x_i(j); the binary-data PTR statistic.
  kUnsquared,
};

// Leave-one-out minimum column statistic. Needs n >= 2.
absl::StatusOr<double> LambdaStatistic(
    const Dataset& d, LambdaVariant variant = LambdaVariant::kSquared);

// Lambda_Gamma = (1/n) min_{|S| = gamma} min_j sum_{i not in S} x_i(j)^2.
// For each column, dropping its gamma largest squares is optimal, so this is
// exact. Needs gamma < n.
absl::StatusOr<double> LambdaGamma(const Dataset& d, size_t gamma);

struct DataStats {
  double delta1 = 0.0;
  double lambda = 0.0;           // squared variant
  double lambda_unsquared = 0.0;
  std::map<size_t, double> lambda_gamma;
  RealVector column_sums_of_squares;
  // Population Delta when the generating distribution is known.
  std::optional<double> population_delta;

  // Population Delta if supplied, otherwise the plug-in Delta_1.
  double EffectiveDelta() const { return population_delta.value_or(delta1); }
};

absl::StatusOr<DataStats> ComputeDataStats(
    const Dataset& d, std::span<const size_t> gammas = {},
    std::optional<double> population_delta = std::nullopt);

// Upper bound G on |dl/du| over predictions u with
// |u| <= prediction_scale * B * (largest norm in c), and the observed labels.
absl::StatusOr<double> LipschitzOverConstraint(const GlmLoss& loss,
                                               const Dataset& d,
                                               const ConstraintSet& c,
                                               double prediction_scale = 1.0);

}  // namespace dropescape

#endif  // DROPESCAPE_DATASET_H_
