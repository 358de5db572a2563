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

#include "dropescape/dataset.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>

#include "absl/strings/str_cat.h"

namespace dropescape {
namespace {

// Row norms may exceed the declared bound by this relative slack, which
// absorbs rounding in user-supplied bounds computed from the same data.
constexpr double kNormSlack = 1e-12;

}  // namespace

absl::StatusOr<Dataset> Dataset::Create(const std::vector<RealVector>& rows,
                                        RealVector labels,
                                        std::optional<double> norm_bound) {
  if (rows.empty()) {
    return absl::FailedPreconditionError("Data error: dataset has no rows.");
  }
  const size_t dim = rows.front().size();
  RealVector flat;
  flat.reserve(rows.size() * dim);
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim) {
      return absl::InvalidArgumentError(absl::StrCat(
          "Dimension error: row ", i, " has ", rows[i].size(),
          " entries, expected ", dim));
    }
    flat.insert(flat.end(), rows[i].begin(), rows[i].end());
  }
  return FromFlat(dim, std::move(flat), std::move(labels), norm_bound);
}

absl::StatusOr<Dataset> Dataset::FromFlat(size_t dim, RealVector features,
                                          RealVector labels,
                                          std::optional<double> norm_bound) {
  if (labels.empty()) {
    return absl::FailedPreconditionError("Data error: dataset has no rows.");
  }
  if (dim == 0) {
    return absl::InvalidArgumentError("Dimension error: rows are empty.");
  }
  if (features.size() != labels.size() * dim) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Dimension error: ", features.size(), " feature entries for ",
        labels.size(), " rows of dimension ", dim));
  }
  if (absl::Status s = ValidateFinite(features); !s.ok()) return s;
  if (absl::Status s = ValidateFinite(labels); !s.ok()) return s;

  Dataset d;
  d.dim_ = dim;
  d.features_ = std::move(features);
  d.labels_ = std::move(labels);

  double max_norm = 0.0;
  for (size_t i = 0; i < d.size(); ++i) {
    max_norm = std::max(max_norm, Norm(d.row(i)));
  }
  if (norm_bound.has_value()) {
    if (!(*norm_bound > 0.0) || !std::isfinite(*norm_bound)) {
      return absl::InvalidArgumentError(
          absl::StrCat("Norm bound must be positive, got ", *norm_bound));
    }
    if (max_norm > *norm_bound * (1.0 + kNormSlack)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "Row norm ", max_norm, " exceeds declared bound ", *norm_bound));
    }
    d.norm_bound_ = *norm_bound;
  } else {
    d.norm_bound_ = max_norm;
  }
  return d;
}

Dataset Dataset::Subset(std::span<const size_t> indices) const {
  Dataset out;
  out.dim_ = dim_;
  out.norm_bound_ = norm_bound_;
  out.features_.reserve(indices.size() * dim_);
  out.labels_.reserve(indices.size());
  for (size_t i : indices) {
    const auto r = row(i);
    out.features_.insert(out.features_.end(), r.begin(), r.end());
    out.labels_.push_back(labels_[i]);
  }
  return out;
}

absl::StatusOr<Dataset> Dataset::WithRowReplaced(size_t index,
                                                 std::span<const double> row,
                                                 double label) const {
  if (index >= size()) {
    return absl::OutOfRangeError(
        absl::StrCat("Row index ", index, " out of range for n=", size()));
  }
  if (row.size() != dim_) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Dimension error: replacement row has ", row.size(),
        " entries, expected ", dim_));
  }
  if (absl::Status s = ValidateFinite(row); !s.ok()) return s;
  if (Norm(row) > norm_bound_ * (1.0 + kNormSlack)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Replacement row norm ", Norm(row), " exceeds bound ", norm_bound_));
  }
  Dataset out = *this;
  std::copy(row.begin(), row.end(), out.features_.begin() + index * dim_);
  out.labels_[index] = label;
  return out;
}

RealVector ColumnSumsOfSquares(const Dataset& d) {
  RealVector sums(d.dim(), 0.0);
  for (size_t i = 0; i < d.size(); ++i) {
    const auto r = d.row(i);
    for (size_t j = 0; j < d.dim(); ++j) sums[j] += r[j] * r[j];
  }
  return sums;
}

double Delta1(const Dataset& d) {
  if (d.empty()) return 0.0;
  const RealVector sums = ColumnSumsOfSquares(d);
  return *std::min_element(sums.begin(), sums.end()) /
         static_cast<double>(d.size());
}

absl::StatusOr<double> LambdaStatistic(const Dataset& d,
                                       LambdaVariant variant) {
  if (d.size() < 2) {
    return absl::FailedPreconditionError(absl::StrCat(
        "Insufficient data: leave-one-out statistic needs n >= 2, got ",
        d.size()));
  }
  const bool squared = variant == LambdaVariant::kSquared;
  double best = std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < d.dim(); ++j) {
    double total = 0.0;
    double largest = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < d.size(); ++i) {
      const double x = d.row(i)[j];
      const double v = squared ? x * x : x;
      total += v;
      largest = std::max(largest, v);
    }
    // Leaving out the largest entry minimises the remaining column sum.
    best = std::min(best, total - largest);
  }
  return best / static_cast<double>(d.size());
}

absl::StatusOr<double> LambdaGamma(const Dataset& d, size_t gamma) {
  if (gamma >= d.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Lambda_Gamma needs gamma < n, got gamma=", gamma, " n=", d.size()));
  }
  double best = std::numeric_limits<double>::infinity();
  RealVector column(d.size());
  for (size_t j = 0; j < d.dim(); ++j) {
    for (size_t i = 0; i < d.size(); ++i) {
      const double x = d.row(i)[j];
      column[i] = x * x;
    }
    std::sort(column.begin(), column.end(), std::greater<>());
    double kept = 0.0;
    for (size_t i = gamma; i < column.size(); ++i) kept += column[i];
    best = std::min(best, kept);
  }
  return best / static_cast<double>(d.size());
}

absl::StatusOr<DataStats> ComputeDataStats(
    const Dataset& d, std::span<const size_t> gammas,
    std::optional<double> population_delta) {
  DataStats stats;
  stats.delta1 = Delta1(d);
  stats.column_sums_of_squares = ColumnSumsOfSquares(d);
  absl::StatusOr<double> lambda = LambdaStatistic(d, LambdaVariant::kSquared);
  if (!lambda.ok()) return lambda.status();
  stats.lambda = *lambda;
  absl::StatusOr<double> unsquared =
      LambdaStatistic(d, LambdaVariant::kUnsquared);
  if (!unsquared.ok()) return unsquared.status();
  stats.lambda_unsquared = *unsquared;
  for (size_t gamma : gammas) {
    absl::StatusOr<double> lg = LambdaGamma(d, gamma);
    if (!lg.ok()) return lg.status();
    stats.lambda_gamma[gamma] = *lg;
  }
  if (population_delta.has_value()) {
    if (!(*population_delta >= 0.0)) {
      return absl::InvalidArgumentError("Population Delta must be >= 0");
    }
    stats.population_delta = population_delta;
  }
  return stats;
}

absl::StatusOr<double> LipschitzOverConstraint(const GlmLoss& loss,
                                               const Dataset& d,
                                               const ConstraintSet& c,
                                               double prediction_scale) {
  if (d.empty()) {
    return absl::FailedPreconditionError(
        "Data error: Lipschitz bound needs a non-empty dataset.");
  }
  if (!c.bounded()) {
    return absl::InvalidArgumentError(
        "Lipschitz bound needs a bounded constraint set.");
  }
  if (!(prediction_scale > 0.0)) {
    return absl::InvalidArgumentError("Prediction scale must be positive.");
  }
  double y_bound = 0.0;
  for (double y : d.labels()) y_bound = std::max(y_bound, std::abs(y));
  const double u_bound = prediction_scale * d.norm_bound() * c.MaxNorm(d.dim());
  return loss.LipschitzOver(u_bound, y_bound);
}

}  // namespace dropescape
