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

#ifndef DROPESCAPE_DP_SIMPLEX_H_
#define DROPESCAPE_DP_SIMPLEX_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "dropescape/core_math.h"
#include "dropescape/dataset.h"
#include "dropescape/privacy.h"
#include "dropescape/rng.h"

namespace dropescape {

// n rows in {0,1}^p.
class BinaryDataset {
 public:
  BinaryDataset() = default;

  static absl::StatusOr<BinaryDataset> Create(
      const std::vector<std::vector<uint8_t>>& rows);
  // Uses the features of `d`; every entry must be exactly 0 or 1.
  static absl::StatusOr<BinaryDataset> FromDataset(const Dataset& d);

  size_t size() const { return size_; }
  size_t dim() const { return dim_; }
  uint8_t at(size_t i, size_t j) const { return bits_[i * dim_ + j]; }
  std::span<const uint8_t> row(size_t i) const {
    return {bits_.data() + i * dim_, dim_};
  }
  // Number of ones in column j.
  size_t ColumnCount(size_t j) const;

  absl::StatusOr<BinaryDataset> WithRowReplaced(
      size_t index, std::span<const uint8_t> row) const;

  friend bool operator==(const BinaryDataset&, const BinaryDataset&) = default;

 private:
  size_t size_ = 0;
  size_t dim_ = 0;
  std::vector<uint8_t> bits_;
};

// n x p entries drawn Bernoulli(density).
absl::StatusOr<BinaryDataset> RandomBinaryDataset(size_t n, size_t p,
                                                  double density,
                                                  uint64_t seed);

struct CLambda {
  RealVector c;         // c(j) = min_k (1/n) sum_{i != k} x_i(j)
  double lambda = 0.0;  // min_j c(j)
};

// Exact leave-one-out column means. Needs n >= 2.
absl::StatusOr<CLambda> ComputeCLambda(const BinaryDataset& d);

// argmin_j sum_i x_i(j) b_i(j) with ties to the lowest index. Indices are
// zero-based.
absl::StatusOr<size_t> DropoutArgmin(const BinaryDataset& d,
                                     std::span<const DropoutMask> masks);

struct SimplexPrivateResult {
  std::optional<size_t> vertex;  // zero-based; empty on failure
  double lambda = 0.0;
  double noisy_lambda = 0.0;
  double threshold = 0.0;

  bool ok() const { return vertex.has_value(); }
  // The released model e_vertex; empty on failure.
  RealVector Theta(size_t dim) const;
};

// Private dropout learning of a linear loss over the simplex:
//   Lambda_hat = Lambda + Lap(1 / (n eps)); if Lambda_hat > 2 log(1/delta) /
//   (n eps), draw masks b_i ~ unif{0,1}^p and release the vertex e_j with
//   j = DropoutArgmin; otherwise report failure.
// The overall guarantee of this procedure is (2 eps, delta).
absl::StatusOr<SimplexPrivateResult> PrivateSimplexLearn(
    const BinaryDataset& d, const PrivacyBudget& budget, SeededRng& rng);

// Same with the Laplace draw pinned by the caller; masks still come from rng.
absl::StatusOr<SimplexPrivateResult> PrivateSimplexLearnWithNoise(
    const BinaryDataset& d, const PrivacyBudget& budget, double laplace_draw,
    SeededRng& rng);

struct ArgminAudit {
  std::vector<double> prob_d;
  std::vector<double> prob_d_prime;
  // Per-outcome max(pD / pD', pD' / pD); 1 when both are zero, infinite when
  // exactly one is zero.
  std::vector<double> ratio;
  double max_ratio = 1.0;
  uint64_t assignments = 0;  // mask assignments enumerated per dataset
};

// Largest n * p accepted by the exhaustive audit.
inline constexpr size_t kMaxExhaustiveAuditBits = 20;

// Exact outcome distribution of DropoutArgmin over all 2^(n p) equiprobable
// mask assignments, for two datasets that differ in at most one row.
// `threads` splits the enumeration into blocks merged by integer addition.
absl::StatusOr<ArgminAudit> AuditArgminDistribution(const BinaryDataset& d,
                                                    const BinaryDataset& d_prime,
                                                    int threads = 1);

// The same distribution computed from the per-column binomial laws: column
// sums are independent Binomial(nu_j, 1/2) and
//   P(argmin = j) = sum_s P(f_j = s) prod_{k<j} P(f_k > s) prod_{k>j} P(f_k >= s).
// Exact up to floating-point rounding and not limited in size.
absl::StatusOr<ArgminAudit> AuditArgminDistributionFactorized(
    const BinaryDataset& d, const BinaryDataset& d_prime);

struct SampledAudit {
  ArgminAudit estimate;
  // 95% Wilson score intervals per outcome.
  std::vector<double> lower_d, upper_d, lower_d_prime, upper_d_prime;
};

// Monte Carlo audit for instances beyond the exhaustive limit.
absl::StatusOr<SampledAudit> AuditArgminDistributionSampled(
    const BinaryDataset& d, const BinaryDataset& d_prime, int64_t samples,
    uint64_t seed);

struct BinomialRatioRow {
  int64_t k = 0;
  // P[Bin(nu + 1, 1/2) = nu/2 + k] / P[Bin(nu, 1/2) = nu/2 + k]
  double ratio = 0.0;
  // (nu/2 + k + 1) / (nu/2 - k)
  double bound = 0.0;
  // Decided by exact integer cross-multiplication.
  bool within_bound = false;
};

// Checks the binomial likelihood-ratio bound for every 0 <= k < nu/2. The
// first dataset has one more 1 in the column than its neighbour. nu must be
// even and at least 2.
absl::StatusOr<std::vector<BinomialRatioRow>> BinomialRatioCheck(int64_t nu);

}  // namespace dropescape

#endif  // DROPESCAPE_DP_SIMPLEX_H_
