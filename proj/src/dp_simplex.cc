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

#include "dropescape/dp_simplex.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <thread>

#include "absl/strings/str_cat.h"

namespace dropescape {
namespace {

using Int128 = unsigned __int128;

absl::Status ValidateNeighbors(const BinaryDataset& d,
                               const BinaryDataset& d_prime) {
  if (d.size() != d_prime.size() || d.dim() != d_prime.dim()) {
    return absl::InvalidArgumentError(
        "Input error: neighbouring datasets must have the same shape.");
  }
  if (d.size() == 0 || d.dim() == 0) {
    return absl::InvalidArgumentError("Input error: empty dataset.");
  }
  size_t differing = 0;
  for (size_t i = 0; i < d.size(); ++i) {
    const auto a = d.row(i);
    const auto b = d_prime.row(i);
    if (!std::equal(a.begin(), a.end(), b.begin())) ++differing;
  }
  if (differing > 1) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Input error: datasets differ in ", differing,
        " rows; neighbours differ in at most one."));
  }
  return absl::OkStatus();
}

// Symmetric likelihood ratio of one outcome.
double OutcomeRatio(double a, double b) {
  if (a == 0.0 && b == 0.0) return 1.0;
  if (a == 0.0 || b == 0.0) return std::numeric_limits<double>::infinity();
  return std::max(a / b, b / a);
}

void FillRatios(ArgminAudit& audit) {
  const size_t p = audit.prob_d.size();
  audit.ratio.assign(p, 1.0);
  audit.max_ratio = 1.0;
  for (size_t j = 0; j < p; ++j) {
    audit.ratio[j] = OutcomeRatio(audit.prob_d[j], audit.prob_d_prime[j]);
    audit.max_ratio = std::max(audit.max_ratio, audit.ratio[j]);
  }
}

// Bit (i * p + j) of an assignment is b_i(j). Column j's value is the
// popcount of the assignment restricted to the rows where x_i(j) = 1.
std::vector<uint64_t> ColumnSupportMasks(const BinaryDataset& d) {
  std::vector<uint64_t> masks(d.dim(), 0);
  for (size_t i = 0; i < d.size(); ++i) {
    for (size_t j = 0; j < d.dim(); ++j) {
      if (d.at(i, j)) masks[j] |= uint64_t{1} << (i * d.dim() + j);
    }
  }
  return masks;
}

size_t ArgminForAssignment(uint64_t assignment,
                           const std::vector<uint64_t>& support) {
  size_t best = 0;
  int best_value = std::popcount(assignment & support[0]);
  for (size_t j = 1; j < support.size(); ++j) {
    const int value = std::popcount(assignment & support[j]);
    if (value < best_value) {
      best_value = value;
      best = j;
    }
  }
  return best;
}

void CountBlock(uint64_t begin, uint64_t end,
                const std::vector<uint64_t>& support_d,
                const std::vector<uint64_t>& support_dp,
                std::vector<uint64_t>& counts_d,
                std::vector<uint64_t>& counts_dp) {
  for (uint64_t a = begin; a < end; ++a) {
    ++counts_d[ArgminForAssignment(a, support_d)];
    ++counts_dp[ArgminForAssignment(a, support_dp)];
  }
}

// P[Bin(nu, 1/2) = s] for s = 0..nu.
std::vector<double> BinomialHalfPmf(size_t nu) {
  std::vector<double> pmf(nu + 1);
  // Work in log space so large nu does not overflow.
  const double log_half_pow = -static_cast<double>(nu) * std::log(2.0);
  for (size_t s = 0; s <= nu; ++s) {
    pmf[s] = std::exp(std::lgamma(nu + 1.0) - std::lgamma(s + 1.0) -
                      std::lgamma(nu - s + 1.0) + log_half_pow);
  }
  return pmf;
}

std::vector<double> FactorizedDistribution(const BinaryDataset& d) {
  const size_t p = d.dim();
  std::vector<std::vector<double>> pmf(p);
  size_t max_count = 0;
  for (size_t j = 0; j < p; ++j) {
    pmf[j] = BinomialHalfPmf(d.ColumnCount(j));
    max_count = std::max(max_count, d.ColumnCount(j));
  }
  // tail_ge[j][s] = P(f_j >= s), tail_gt[j][s] = P(f_j > s).
  std::vector<std::vector<double>> tail_ge(p), tail_gt(p);
  for (size_t j = 0; j < p; ++j) {
    tail_ge[j].assign(max_count + 2, 0.0);
    tail_gt[j].assign(max_count + 2, 0.0);
    for (size_t s = pmf[j].size(); s-- > 0;) {
      tail_ge[j][s] = tail_ge[j][s + 1] + pmf[j][s];
    }
    for (size_t s = 0; s <= max_count; ++s) tail_gt[j][s] = tail_ge[j][s + 1];
  }
  std::vector<double> prob(p, 0.0);
  for (size_t j = 0; j < p; ++j) {
    for (size_t s = 0; s < pmf[j].size(); ++s) {
      double term = pmf[j][s];
      for (size_t k = 0; k < p && term > 0.0; ++k) {
        if (k < j) term *= tail_gt[k][s];
        if (k > j) term *= tail_ge[k][s];
      }
      prob[j] += term;
    }
  }
  return prob;
}

Int128 Binomial(int64_t n, int64_t k) {
  if (k < 0 || k > n) return 0;
  Int128 result = 1;
  for (int64_t i = 1; i <= k; ++i) {
    result = result * static_cast<Int128>(n - k + i) / static_cast<Int128>(i);
  }
  return result;
}

// 95% Wilson interval for a binomial proportion.
std::pair<double, double> Wilson(double successes, double trials) {
  constexpr double z = 1.959963984540054;
  const double phat = successes / trials;
  const double denom = 1.0 + z * z / trials;
  const double center = (phat + z * z / (2.0 * trials)) / denom;
  const double half =
      z * std::sqrt(phat * (1.0 - phat) / trials + z * z / (4.0 * trials * trials)) /
      denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

}  // namespace

absl::StatusOr<BinaryDataset> BinaryDataset::Create(
    const std::vector<std::vector<uint8_t>>& rows) {
  if (rows.empty() || rows.front().empty()) {
    return absl::FailedPreconditionError("Data error: empty binary dataset.");
  }
  BinaryDataset d;
  d.size_ = rows.size();
  d.dim_ = rows.front().size();
  d.bits_.reserve(d.size_ * d.dim_);
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d.dim_) {
      return absl::InvalidArgumentError(
          absl::StrCat("Dimension error: ragged row ", i));
    }
    for (uint8_t v : rows[i]) {
      if (v > 1) {
        return absl::InvalidArgumentError(
            absl::StrCat("Binary data must be 0/1; row ", i));
      }
      d.bits_.push_back(v);
    }
  }
  return d;
}

absl::StatusOr<BinaryDataset> BinaryDataset::FromDataset(const Dataset& d) {
  std::vector<std::vector<uint8_t>> rows(d.size(),
                                         std::vector<uint8_t>(d.dim()));
  for (size_t i = 0; i < d.size(); ++i) {
    for (size_t j = 0; j < d.dim(); ++j) {
      const double v = d.row(i)[j];
      if (v != 0.0 && v != 1.0) {
        return absl::InvalidArgumentError(absl::StrCat(
            "Binary data must be 0/1; row ", i, " column ", j, " is ", v));
      }
      rows[i][j] = static_cast<uint8_t>(v);
    }
  }
  return Create(rows);
}

size_t BinaryDataset::ColumnCount(size_t j) const {
  size_t count = 0;
  for (size_t i = 0; i < size_; ++i) count += at(i, j);
  return count;
}

absl::StatusOr<BinaryDataset> BinaryDataset::WithRowReplaced(
    size_t index, std::span<const uint8_t> row) const {
  if (index >= size_) return absl::OutOfRangeError("Row index out of range");
  if (row.size() != dim_) {
    return absl::InvalidArgumentError("Dimension error: replacement row");
  }
  BinaryDataset out = *this;
  for (size_t j = 0; j < dim_; ++j) {
    if (row[j] > 1) return absl::InvalidArgumentError("Binary data must be 0/1");
    out.bits_[index * dim_ + j] = row[j];
  }
  return out;
}

absl::StatusOr<BinaryDataset> RandomBinaryDataset(size_t n, size_t p,
                                                  double density,
                                                  uint64_t seed) {
  if (!(density >= 0.0 && density <= 1.0)) {
    return absl::InvalidArgumentError("density must lie in [0, 1]");
  }
  SeededRng rng(seed);
  std::vector<std::vector<uint8_t>> rows(n, std::vector<uint8_t>(p));
  for (auto& row : rows) {
    for (uint8_t& bit : row) bit = rng.Bernoulli(density) ? 1 : 0;
  }
  return BinaryDataset::Create(rows);
}

absl::StatusOr<CLambda> ComputeCLambda(const BinaryDataset& d) {
  if (d.size() < 2) {
    return absl::FailedPreconditionError(absl::StrCat(
        "Insufficient data: c(j) needs n >= 2, got ", d.size()));
  }
  CLambda out;
  out.c.resize(d.dim());
  const double n = static_cast<double>(d.size());
  for (size_t j = 0; j < d.dim(); ++j) {
    const size_t count = d.ColumnCount(j);
    // Leaving out a row with a 1 (if any) minimises the remaining sum.
    const size_t kept = count > 0 ? count - 1 : 0;
    out.c[j] = static_cast<double>(kept) / n;
  }
  out.lambda = *std::min_element(out.c.begin(), out.c.end());
  return out;
}

absl::StatusOr<size_t> DropoutArgmin(const BinaryDataset& d,
                                     std::span<const DropoutMask> masks) {
  if (masks.size() != d.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Need one mask per row: ", masks.size(), " masks for ", d.size(),
        " rows"));
  }
  if (d.dim() == 0) return absl::InvalidArgumentError("Empty dimension");
  std::vector<size_t> sums(d.dim(), 0);
  for (size_t i = 0; i < d.size(); ++i) {
    if (masks[i].size() != d.dim()) {
      return absl::InvalidArgumentError("Dimension error: mask length");
    }
    for (size_t j = 0; j < d.dim(); ++j) sums[j] += d.at(i, j) & masks[i][j];
  }
  return static_cast<size_t>(
      std::min_element(sums.begin(), sums.end()) - sums.begin());
}

RealVector SimplexPrivateResult::Theta(size_t dim) const {
  if (!vertex.has_value()) return {};
  RealVector theta(dim, 0.0);
  theta[*vertex] = 1.0;
  return theta;
}

absl::StatusOr<SimplexPrivateResult> PrivateSimplexLearnWithNoise(
    const BinaryDataset& d, const PrivacyBudget& budget, double laplace_draw,
    SeededRng& rng) {
  absl::StatusOr<CLambda> stats = ComputeCLambda(d);
  if (!stats.ok()) return stats.status();
  const double n = static_cast<double>(d.size());
  SimplexPrivateResult result;
  result.lambda = stats->lambda;
  result.noisy_lambda = stats->lambda + laplace_draw;
  result.threshold = 2.0 * budget.LogInverseDelta() / (n * budget.epsilon());
  if (!(result.noisy_lambda > result.threshold)) return result;

  std::vector<DropoutMask> masks;
  masks.reserve(d.size());
  for (size_t i = 0; i < d.size(); ++i) {
    absl::StatusOr<DropoutMask> m = SampleMask(d.dim(), 0.5, rng);
    if (!m.ok()) return m.status();
    masks.push_back(*std::move(m));
  }
  absl::StatusOr<size_t> vertex = DropoutArgmin(d, masks);
  if (!vertex.ok()) return vertex.status();
  result.vertex = *vertex;
  return result;
}

absl::StatusOr<SimplexPrivateResult> PrivateSimplexLearn(
    const BinaryDataset& d, const PrivacyBudget& budget, SeededRng& rng) {
  if (d.size() < 2) {
    return absl::FailedPreconditionError("Insufficient data: n >= 2 required");
  }
  const double scale =
      1.0 / (static_cast<double>(d.size()) * budget.epsilon());
  const double noise = rng.Laplace(scale);
  return PrivateSimplexLearnWithNoise(d, budget, noise, rng);
}

absl::StatusOr<ArgminAudit> AuditArgminDistribution(
    const BinaryDataset& d, const BinaryDataset& d_prime, int threads) {
  if (absl::Status s = ValidateNeighbors(d, d_prime); !s.ok()) return s;
  const size_t bits = d.size() * d.dim();
  if (bits > kMaxExhaustiveAuditBits) {
    return absl::ResourceExhaustedError(absl::StrCat(
        "Size error: exhaustive audit needs n*p <= ", kMaxExhaustiveAuditBits,
        ", got ", bits, "; use the factorized or sampled audit"));
  }
  const uint64_t total = uint64_t{1} << bits;
  const auto support_d = ColumnSupportMasks(d);
  const auto support_dp = ColumnSupportMasks(d_prime);
  const size_t p = d.dim();

  const int workers = std::max(1, threads);
  std::vector<std::vector<uint64_t>> counts_d(workers,
                                              std::vector<uint64_t>(p, 0));
  std::vector<std::vector<uint64_t>> counts_dp = counts_d;
  const uint64_t block = (total + workers - 1) / workers;
  if (workers == 1) {
    CountBlock(0, total, support_d, support_dp, counts_d[0], counts_dp[0]);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      const uint64_t begin = std::min(total, w * block);
      const uint64_t end = std::min(total, begin + block);
      pool.emplace_back(CountBlock, begin, end, std::cref(support_d),
                        std::cref(support_dp), std::ref(counts_d[w]),
                        std::ref(counts_dp[w]));
    }
    for (std::thread& t : pool) t.join();
  }

  ArgminAudit audit;
  audit.assignments = total;
  audit.prob_d.assign(p, 0.0);
  audit.prob_d_prime.assign(p, 0.0);
  for (size_t j = 0; j < p; ++j) {
    uint64_t cd = 0, cdp = 0;
    for (int w = 0; w < workers; ++w) {
      cd += counts_d[w][j];
      cdp += counts_dp[w][j];
    }
    // Division by a power of two is exact.
    audit.prob_d[j] = static_cast<double>(cd) / static_cast<double>(total);
    audit.prob_d_prime[j] = static_cast<double>(cdp) / static_cast<double>(total);
  }
  FillRatios(audit);
  return audit;
}

absl::StatusOr<ArgminAudit> AuditArgminDistributionFactorized(
    const BinaryDataset& d, const BinaryDataset& d_prime) {
  if (absl::Status s = ValidateNeighbors(d, d_prime); !s.ok()) return s;
  ArgminAudit audit;
  audit.prob_d = FactorizedDistribution(d);
  audit.prob_d_prime = FactorizedDistribution(d_prime);
  FillRatios(audit);
  return audit;
}

absl::StatusOr<SampledAudit> AuditArgminDistributionSampled(
    const BinaryDataset& d, const BinaryDataset& d_prime, int64_t samples,
    uint64_t seed) {
  if (absl::Status s = ValidateNeighbors(d, d_prime); !s.ok()) return s;
  if (samples < 1) return absl::InvalidArgumentError("samples must be >= 1");
  const size_t p = d.dim();
  std::vector<uint64_t> counts_d(p, 0), counts_dp(p, 0);
  SeededRng rng(seed);
  std::vector<size_t> sums_d(p), sums_dp(p);
  for (int64_t s = 0; s < samples; ++s) {
    std::fill(sums_d.begin(), sums_d.end(), 0);
    std::fill(sums_dp.begin(), sums_dp.end(), 0);
    // One shared mask assignment per sample for both datasets.
    for (size_t i = 0; i < d.size(); ++i) {
      for (size_t j = 0; j < p; ++j) {
        const uint8_t b = rng.Bernoulli(0.5) ? 1 : 0;
        sums_d[j] += d.at(i, j) & b;
        sums_dp[j] += d_prime.at(i, j) & b;
      }
    }
    ++counts_d[std::min_element(sums_d.begin(), sums_d.end()) - sums_d.begin()];
    ++counts_dp[std::min_element(sums_dp.begin(), sums_dp.end()) -
                sums_dp.begin()];
  }
  SampledAudit out;
  const double total = static_cast<double>(samples);
  out.estimate.assignments = static_cast<uint64_t>(samples);
  for (size_t j = 0; j < p; ++j) {
    out.estimate.prob_d.push_back(counts_d[j] / total);
    out.estimate.prob_d_prime.push_back(counts_dp[j] / total);
    const auto [ld, ud] = Wilson(counts_d[j], total);
    const auto [ldp, udp] = Wilson(counts_dp[j], total);
    out.lower_d.push_back(ld);
    out.upper_d.push_back(ud);
    out.lower_d_prime.push_back(ldp);
    out.upper_d_prime.push_back(udp);
  }
  FillRatios(out.estimate);
  return out;
}

absl::StatusOr<std::vector<BinomialRatioRow>> BinomialRatioCheck(int64_t nu) {
  if (nu < 2 || nu % 2 != 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("nu must be even and >= 2, got ", nu));
  }
  if (nu > 120) {
    return absl::InvalidArgumentError("nu above 120 overflows exact arithmetic");
  }
  const int64_t half = nu / 2;
  std::vector<BinomialRatioRow> rows;
  for (int64_t k = 0; k < half; ++k) {
    const int64_t v = half + k;
    const Int128 more = Binomial(nu + 1, v);  // times 2^-(nu+1)
    const Int128 fewer = Binomial(nu, v);     // times 2^-nu
    BinomialRatioRow row;
    row.k = k;
    row.ratio = static_cast<double>(more) / (2.0 * static_cast<double>(fewer));
    row.bound = static_cast<double>(half + k + 1) / static_cast<double>(half - k);
    // more / (2 fewer) <= (half + k + 1) / (half - k)
    row.within_bound = more * static_cast<Int128>(half - k) <=
                       2 * fewer * static_cast<Int128>(half + k + 1);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace dropescape
