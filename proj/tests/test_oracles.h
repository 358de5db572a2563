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

// Brute-force reference implementations used only by the tests. Each one
// computes its answer by a different route than the library.

#ifndef DROPESCAPE_TESTS_TEST_ORACLES_H_
#define DROPESCAPE_TESTS_TEST_ORACLES_H_

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "dropescape/core_math.h"
#include "dropescape/dataset.h"
#include "dropescape/glm.h"

namespace dropescape {
namespace testing_oracles {

inline double SquaredDistance(const RealVector& a, const RealVector& b) {
  double s = 0.0;
  for (size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return s;
}

// Enumerates every support set S, solves the equality-constrained problem on
// S in closed form and keeps the best feasible candidate.
inline RealVector SimplexProjectionByActiveSets(const RealVector& v) {
  const size_t p = v.size();
  RealVector best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (uint32_t s = 1; s < (1u << p); ++s) {
    double sum = 0.0;
    int count = 0;
    for (size_t j = 0; j < p; ++j) {
      if (s >> j & 1) {
        sum += v[j];
        ++count;
      }
    }
    const double shift = (1.0 - sum) / count;
    RealVector x(p, 0.0);
    bool feasible = true;
    for (size_t j = 0; j < p; ++j) {
      if (s >> j & 1) {
        x[j] = v[j] + shift;
        if (x[j] < 0.0) feasible = false;
      }
    }
    if (!feasible) continue;
    const double dist = SquaredDistance(x, v);
    if (dist < best_dist) {
      best_dist = dist;
      best = x;
    }
  }
  return best;
}

// Grid search over the 3-d simplex at spacing h, refined once around the
// best grid point at spacing h / 10.
inline RealVector SimplexProjectionByGrid(const RealVector& v, double h) {
  RealVector best(3);
  double best_dist = std::numeric_limits<double>::infinity();
  auto scan = [&](double lo0, double hi0, double lo1, double hi1,
                  double step) {
    for (double a = lo0; a <= hi0 + 1e-15; a += step) {
      for (double b = lo1; b <= hi1 + 1e-15; b += step) {
        const double x0 = std::max(0.0, std::min(1.0, a));
        const double x1 = std::max(0.0, std::min(1.0, b));
        const double x2 = 1.0 - x0 - x1;
        if (x2 < -1e-15) continue;
        const RealVector x = {x0, x1, std::max(0.0, x2)};
        const double dist = SquaredDistance(x, v);
        if (dist < best_dist) {
          best_dist = dist;
          best = x;
        }
      }
    }
  };
  const double coarse = h * 100.0;
  scan(0.0, 1.0, 0.0, 1.0, coarse);
  const RealVector c = best;
  scan(c[0] - coarse, c[0] + coarse, c[1] - coarse, c[1] + coarse, h);
  return best;
}

// (1/n) sum_i E_b[(y_i - <theta, b * x_i> / alpha)^2] by summing over all
// 2^p masks with their Bernoulli probabilities.
inline double ExhaustiveDropoutRiskLeastSquares(const RealVector& theta,
                                                const Dataset& d,
                                                double alpha) {
  const size_t p = d.dim();
  double total = 0.0;
  for (uint32_t mask = 0; mask < (1u << p); ++mask) {
    double prob = 1.0;
    for (size_t j = 0; j < p; ++j) prob *= (mask >> j & 1) ? alpha : 1 - alpha;
    double risk = 0.0;
    for (size_t i = 0; i < d.size(); ++i) {
      double u = 0.0;
      for (size_t j = 0; j < p; ++j) {
        if (mask >> j & 1) u += theta[j] * d.row(i)[j];
      }
      const double r = d.label(i) - u / alpha;
      risk += r * r;
    }
    total += prob * risk / d.size();
  }
  return total;
}

// Same enumeration for an arbitrary loss.
inline double ExhaustiveDropoutRisk(const RealVector& theta, const Dataset& d,
                                    const GlmLoss& loss, double alpha) {
  const size_t p = d.dim();
  double total = 0.0;
  for (uint32_t mask = 0; mask < (1u << p); ++mask) {
    double prob = 1.0;
    for (size_t j = 0; j < p; ++j) prob *= (mask >> j & 1) ? alpha : 1 - alpha;
    double risk = 0.0;
    for (size_t i = 0; i < d.size(); ++i) {
      double u = 0.0;
      for (size_t j = 0; j < p; ++j) {
        if (mask >> j & 1) u += theta[j] * d.row(i)[j];
      }
      risk += loss.Value(u / alpha, d.label(i));
    }
    total += prob * risk / d.size();
  }
  return total;
}

// (1/n) min over removed subsets K with |K| = gamma of min_j sum_{i not in K}
// x_i(j)^2, enumerating every subset.
inline double LambdaGammaBySubsets(const Dataset& d, size_t gamma) {
  const size_t n = d.size();
  double best = std::numeric_limits<double>::infinity();
  for (uint32_t s = 0; s < (1u << n); ++s) {
    if (static_cast<size_t>(__builtin_popcount(s)) != gamma) continue;
    for (size_t j = 0; j < d.dim(); ++j) {
      double sum = 0.0;
      for (size_t i = 0; i < n; ++i) {
        if (!(s >> i & 1)) sum += d.row(i)[j] * d.row(i)[j];
      }
      best = std::min(best, sum / n);
    }
  }
  return best;
}

}  // namespace testing_oracles
}  // namespace dropescape

#endif  // DROPESCAPE_TESTS_TEST_ORACLES_H_
