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

// Seeded synthetic instances shared by the unit and acceptance tests.

#ifndef DROPESCAPE_TESTS_TEST_FIXTURES_H_
#define DROPESCAPE_TESTS_TEST_FIXTURES_H_

#include <algorithm>
#include <cmath>
#include <vector>

#include "dropescape/core_math.h"
#include "dropescape/dataset.h"
#include "dropescape/rng.h"

namespace dropescape {
namespace testing_fixtures {

// Rows with independent +-1 entries, so every column has mean square 1 and
// the second-moment matrix is close to the identity. Labels are
// <w, x> + noise * N(0, 1) with w ~ N(0, I / p).
inline Dataset WellConditionedLeastSquares(size_t n, size_t p, double noise,
                                           uint64_t seed) {
  SeededRng rng(seed);
  RealVector w(p);
  for (double& v : w) v = rng.StandardNormal() / std::sqrt(double(p));
  std::vector<RealVector> rows(n, RealVector(p));
  RealVector labels(n);
  for (size_t i = 0; i < n; ++i) {
    for (double& v : rows[i]) v = rng.Bernoulli(0.5) ? 1.0 : -1.0;
    labels[i] = Dot(rows[i], w) + noise * rng.StandardNormal();
  }
  return *Dataset::Create(rows, labels);
}

// Gaussian rows and labels, for generic property checks.
inline Dataset GaussianDataset(size_t n, size_t p, uint64_t seed) {
  SeededRng rng(seed);
  std::vector<RealVector> rows(n, RealVector(p));
  RealVector labels(n);
  for (size_t i = 0; i < n; ++i) {
    for (double& v : rows[i]) v = rng.StandardNormal();
    labels[i] = rng.StandardNormal();
  }
  return *Dataset::Create(rows, labels);
}

inline double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace testing_fixtures
}  // namespace dropescape

#endif  // DROPESCAPE_TESTS_TEST_FIXTURES_H_
