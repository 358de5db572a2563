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

#include "dropescape/projection.h"

#include <cmath>
#include <limits>
#include <vector>

#include "gtest/gtest.h"
#include "test_oracles.h"

namespace dropescape {
namespace {

TEST(ProjectSimplexTest, FeasiblePointUnchanged) {
  const RealVector p = *ProjectSimplex(std::vector<double>{0.3, 0.7});
  EXPECT_NEAR(p[0], 0.3, 1e-15);
  EXPECT_NEAR(p[1], 0.7, 1e-15);
}

TEST(ProjectSimplexTest, SingleActiveCoordinate) {
  EXPECT_EQ(*ProjectSimplex(std::vector<double>{2, 0}), (RealVector{1, 0}));
}

TEST(ProjectSimplexTest, ThreeDimensionalExampleMatchesOracles) {
  const RealVector v = {0.6, 0.2, 0.0};
  const RealVector p = *ProjectSimplex(v);
  const RealVector exact = testing_oracles::SimplexProjectionByActiveSets(v);
  const RealVector grid = testing_oracles::SimplexProjectionByGrid(v, 1e-4);
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(p[j], exact[j], 1e-12);
    EXPECT_NEAR(p[j], grid[j], 1e-4);
  }
  EXPECT_NEAR(p[0], 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(p[1], 0.8 / 3.0, 1e-12);
  EXPECT_NEAR(p[2], 0.2 / 3.0, 1e-12);
}

TEST(ProjectSimplexTest, EmptyIsError) {
  EXPECT_FALSE(ProjectSimplex(std::vector<double>{}).ok());
}

TEST(ProjectSimplexTest, RandomInputsFeasibleIdempotentOptimal) {
  SeededRng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const size_t p = 1 + rng.UniformIndex(8);
    RealVector v(p);
    for (double& x : v) x = 3.0 * rng.StandardNormal();
    const RealVector proj = *ProjectSimplex(v);
    double sum = 0.0;
    for (double x : proj) {
      EXPECT_GE(x, -1e-12);
      sum += x;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    const RealVector again = *ProjectSimplex(proj);
    for (size_t j = 0; j < p; ++j) EXPECT_NEAR(again[j], proj[j], 1e-12);
    const RealVector oracle = testing_oracles::SimplexProjectionByActiveSets(v);
    for (size_t j = 0; j < p; ++j) EXPECT_NEAR(proj[j], oracle[j], 1e-10);
  }
}

TEST(ProjectL2BallTest, Examples) {
  const RealVector inside = {0.3, 0.4};
  EXPECT_EQ(*ProjectL2Ball(inside, 1.0), inside);
  const RealVector p = *ProjectL2Ball(std::vector<double>{3, 4}, 1.0);
  EXPECT_NEAR(p[0], 0.6, 1e-15);
  EXPECT_NEAR(p[1], 0.8, 1e-15);
  EXPECT_FALSE(ProjectL2Ball(inside, 0.0).ok());
  EXPECT_FALSE(ProjectL2Ball(inside, -1.0).ok());
}

TEST(ConstraintSetTest, BoxProjectionAndDistance) {
  const ConstraintSet box = *ConstraintSet::Box(-1.0, 1.0);
  EXPECT_EQ(box.Project(std::vector<double>{2, -3, 0.5}),
            (RealVector{1, -1, 0.5}));
  EXPECT_NEAR(box.Distance(std::vector<double>{2, 0}), 1.0, 1e-15);
  EXPECT_NEAR(box.MaxNorm(4), 2.0, 1e-15);
  EXPECT_FALSE(ConstraintSet::Box(1.0, -1.0).ok());
}

TEST(ConstraintSetTest, UnconstrainedIsIdentity) {
  const ConstraintSet c = ConstraintSet::Unconstrained();
  EXPECT_FALSE(c.bounded());
  EXPECT_EQ(c.Project(std::vector<double>{5, -7}), (RealVector{5, -7}));
  EXPECT_TRUE(std::isinf(c.MaxNorm(2)));
}

TEST(ConstraintSetTest, SimplexAndBallMaxNorm) {
  EXPECT_EQ(ConstraintSet::Simplex().MaxNorm(5), 1.0);
  EXPECT_EQ(ConstraintSet::L2Ball(2.5)->MaxNorm(5), 2.5);
}

}  // namespace
}  // namespace dropescape
