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

#include "dropescape/privacy.h"

#include <cmath>

#include "gtest/gtest.h"

namespace dropescape {
namespace {

TEST(PrivacyBudgetTest, Validates) {
  EXPECT_TRUE(PrivacyBudget::Create(1.0, 0.5).ok());
  EXPECT_FALSE(PrivacyBudget::Create(0.0, 0.5).ok());
  EXPECT_FALSE(PrivacyBudget::Create(1.0, 0.0).ok());
  EXPECT_FALSE(PrivacyBudget::Create(1.0, 1.0).ok());
  EXPECT_NEAR(PrivacyBudget::Create(1.0, 0.01)->LogInverseDelta(),
              std::log(100.0), 1e-15);
}

TEST(GaussianMechanismTest, SigmaExample) {
  const PrivacyBudget b = *PrivacyBudget::Create(1.0, 0.01);
  const double sigma = *GaussianMechanismSigma(0.1, b);
  EXPECT_NEAR(sigma * sigma, 0.04 * std::log(100.0), 1e-15);
  EXPECT_NEAR(sigma * sigma, 0.18421, 5e-6);
  // 0.42920 is quoted to four significant figures.
  EXPECT_NEAR(sigma, 0.42920, 1e-5);
}

TEST(GaussianMechanismTest, RejectsZeroSensitivity) {
  const PrivacyBudget b = *PrivacyBudget::Create(1.0, 0.01);
  SeededRng rng(1);
  EXPECT_FALSE(GaussianMechanismSigma(0.0, b).ok());
  EXPECT_FALSE(GaussianPerturb(RealVector{1.0}, 0.0, b, rng).ok());
}

TEST(GaussianMechanismTest, EmpiricalVariance) {
  const PrivacyBudget b = *PrivacyBudget::Create(1.0, 0.01);
  SeededRng rng(2);
  const RealVector zero(1'000'000, 0.0);
  const RealVector noisy = *GaussianPerturb(zero, 0.1, b, rng);
  double mean = 0.0, sq = 0.0;
  for (double v : noisy) mean += v / noisy.size();
  for (double v : noisy) sq += (v - mean) * (v - mean);
  const double var = sq / (noisy.size() - 1);
  const double expected = 4 * 0.01 * std::log(100.0);
  EXPECT_NEAR(var, expected, 0.02 * expected);
}

TEST(PtrGateTest, PinnedNoiseExample) {
  const PrivacyBudget b = *PrivacyBudget::Create(1.0, 0.001);
  const PtrOutcome o = *PtrGateWithNoise(1.0, 0.01, 0.5, b, 0.0);
  EXPECT_NEAR(o.threshold, 0.5 + 0.01 * std::log(1000.0), 1e-15);
  EXPECT_NEAR(o.threshold, 0.5691, 5e-5);
  EXPECT_EQ(o.noisy_value, 1.0);
  EXPECT_TRUE(o.pass);
  EXPECT_FALSE(PtrGateWithNoise(0.5, 0.01, 0.5, b, 0.0)->pass);
}

TEST(PtrGateTest, RejectsBadSensitivity) {
  const PrivacyBudget b = *PrivacyBudget::Create(1.0, 0.001);
  SeededRng rng(3);
  EXPECT_FALSE(PtrGate(1.0, 0.0, 0.5, b, rng).ok());
}

// Laplace tails: P(Lap(s) < -s ln(1/delta)) = delta / 2.
TEST(PtrGateTest, TailRates) {
  const double eta = 0.01, zeta = 0.5, delta = 0.01;
  const PrivacyBudget b = *PrivacyBudget::Create(1.0, delta);
  const double margin = 2 * eta * std::log(1 / delta);
  const int trials = 100000;
  const double bound = delta + 3 * std::sqrt(delta * (1 - delta) / trials);
  SeededRng rng(4);
  int wrongful_fail = 0, wrongful_pass = 0;
  for (int t = 0; t < trials; ++t) {
    if (!PtrGate(zeta + margin, eta, zeta, b, rng)->pass) ++wrongful_fail;
    if (PtrGate(zeta - margin, eta, zeta, b, rng)->pass) ++wrongful_pass;
  }
  EXPECT_LE(wrongful_fail / double(trials), bound);
  EXPECT_LE(wrongful_pass / double(trials), bound);
}

}  // namespace
}  // namespace dropescape
