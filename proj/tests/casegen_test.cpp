// Copyright 2026 The leakbound Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>

#include "leakbound/casegen.hpp"
#include "leakbound/metrics.hpp"

namespace leakbound {
namespace {

TEST(Bsc, Examples) {
  EXPECT_EQ(bsc(0.0).scheme, ProtectionScheme::identity(2));
  EXPECT_EQ(bsc(0.5).scheme, (ProtectionScheme{{0.5, 0.5}, {0.5, 0.5}}));
  const auto c = bsc(0.25);
  EXPECT_EQ(c.scheme, (ProtectionScheme{{0.75, 0.25}, {0.25, 0.75}}));
  EXPECT_NEAR(exp_leak(c.px, c.scheme), 1.5, 1e-15);
  EXPECT_EQ(c.px.probs(), (std::vector<double>{0.5, 0.5}));
  EXPECT_THROW(bsc(0.6), InvalidArgument);
  EXPECT_THROW(bsc(-0.1), InvalidArgument);
}

TEST(BinomialPmf, ExactAndLogPaths) {
  const auto a = binomial_pmf(4, 0.5);
  EXPECT_EQ(a, (std::vector<double>{1 / 16.0, 4 / 16.0, 6 / 16.0, 4 / 16.0,
                                    1 / 16.0}));
  const auto b = binomial_pmf(3, 0.2);
  EXPECT_NEAR(b[0], 0.512, 1e-15);
  EXPECT_NEAR(b[1], 0.384, 1e-15);
  EXPECT_NEAR(b[3], 0.008, 1e-15);
  const auto big = binomial_pmf(1024, 0.5);
  double s = 0.0;
  for (double v : big) s += v;
  EXPECT_NEAR(s, 1.0, 1e-12);
  EXPECT_NEAR(big[512], 0.024927805892979545, 1e-12);
}

TEST(SquareMultiply, NoNoiseIsIdentity) {
  const auto c = square_multiply_channel(16, {0, 0.5, 1.0});
  EXPECT_EQ(c.scheme, ProtectionScheme::identity(17));
  EXPECT_NEAR(exp_leak(c.channel.px(), c.scheme), 17.0, 1e-12);
  EXPECT_NEAR(maximal_leakage_bits(c.channel.px(), c.scheme), std::log2(17.0),
              1e-12);
}

TEST(SquareMultiply, TwoUnitsOfNoise) {
  const auto c = square_multiply_channel(16, {2, 0.5, 1.0});
  EXPECT_EQ(c.scheme.cols(), 19u);
  EXPECT_NEAR(exp_leak(c.channel.px(), c.scheme), 9.0, 1e-12);
  EXPECT_NEAR(total_cost(c.channel, c.scheme), 1.0, 1e-12);
  EXPECT_FALSE(validate_scheme(c.channel, c.scheme));
}

TEST(SquareMultiply, CostIsHalfTheNoiseSize) {
  double prev = kInfinity;
  for (long m = 0; m <= 8; ++m) {
    const auto c = square_multiply_channel(16, {m, 0.5, 1.0});
    EXPECT_NEAR(total_cost(c.channel, c.scheme), m / 2.0, 1e-12);
    const double l = exp_leak(c.channel.px(), c.scheme);
    EXPECT_LE(l, prev + 1e-12);
    prev = l;
  }
  const auto k = square_multiply_channel(16, {4, 0.5, 2.5});
  EXPECT_NEAR(total_cost(k.channel, k.scheme), 2.5 * 2.0, 1e-12);
}

TEST(SquareMultiply, DeskScaleSixtyFourBits) {
  const auto c = square_multiply_channel(64, {6, 0.5, 1.0});
  EXPECT_NEAR(total_cost(c.channel, c.scheme), 3.0, 1e-12);
  EXPECT_TRUE(is_staircase_nondecreasing(c.channel.cost()));
}

TEST(SquareMultiply, Validation) {
  EXPECT_THROW(square_multiply_channel(0, {1, 0.5, 1.0}), InvalidArgument);
  EXPECT_THROW(square_multiply_channel(4, {-1, 0.5, 1.0}), InvalidArgument);
  EXPECT_THROW(square_multiply_channel(4, {1, 0.5, 0.0}), InvalidArgument);
}

TEST(Extension, SixLabelsWidthFour) {
  const auto e = extension_scheme({1, 5, 7, 9, 11, 13}, {4});
  EXPECT_EQ(e.y_labels,
            (std::vector<double>{1, 5, 7, 9, 11, 13, 15, 17, 19, 21}));
  for (std::size_t x = 0; x < 6; ++x) {
    double s = 0.0;
    for (std::size_t y = 0; y < e.y_labels.size(); ++y) {
      s += e.scheme(x, y);
      if (y < x) {
        EXPECT_EQ(e.scheme(x, y), 0.0);
      }
    }
    EXPECT_NEAR(s, 1.0, 1e-15);
    EXPECT_NEAR(e.scheme(x, x + 2), 6.0 / 16.0, 1e-15);
  }
  EXPECT_TRUE(is_staircase_nondecreasing(e.cost));
}

TEST(Extension, ZeroWidthIsIdentity) {
  const auto e = extension_scheme({2, 3, 10}, {0});
  EXPECT_EQ(e.y_labels, (std::vector<double>{2, 3, 10}));
  EXPECT_EQ(e.scheme, ProtectionScheme::identity(3));
}

TEST(Extension, TwoLabelsWidthOne) {
  const auto e = extension_scheme({0, 2}, {1});
  EXPECT_EQ(e.y_labels, (std::vector<double>{0, 2, 4}));
  EXPECT_EQ(e.scheme, (ProtectionScheme{{0.5, 0.5, 0}, {0, 0.5, 0.5}}));
  EXPECT_EQ(e.cost(1, 2), 2.0);
  EXPECT_FALSE(e.cost.is_finite(1, 0));
}

TEST(Extension, GapTieGoesToSmallest) {
  EXPECT_EQ(most_common_gap({0, 3, 6, 8, 10}), 2.0);
  EXPECT_EQ(most_common_gap({0, 3, 6, 7}), 3.0);
  const auto e = extension_scheme({0, 3, 6, 8, 10}, {1});
  EXPECT_EQ(e.y_labels.back(), 12.0);
}

TEST(Extension, Preconditions) {
  EXPECT_THROW(extension_scheme({5}, {1}), InvalidArgument);
  EXPECT_THROW(extension_scheme({5, 3}, {1}), InvalidArgument);
  EXPECT_THROW(extension_scheme({1, 2}, {-1}), InvalidArgument);
  EXPECT_NO_THROW(extension_scheme({5}, {0}));
}

TEST(RandomInstance, DeterministicPerSeed) {
  const auto a = random_instance(4, 4, 9);
  const auto b = random_instance(4, 4, 9);
  EXPECT_EQ(a.px().probs(), b.px().probs());
  EXPECT_EQ(a.cost().entries(), b.cost().entries());
  const auto c = random_instance(4, 4, 10);
  EXPECT_NE(a.px().probs(), c.px().probs());
}

TEST(RandomInstance, StaircaseWithFeasibleLastColumn) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto ch = random_instance(4, 4, s);
    EXPECT_TRUE(is_staircase_nondecreasing(ch.cost()));
    for (std::size_t x = 0; x < 4; ++x) {
      EXPECT_TRUE(ch.cost().is_finite(x, 3));
      EXPECT_GT(ch.px()[x], 0.0);
    }
  }
}

}  // namespace
}  // namespace leakbound
