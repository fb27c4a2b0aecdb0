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

#include <algorithm>
#include <chrono>
#include <random>

#include "leakbound/casegen.hpp"
#include "leakbound/greedy.hpp"
#include "leakbound/optimize.hpp"
#include "oracles.hpp"

namespace leakbound {
namespace {

const double I = kInfinity;

TEST(InducedScheme, FullSetOnPaddingIsIdentity) {
  const auto ch = oracle::uniform_padding(4);
  const auto p = induced_scheme(ch, {0, 1, 2, 3});
  EXPECT_EQ(p, ProtectionScheme::identity(4));
  EXPECT_EQ(total_cost(ch, p), 0.0);
}

TEST(InducedScheme, UniformThreeExamples) {
  const auto ch = oracle::uniform_padding(3);
  const auto a = induced_scheme(ch, {2});
  EXPECT_EQ(a, ProtectionScheme::from_mapping({2, 2, 2}, 3));
  EXPECT_NEAR(total_cost(ch, a), 1.0, 1e-15);
  const auto b = induced_scheme(ch, {0, 2});
  EXPECT_EQ(b, ProtectionScheme::from_mapping({0, 2, 2}, 3));
  EXPECT_NEAR(total_cost(ch, b), 1.0 / 3.0, 1e-15);
}

TEST(InducedScheme, InfeasibleSubset) {
  const auto ch = oracle::uniform_padding(3);
  EXPECT_THROW(induced_scheme(ch, {0}), InfeasibleError);
  EXPECT_THROW(induced_scheme(ch, {}), InvalidArgument);
  EXPECT_THROW(induced_scheme(ch, {5}), InvalidArgument);
}

TEST(InducedScheme, TiesGoToLowestIndex) {
  Channel ch(Pmf({0.5, 0.5}), CostMatrix{{1, 1, 1}, {2, 2, 2}});
  EXPECT_EQ(induced_scheme(ch, {2, 1}), ProtectionScheme::from_mapping({1, 1}, 3));
}

TEST(InducedScheme, AlwaysValidAndDeterministic) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 100; ++t) {
    const auto ch = random_instance(5, 6, 100 + t);
    std::vector<std::size_t> s{5};
    for (std::size_t y = 0; y < 5; ++y) {
      if (rng() % 2) s.push_back(y);
    }
    const auto p = induced_scheme(ch, s);
    EXPECT_TRUE(is_deterministic(p));
    EXPECT_FALSE(validate_scheme(ch, p));
    EXPECT_LE(exp_leak(ch.px(), p), static_cast<double>(s.size()) + 1e-12);
  }
}

TEST(FindY0, Examples) {
  EXPECT_EQ(find_y0(oracle::uniform_padding(5)), 4u);
  Channel zero(Pmf({0.5, 0.5}), CostMatrix(Matrix<double>(2, 3, 0.0)));
  EXPECT_EQ(find_y0(zero), 0u);
  const auto ch = oracle::four_by_four();
  EXPECT_EQ(find_y0(ch), 3u);
  EXPECT_NEAR(-set_objective(ch, 3, {}), 2.8, 1e-12);
}

TEST(FindY0, NoFeasibleSingleton) {
  Channel ch(Pmf({0.5, 0.5}), CostMatrix{{0, I}, {I, 0}});
  EXPECT_THROW(find_y0(ch), InfeasibleError);
}

TEST(SetObjective, Examples) {
  const auto ch = oracle::uniform_padding(3);
  EXPECT_NEAR(set_objective(ch, 2, {}), -1.0, 1e-15);
  EXPECT_NEAR(set_objective(ch, 2, {0}), -1.0 / 3.0, 1e-15);
  EXPECT_NEAR(set_objective(ch, 2, {0, 1}), -min_achievable_cost(ch), 1e-15);
}

TEST(GreedyCurve, UniformThree) {
  const auto g = greedy_curve(oracle::uniform_padding(3), 3);
  ASSERT_EQ(g.points.size(), 3u);
  EXPECT_EQ(g.state.y0, 2u);
  EXPECT_EQ(g.state.selected, (std::vector<std::size_t>{0, 1}));
  EXPECT_NEAR(g.points[0].cost, 1.0, 1e-15);
  EXPECT_NEAR(g.points[1].cost, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(g.points[2].cost, 0.0, 1e-15);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(g.points[i].set_size, i + 1);
    EXPECT_NEAR(g.points[i].exp_leak, static_cast<double>(i + 1), 1e-12);
  }
}

TEST(GreedyCurve, StopsWhenNothingImproves) {
  Channel ch(Pmf({0.5, 0.5}), CostMatrix{{1, 0}, {1, 0}});
  const auto g = greedy_curve(ch, 2);
  ASSERT_EQ(g.points.size(), 1u);
  EXPECT_EQ(g.points[0].cost, 0.0);
  EXPECT_EQ(g.state.y0, 1u);
}

TEST(GreedyCurve, FourByFourMatchesCorners) {
  const auto ch = oracle::four_by_four();
  const auto g = greedy_curve(ch, 4);
  const auto corners = deterministic_corners(ch, 4);
  ASSERT_EQ(g.points.size(), corners.size());
  for (std::size_t i = 0; i < corners.size(); ++i) {
    EXPECT_NEAR(g.points[i].exp_leak, corners[i].L, 1e-12);
    EXPECT_NEAR(g.points[i].cost, corners[i].cost, 1e-9);
  }
}

TEST(GreedyCurve, TraceIsStrictlyImproving) {
  for (int s = 0; s < 100; ++s) {
    const auto ch = random_instance(6, 7, 400 + s);
    const auto g = greedy_curve(ch, 7);
    EXPECT_EQ(g.points.size(), g.state.trace.size() + 1);
    for (std::size_t i = 1; i < g.points.size(); ++i) {
      EXPECT_LT(g.points[i].cost, g.points[i - 1].cost);
      EXPECT_LE(g.points[i].exp_leak,
                static_cast<double>(g.points[i].set_size) + 1e-12);
    }
    for (std::size_t i = 1; i < g.state.trace.size(); ++i) {
      EXPECT_GT(g.state.trace[i].f_value, g.state.trace[i - 1].f_value);
    }
    EXPECT_EQ(std::count(g.state.selected.begin(), g.state.selected.end(),
                         g.state.y0),
              0);
  }
}

TEST(EnumerateOptimalSubsets, Examples) {
  const auto ch = oracle::uniform_padding(3);
  const auto two = enumerate_optimal_subsets(ch, 2);
  EXPECT_NEAR(two.cost, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(two.set, (std::vector<std::size_t>{0}));
  const auto one = enumerate_optimal_subsets(ch, 1);
  EXPECT_TRUE(one.set.empty());
  EXPECT_NEAR(one.cost, 1.0, 1e-15);
  const auto all = enumerate_optimal_subsets(ch, 3);
  EXPECT_NEAR(all.cost, 0.0, 1e-15);
}

TEST(EnumerateOptimalSubsets, MatchesMappingEnumeration) {
  for (int s = 0; s < 30; ++s) {
    const auto ch = random_instance(4, 4, 1200 + s);
    const auto pts = oracle::enumerate_deterministic(ch);
    for (std::size_t L = 1; L <= 4; ++L) {
      // Sets of size L containing y0 are a subfamily of all mappings with
      // exp-leak <= L, so the mapping oracle can only be cheaper.
      EXPECT_GE(enumerate_optimal_subsets(ch, L).cost,
                oracle::best_deterministic(pts, L) - 1e-12);
    }
  }
}

TEST(EnumerateOptimalSubsets, Guard) {
  Channel ch(Pmf({1.0}), CostMatrix(Matrix<double>(1, 21, 1.0)));
  EXPECT_THROW(enumerate_optimal_subsets(ch, 2), InvalidArgument);
}

TEST(GreedyBound, Values) {
  EXPECT_EQ(greedy_bound(2), 0.0);
  EXPECT_NEAR(greedy_bound(3), 0.25, 1e-15);
  EXPECT_NEAR(greedy_bound(1000), std::exp(-1.0), 1e-3);
  for (std::size_t L = 2; L < 200; ++L) EXPECT_LE(greedy_bound(L), std::exp(-1.0));
  EXPECT_THROW(greedy_bound(1), InvalidArgument);
}

TEST(GreedyBound, HoldsOnRandomInstances) {
  int reports = 0;
  for (int s = 0; s < 60; ++s) {
    const std::size_t N = 4 + s % 5;
    const auto ch = random_instance(N, N, 1700 + s);
    for (std::size_t L = 2; L <= N; ++L) {
      const auto opt = enumerate_optimal_subsets(ch, L);
      const auto r = greedy_bound_check(ch, L, opt.cost);
      EXPECT_TRUE(r.holds) << "seed " << s << " L " << L << " ratio "
                           << r.ratio << " bound " << r.bound;
      if (L == 2) {
        EXPECT_EQ(r.greedy_cost, opt.cost);
      }
      ++reports;
    }
  }
  EXPECT_GE(reports, 200);
}

TEST(Submodularity, RandomTuples) {
  std::mt19937_64 rng(555);
  int tuples = 0;
  for (int s = 0; tuples < 600; ++s) {
    const auto ch = random_instance(5, 7, 2500 + s);
    const std::size_t y0 = find_y0(ch);
    std::vector<std::size_t> others;
    for (std::size_t y = 0; y < 7; ++y) {
      if (y != y0) others.push_back(y);
    }
    for (int k = 0; k < 10; ++k) {
      std::shuffle(others.begin(), others.end(), rng);
      const std::size_t a_size = rng() % (others.size() - 1);
      std::vector<std::size_t> A(others.begin(), others.begin() + a_size);
      const std::size_t b = others[a_size], c = others[a_size + 1];
      auto with = [&](std::initializer_list<std::size_t> extra) {
        auto s2 = A;
        s2.insert(s2.end(), extra);
        return set_objective(ch, y0, s2);
      };
      EXPECT_GE(with({b}) + with({c}), with({b, c}) + with({}) - 1e-9);
      ++tuples;
    }
  }
}

// The full greedy curve at N = 100 should cost less than even one LP solve,
// let alone one per L.
TEST(GreedyCurve, FasterThanLpAtHundredOutputs) {
  const auto ch = random_instance(100, 100, 7);
  const auto t0 = std::chrono::steady_clock::now();
  const auto g = greedy_curve(ch, 100);
  const auto t1 = std::chrono::steady_clock::now();
  const auto lp = min_cost_for_leak(ch, 10.0);
  const auto t2 = std::chrono::steady_clock::now();
  EXPECT_LT(t1 - t0, t2 - t1);
  EXPECT_GE(greedy_cost_at(g, 10), lp.cost - 1e-9);
}

}  // namespace
}  // namespace leakbound
