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

// Walks a 4x4 padding channel through the main entry points.

#include <cstdio>

#include "leakbound/leakbound.hpp"

namespace {

void print_scheme(const leakbound::ProtectionScheme& s) {
  for (std::size_t x = 0; x < s.rows(); ++x) {
    std::printf("   ");
    for (std::size_t y = 0; y < s.cols(); ++y) std::printf(" %.4f", s(x, y));
    std::printf("\n");
  }
}

}  // namespace

int main() {
  using namespace leakbound;
  const double inf = kInfinity;
  const Channel ch(Pmf({0.4, 0.2, 0.2, 0.2}),
                   CostMatrix{{1, 2, 3, 4},
                              {inf, 1, 2, 3},
                              {inf, inf, 1, 2},
                              {inf, inf, inf, 1}});

  std::printf("minimum cost (identity): %.4f\n", min_achievable_cost(ch));

  const auto curve = build_curve(ch);
  std::printf("deterministic corners:\n");
  for (const auto& c : curve.deterministic_corners) {
    std::printf("  L=%d cost=%.4f\n", c.L, c.cost);
  }

  // Half a unit over the minimum.
  const auto best = min_leak_for_cost(ch, 1.5);
  std::printf("budget 1.5 -> exp-leak %.4f (%.4f bits)\n",
              best.exp_leak_bound, maximal_leakage_bits(ch.px(), best.scheme));
  print_scheme(best.scheme);

  const auto mix = curve.query(best.exp_leak_bound);
  std::printf("as a mixture: lambda=%.4f of (L=%g, C=%.2f) and (L=%g, C=%.2f)\n",
              mix.lambda, mix.L1, mix.C1, mix.L2, mix.C2);

  const auto det = determinize(ch, best.scheme, 0.4);
  std::printf("determinized at alpha=0.4:\n");
  print_scheme(det);

  const auto mi = mi_optimal_scheme(ch, 1.5);
  std::printf("MI-optimal at the same budget: %.4f bits\n", mi.mi_bits);
  print_scheme(mi.scheme);

  const auto g = greedy_curve(ch, ch.num_outputs());
  std::printf("greedy trace:\n");
  for (const auto& p : g.points) {
    std::printf("  |S|=%zu exp-leak=%.0f cost=%.4f\n", p.set_size, p.exp_leak,
                p.cost);
  }
  return 0;
}
