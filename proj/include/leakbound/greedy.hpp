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

// Greedy construction of deterministic schemes by growing the set of
// allowed output columns. With y0 the cheapest single column, the set
// function f(A) = -cost(A + y0) is submodular, so greedy selection is
// within ((L-2)/(L-1))^(L-1) of the best set of size L, normalized by the
// cost of y0 alone.

#ifndef LEAKBOUND_GREEDY_HPP_
#define LEAKBOUND_GREEDY_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <vector>

#include "leakbound/core.hpp"
#include "leakbound/metrics.hpp"

namespace leakbound {

inline constexpr double kGreedyImprovementTol = 1e-12;
inline constexpr std::size_t kEnumerationMaxColumns = 20;

namespace detail {

// Row-to-column map induced by `columns` (lowest index among cheapest).
inline std::vector<std::size_t> induced_mapping(
    const Channel& channel, const std::vector<std::size_t>& columns) {
  const auto& cost = channel.cost();
  std::vector<std::size_t> sorted = columns;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> target(channel.num_inputs());
  for (std::size_t x = 0; x < target.size(); ++x) {
    std::size_t best = cost.cols();
    for (std::size_t y : sorted) {
      if (!cost.is_finite(x, y)) continue;
      if (best == cost.cols() || cost(x, y) < cost(x, best)) best = y;
    }
    if (best == cost.cols() && channel.px()[x] == 0.0) {
      best = cheapest_column(cost, x);  // unused row, any finite column
    }
    if (best == cost.cols()) {
      std::ostringstream os;
      os << "row " << x << " has no finite-cost column in the subset";
      throw InfeasibleError(os.str());
    }
    target[x] = best;
  }
  return target;
}

inline double subset_cost(const Channel& channel,
                          const std::vector<std::size_t>& columns) {
  const auto& cost = channel.cost();
  double total = 0.0;
  for (std::size_t x = 0; x < channel.num_inputs(); ++x) {
    const double p = channel.px()[x];
    double best = kInfinity;
    for (std::size_t y : columns) best = std::min(best, cost(x, y));
    if (p == 0.0) continue;
    if (!std::isfinite(best)) {
      std::ostringstream os;
      os << "row " << x << " has no finite-cost column in the subset";
      throw InfeasibleError(os.str());
    }
    total += p * best;
  }
  return total;
}

}  // namespace detail

// Deterministic scheme sending each row to its cheapest column within S.
inline ProtectionScheme induced_scheme(const Channel& channel,
                                       const std::vector<std::size_t>& S) {
  if (S.empty()) throw InvalidArgument("column subset is empty");
  for (std::size_t y : S) {
    if (y >= channel.num_outputs()) throw InvalidArgument("column out of range");
  }
  return ProtectionScheme::from_mapping(detail::induced_mapping(channel, S),
                                        channel.num_outputs());
}

// Lowest-index column minimizing the single-column cost.
inline std::size_t find_y0(const Channel& channel) {
  std::optional<std::size_t> best;
  double best_cost = kInfinity;
  for (std::size_t y = 0; y < channel.num_outputs(); ++y) {
    double c = 0.0;
    bool feasible = true;
    for (std::size_t x = 0; x < channel.num_inputs() && feasible; ++x) {
      const double p = channel.px()[x];
      if (p == 0.0) continue;
      if (!channel.cost().is_finite(x, y)) {
        feasible = false;
      } else {
        c += p * channel.cost()(x, y);
      }
    }
    if (feasible && (!best || c < best_cost)) {
      best = y;
      best_cost = c;
    }
  }
  if (!best) {
    throw InfeasibleError(
        "no single column has finite cost for every row; zero leakage is "
        "not achievable");
  }
  return *best;
}

// f(A) = -cost(A + y0).
inline double set_objective(const Channel& channel, std::size_t y0,
                            const std::vector<std::size_t>& A) {
  std::vector<std::size_t> s = A;
  s.push_back(y0);
  return -detail::subset_cost(channel, s);
}

struct GreedyStep {
  std::size_t column = 0;
  double f_value = 0.0;
  double cost = 0.0;
};

struct GreedyState {
  std::size_t y0 = 0;
  std::vector<std::size_t> selected;  // in order of addition, excludes y0
  std::vector<GreedyStep> trace;
};

struct GreedyPoint {
  double exp_leak = 1.0;        // actual exp-leak of the induced scheme
  std::size_t set_size = 1;     // |A + y0|
  double cost = 0.0;
  ProtectionScheme scheme;
};

struct GreedyCurve {
  GreedyState state;
  std::vector<GreedyPoint> points;
};

// Adds columns one at a time while |A + y0| < L_max and some column
// strictly lowers the cost. The first point is y0 alone.
inline GreedyCurve greedy_curve(const Channel& channel, std::size_t L_max) {
  if (L_max < 1) throw InvalidArgument("L_max must be at least 1");
  const auto& px = channel.px();
  const auto& cost = channel.cost();
  const std::size_t m = channel.num_inputs(), n = channel.num_outputs();

  GreedyCurve out;
  out.state.y0 = find_y0(channel);
  std::vector<std::size_t> set{out.state.y0};
  std::vector<bool> in_set(n, false);
  in_set[out.state.y0] = true;

  // Current per-row cost under the set.
  std::vector<double> row_cost(m);
  for (std::size_t x = 0; x < m; ++x) row_cost[x] = cost(x, out.state.y0);
  auto current_cost = [&] {
    double t = 0.0;
    for (std::size_t x = 0; x < m; ++x) {
      if (px[x] > 0.0) t += px[x] * row_cost[x];
    }
    return t;
  };
  auto record = [&](double c) {
    GreedyPoint pt;
    pt.scheme = induced_scheme(channel, set);
    pt.exp_leak = exp_leak(px, pt.scheme);
    pt.set_size = set.size();
    pt.cost = c;
    out.points.push_back(std::move(pt));
  };

  double cur = current_cost();
  record(cur);
  while (set.size() < std::min(L_max, n)) {
    std::size_t best = n;
    double best_cost = cur;
    for (std::size_t y = 0; y < n; ++y) {
      if (in_set[y]) continue;
      double c = 0.0;
      for (std::size_t x = 0; x < m; ++x) {
        if (px[x] > 0.0) c += px[x] * std::min(row_cost[x], cost(x, y));
      }
      if (c < best_cost - kGreedyImprovementTol) {
        best = y;
        best_cost = c;
      }
    }
    if (best == n) break;
    in_set[best] = true;
    set.push_back(best);
    out.state.selected.push_back(best);
    for (std::size_t x = 0; x < m; ++x) {
      row_cost[x] = std::min(row_cost[x], cost(x, best));
    }
    cur = current_cost();
    out.state.trace.push_back({best, -cur, cur});
    record(cur);
  }
  return out;
}

// Cost of the greedy set after growing to at most L columns.
inline double greedy_cost_at(const GreedyCurve& curve, std::size_t L) {
  double c = curve.points.front().cost;
  for (const auto& p : curve.points) {
    if (p.set_size <= L) c = p.cost;
  }
  return c;
}

struct SubsetOptimum {
  double cost = 0.0;
  std::vector<std::size_t> set;  // A*, excluding y0
};

// Exhaustive best A with |A + y0| <= L. Test oracle.
inline SubsetOptimum enumerate_optimal_subsets(const Channel& channel,
                                               std::size_t L) {
  const std::size_t n = channel.num_outputs();
  if (n > kEnumerationMaxColumns) {
    std::ostringstream os;
    os << "subset enumeration is limited to " << kEnumerationMaxColumns
       << " columns (got " << n << "); use the LP route instead";
    throw InvalidArgument(os.str());
  }
  if (L < 1) throw InvalidArgument("L must be at least 1");
  const std::size_t y0 = find_y0(channel);
  std::vector<std::size_t> others;
  for (std::size_t y = 0; y < n; ++y) {
    if (y != y0) others.push_back(y);
  }
  const std::size_t k_max = std::min(L - 1, others.size());

  SubsetOptimum best{-set_objective(channel, y0, {}), {}};
  // Subsets in order of size, then lexicographically by index mask.
  for (std::size_t k = 1; k <= k_max; ++k) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    for (;;) {
      std::vector<std::size_t> A(k);
      for (std::size_t i = 0; i < k; ++i) A[i] = others[idx[i]];
      std::vector<std::size_t> s = A;
      s.push_back(y0);
      double c = kInfinity;
      try {
        c = detail::subset_cost(channel, s);
      } catch (const InfeasibleError&) {
      }
      if (c < best.cost - kGreedyImprovementTol) best = {c, A};
      std::size_t i = k;
      while (i > 0 && idx[i - 1] == others.size() - k + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return best;
}

inline double greedy_bound(std::size_t L) {
  if (L < 2) throw InvalidArgument("bound is defined for L >= 2");
  const double l = static_cast<double>(L);
  return std::pow((l - 2.0) / (l - 1.0), l - 1.0);
}

struct BoundReport {
  std::size_t L = 2;
  double greedy_cost = 0.0;
  double optimal_cost = 0.0;
  double y0_cost = 0.0;
  double ratio = 0.0;
  double bound = 0.0;
  bool holds = true;
};

// ratio = (greedy - optimal) / (cost(y0) - optimal), 0/0 read as 0.
inline BoundReport greedy_bound_check(const Channel& channel, std::size_t L,
                                      double optimal_cost) {
  BoundReport r;
  r.L = L;
  r.bound = greedy_bound(L);
  const auto curve = greedy_curve(channel, L);
  r.greedy_cost = greedy_cost_at(curve, L);
  r.optimal_cost = optimal_cost;
  r.y0_cost = curve.points.front().cost;
  const double num = r.greedy_cost - optimal_cost;
  const double den = r.y0_cost - optimal_cost;
  if (std::abs(num) <= 1e-12) {
    r.ratio = 0.0;
  } else if (den <= 1e-12) {
    r.ratio = kInfinity;
  } else {
    r.ratio = num / den;
  }
  r.holds = r.ratio <= r.bound + 1e-9;
  return r;
}

}  // namespace leakbound

#endif  // LEAKBOUND_GREEDY_HPP_
