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

// Cost/leakage optimization over protection schemes.
//
// The program has one variable p_xy per finite cell of a support row and
// one q_y per column:
//
//   minimize  sum p(x) c(x,y) p_xy
//   s.t.      sum_y q_y <= L,  sum_y p_xy = 1,  0 <= p_xy <= q_y
//
// and the inverse form swaps the objective with a cost budget. Cells are
// priced in lazily: the restricted program starts from a few cells per row
// and grows by the cells whose reduced cost is negative under the current
// duals, so instances with a few hundred symbols stay small.

#ifndef LEAKBOUND_OPTIMIZE_HPP_
#define LEAKBOUND_OPTIMIZE_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include "leakbound/core.hpp"
#include "leakbound/determinize.hpp"
#include "leakbound/greedy.hpp"
#include "leakbound/metrics.hpp"
#include "leakbound/simplex.hpp"

namespace leakbound {

struct TradeoffPoint {
  double exp_leak_bound = 1.0;  // L
  double cost = 0.0;            // C
  ProtectionScheme scheme;
};

struct Corner {
  int L = 1;
  double cost = 0.0;
  ProtectionScheme scheme;  // deterministic
};

// lambda * p1 + (1 - lambda) * p2 of two deterministic schemes.
struct Mixture {
  double lambda = 1.0;
  ProtectionScheme p1;
  ProtectionScheme p2;
  double L1 = 1.0, L2 = 1.0;
  double C1 = 0.0, C2 = 0.0;

  ProtectionScheme blend() const {
    return ProtectionScheme::blend(lambda, p1, p2);
  }
  double cost() const { return lambda * C1 + (1.0 - lambda) * C2; }
  double mixed_exp_leak() const { return lambda * L1 + (1.0 - lambda) * L2; }
};

struct TradeoffCurve {
  std::vector<Corner> deterministic_corners;
  std::vector<TradeoffPoint> hull;  // increasing L, convex nonincreasing C

  // Mixture of the two hull points around L, weights chosen so that
  // lambda * L1 + (1 - lambda) * L2 = L. On a hull point the mixture is
  // that pure scheme; past the last point the last scheme is returned.
  Mixture query(double L) const {
    if (hull.empty()) throw InvalidArgument("empty trade-off curve");
    if (!(L >= hull.front().exp_leak_bound - 1e-12)) {
      throw InvalidArgument("exp-leak bound below the smallest corner");
    }
    auto pure = [](const TradeoffPoint& p) {
      return Mixture{1.0, p.scheme, p.scheme, p.exp_leak_bound,
                     p.exp_leak_bound, p.cost, p.cost};
    };
    for (std::size_t i = 0; i < hull.size(); ++i) {
      if (std::abs(hull[i].exp_leak_bound - L) <= 1e-12) return pure(hull[i]);
    }
    if (L >= hull.back().exp_leak_bound) return pure(hull.back());
    std::size_t j = 1;
    while (hull[j].exp_leak_bound < L) ++j;
    const auto& a = hull[j - 1];
    const auto& b = hull[j];
    const double lambda =
        (b.exp_leak_bound - L) / (b.exp_leak_bound - a.exp_leak_bound);
    return Mixture{lambda,           a.scheme, b.scheme, a.exp_leak_bound,
                   b.exp_leak_bound, a.cost,   b.cost};
  }

  double cost_at(double L) const { return query(L).cost(); }

  // Smallest L on the hull whose cost is within `budget`.
  double leak_for_cost(double budget) const {
    if (hull.empty()) throw InvalidArgument("empty trade-off curve");
    const double floor_cost = hull.back().cost;
    if (std::isnan(budget) ||
        budget < floor_cost - 1e-12 * std::max(1.0, floor_cost)) {
      throw InfeasibleError("budget is below the minimum achievable cost",
                            floor_cost);
    }
    if (budget >= hull.front().cost) return hull.front().exp_leak_bound;
    std::size_t j = 1;
    while (hull[j].cost > budget) ++j;
    const auto& a = hull[j - 1];
    const auto& b = hull[j];
    return a.exp_leak_bound + (a.cost - budget) / (a.cost - b.cost) *
                                  (b.exp_leak_bound - a.exp_leak_bound);
  }
};

// How deterministic corners are found. kLpDeterminize solves the LP at each
// integer L and determinizes the optimum; kDynamicProgram searches the
// output sets directly, which staircase costs make a one-dimensional problem.
enum class CornerMethod { kDynamicProgram, kLpDeterminize };

struct OptimizeOptions {
  lp::SolverOptions solver;
  bool column_generation = true;
  unsigned threads = 0;  // 0: hardware concurrency
  CornerMethod corners = CornerMethod::kDynamicProgram;
};

namespace detail {

enum class Eq7Mode { kMinCost, kMinLeak };

// Full cell set and bookkeeping for one channel.
class Eq7Builder {
 public:
  explicit Eq7Builder(const Channel& channel) : channel_(channel) {
    const auto& px = channel.px();
    const auto& cost = channel.cost();
    m_ = channel.num_inputs();
    n_ = channel.num_outputs();
    cell_index_.assign(m_ * n_, kNoCell);
    for (std::size_t x = 0; x < m_; ++x) {
      if (px[x] == 0.0) continue;
      support_.push_back(x);
      for (std::size_t y = 0; y < n_; ++y) {
        if (!cost.is_finite(x, y)) continue;
        cell_index_[x * n_ + y] = cells_.size();
        cells_.push_back({x, y, px[x] * cost(x, y)});
      }
    }
    row_of_.assign(m_, kNoCell);
    for (std::size_t i = 0; i < support_.size(); ++i) row_of_[support_[i]] = i;
  }

  struct Cell {
    std::size_t x, y;
    double weight;  // p(x) c(x,y)
  };

  struct Result {
    ProtectionScheme scheme;
    double objective = 0.0;
    int rounds = 0;
    std::size_t cells_used = 0;
  };

  std::size_t num_cells() const { return cells_.size(); }

  std::size_t cell(std::size_t x, std::size_t y) const {
    return cell_index_[x * n_ + y];
  }

  // Starting cell set: cheapest cell per row, the best single column, and
  // the cells of the given deterministic schemes.
  std::vector<bool> seed(const std::vector<ProtectionScheme>& hints) const {
    std::vector<bool> active(cells_.size(), false);
    const auto& cost = channel_.cost();
    for (std::size_t x : support_) {
      active[cell(x, cheapest_column(cost, x))] = true;
    }
    try {
      const std::size_t y0 = find_y0(channel_);
      for (std::size_t x : support_) active[cell(x, y0)] = true;
    } catch (const InfeasibleError&) {
    }
    for (const auto& h : hints) {
      for (std::size_t x : support_) {
        for (std::size_t y = 0; y < n_; ++y) {
          if (h(x, y) > 0.0 && cell(x, y) != kNoCell) active[cell(x, y)] = true;
        }
      }
    }
    return active;
  }

  Result solve(Eq7Mode mode, double bound, std::vector<bool> active,
               const OptimizeOptions& opt) const {
    if (!opt.column_generation) active.assign(cells_.size(), true);
    double scale = 1.0;
    for (const auto& c : cells_) scale = std::max(scale, c.weight);
    const double price_tol = 1e-9 * scale;

    Result res;
    for (;;) {
      ++res.rounds;
      std::vector<std::size_t> ids;
      for (std::size_t k = 0; k < cells_.size(); ++k) {
        if (active[k]) ids.push_back(k);
      }
      const auto lp = build(mode, bound, ids);
      const auto sol = lp::solve(lp, opt.solver);
      if (sol.status == lp::Status::kInfeasible) {
        if (ids.size() < cells_.size()) {
          active.assign(cells_.size(), true);
          continue;
        }
        throw InfeasibleError("no scheme satisfies the bound");
      }
      if (sol.status != lp::Status::kOptimal) {
        throw NumericalError("optimization LP is unbounded");
      }

      // Price every absent cell; a column gains cells when its most
      // favourable combination of new rows beats the reduced cost of q_y.
      const double beta = sol.duals[0];
      std::vector<double> neg_sum(n_, 0.0);
      std::vector<std::pair<double, std::size_t>> candidates;
      for (std::size_t k = 0; k < cells_.size(); ++k) {
        if (active[k]) continue;
        const auto& c = cells_[k];
        const double mu = sol.duals[1 + row_of_[c.x]];
        const double rc = mode == Eq7Mode::kMinCost
                              ? c.weight - mu
                              : -mu - beta * c.weight;
        if (rc < -1e-12 * scale) {
          neg_sum[c.y] += rc;
          candidates.push_back({rc, k});
        }
      }
      // Only the most negative cell of each violating column enters.
      std::vector<std::size_t> pick(n_, kNoCell);
      std::vector<double> pick_rc(n_, 0.0);
      for (const auto& [rc, k] : candidates) {
        const std::size_t y = cells_[k].y;
        if (neg_sum[y] + sol.reduced_costs[y] >= -price_tol) continue;
        if (rc < pick_rc[y]) {
          pick[y] = k;
          pick_rc[y] = rc;
        }
      }
      bool added = false;
      for (std::size_t k : pick) {
        if (k == kNoCell) continue;
        active[k] = true;
        added = true;
      }
      if (!added) {
        res.scheme = to_scheme(sol.values, ids);
        res.objective = sol.objective_value;
        res.cells_used = ids.size();
        return res;
      }
    }
  }

 private:
  static constexpr std::size_t kNoCell = static_cast<std::size_t>(-1);

  lp::LinearProgram build(Eq7Mode mode, double bound,
                          const std::vector<std::size_t>& ids) const {
    const std::size_t v = n_ + ids.size();
    lp::LinearProgram lp;
    lp.objective.assign(v, 0.0);
    if (mode == Eq7Mode::kMinCost) {
      for (std::size_t k = 0; k < ids.size(); ++k) {
        lp.objective[n_ + k] = cells_[ids[k]].weight;
      }
      std::vector<double> row(v, 0.0);
      std::fill(row.begin(), row.begin() + n_, 1.0);
      lp.add(std::move(row), lp::Relation::kLessEqual, bound);
    } else {
      std::fill(lp.objective.begin(), lp.objective.begin() + n_, 1.0);
      std::vector<double> row(v, 0.0);
      for (std::size_t k = 0; k < ids.size(); ++k) {
        row[n_ + k] = cells_[ids[k]].weight;
      }
      lp.add(std::move(row), lp::Relation::kLessEqual, bound);
    }
    std::vector<std::vector<double>> sums(support_.size(),
                                          std::vector<double>(v, 0.0));
    for (std::size_t k = 0; k < ids.size(); ++k) {
      sums[row_of_[cells_[ids[k]].x]][n_ + k] = 1.0;
    }
    for (auto& r : sums) lp.add(std::move(r), lp::Relation::kEqual, 1.0);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      std::vector<double> r(v, 0.0);
      r[n_ + k] = 1.0;
      r[cells_[ids[k]].y] = -1.0;
      lp.add(std::move(r), lp::Relation::kLessEqual, 0.0);
    }
    return lp;
  }

  ProtectionScheme to_scheme(const std::vector<double>& values,
                             const std::vector<std::size_t>& ids) const {
    auto p = ProtectionScheme::zeros(m_, n_);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      double v = values[n_ + k];
      if (v < 1e-12) v = 0.0;
      p(cells_[ids[k]].x, cells_[ids[k]].y) = std::min(v, 1.0);
    }
    for (std::size_t x = 0; x < m_; ++x) {
      if (row_of_[x] == kNoCell) {
        p(x, cheapest_column(channel_.cost(), x)) = 1.0;
        continue;
      }
      double sum = 0.0;
      for (std::size_t y = 0; y < n_; ++y) sum += p(x, y);
      for (std::size_t y = 0; y < n_; ++y) p(x, y) /= sum;
    }
    return p;
  }

  const Channel& channel_;
  std::size_t m_ = 0, n_ = 0;
  std::vector<std::size_t> support_;
  std::vector<std::size_t> row_of_;
  std::vector<Cell> cells_;
  std::vector<std::size_t> cell_index_;
};

struct SetOptimum {
  double cost = kInfinity;
  std::vector<std::size_t> mapping;
};

// Cheapest deterministic scheme using at most k outputs, for k = 1..k_max.
// Under a staircase cost each input goes to the first chosen output at or
// after its first finite one, so the inputs served by a chosen output form
// a run. D[k][s]: best cost of k chosen outputs, the largest being s, that
// serve every input whose first finite output is <= s.
inline std::vector<SetOptimum> staircase_optima(const Channel& channel,
                                                int k_max) {
  const auto& px = channel.px();
  const auto& cost = channel.cost();
  const std::size_t m = channel.num_inputs(), n = channel.num_outputs();
  std::vector<std::size_t> rows, first;
  for (std::size_t x = 0; x < m; ++x) {
    if (px[x] == 0.0) continue;
    rows.push_back(x);
    first.push_back(cheapest_column(cost, x));
  }
  // served[s]: number of support rows whose first finite output is <= s.
  std::vector<std::size_t> served(n, 0);
  for (std::size_t s = 0, i = 0; s < n; ++s) {
    while (i < rows.size() && first[i] <= s) ++i;
    served[s] = i;
  }
  // cum[s][i]: cost of sending the first i support rows to s.
  std::vector<std::vector<double>> cum(n);
  for (std::size_t s = 0; s < n; ++s) {
    cum[s].assign(served[s] + 1, 0.0);
    for (std::size_t i = 0; i < served[s]; ++i) {
      cum[s][i + 1] = cum[s][i] + px[rows[i]] * cost(rows[i], s);
    }
  }
  const std::size_t last = first.back();
  const auto K = static_cast<std::size_t>(k_max);
  std::vector<std::vector<double>> D(K + 1, std::vector<double>(n, kInfinity));
  std::vector<std::vector<std::size_t>> from(
      K + 1, std::vector<std::size_t>(n, n));
  for (std::size_t s = 0; s < n; ++s) D[1][s] = cum[s][served[s]];
  for (std::size_t k = 2; k <= K; ++k) {
    for (std::size_t s = k - 1; s < n; ++s) {
      const double total = cum[s][served[s]];
      for (std::size_t a = k - 2; a < s; ++a) {
        const double v = D[k - 1][a] + total - cum[s][served[a]];
        if (v < D[k][s]) {
          D[k][s] = v;
          from[k][s] = a;
        }
      }
    }
  }

  std::vector<SetOptimum> out(K);
  std::size_t best_k = 0, best_s = n;
  double best = kInfinity;
  for (std::size_t k = 1; k <= K; ++k) {
    for (std::size_t s = last; s < n; ++s) {
      if (best_k == 0 || D[k][s] < best - 1e-12 * std::max(1.0, best)) {
        best = D[k][s];
        best_k = k;
        best_s = s;
      }
    }
    std::vector<std::size_t> chosen;
    for (std::size_t k2 = best_k, s = best_s; k2 >= 1; --k2) {
      chosen.push_back(s);
      s = from[k2][s];
    }
    std::sort(chosen.begin(), chosen.end());
    auto& o = out[k - 1];
    o.mapping.resize(m);
    for (std::size_t x = 0; x < m; ++x) {
      const std::size_t f = cheapest_column(cost, x);
      if (px[x] == 0.0) {
        o.mapping[x] = f;
      } else {
        o.mapping[x] = *std::lower_bound(chosen.begin(), chosen.end(), f);
      }
    }
    o.cost = best;
  }
  return out;
}

// Greedy schemes with set size around L make a good starting cell set.
inline std::vector<ProtectionScheme> greedy_hints(const GreedyCurve& g,
                                                  double L) {
  std::vector<ProtectionScheme> out;
  for (const auto& p : g.points) {
    const double s = static_cast<double>(p.set_size);
    if (s >= std::floor(L) - 1.0 && s <= std::ceil(L) + 1.0) {
      out.push_back(p.scheme);
    }
  }
  return out;
}

inline std::optional<GreedyCurve> try_greedy(const Channel& channel) {
  try {
    return greedy_curve(channel, channel.num_outputs());
  } catch (const InfeasibleError&) {
    return std::nullopt;
  }
}

inline TradeoffPoint min_cost_with(const Channel& channel, double L,
                                   const Eq7Builder& builder,
                                   const std::optional<GreedyCurve>& greedy,
                                   const OptimizeOptions& opt) {
  if (!(L >= 1.0) || std::isnan(L)) {
    throw InvalidArgument("exp-leak bound must be at least 1");
  }
  const double bound = std::min(L, static_cast<double>(channel.num_outputs()));
  const auto hints =
      greedy ? greedy_hints(*greedy, bound) : std::vector<ProtectionScheme>{};
  auto r = builder.solve(Eq7Mode::kMinCost, bound, builder.seed(hints), opt);
  TradeoffPoint pt;
  pt.exp_leak_bound = L;
  pt.cost = total_cost(channel, r.scheme);
  pt.scheme = std::move(r.scheme);
  return pt;
}

inline unsigned resolve_threads(unsigned requested, std::size_t jobs) {
  unsigned t = requested;
  if (t == 0) t = std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(
      std::max<std::size_t>(1, std::min<std::size_t>(t, jobs)));
}

// Runs fn(i) for i in [0, count) on up to `threads` workers. The first
// exception is rethrown after all workers stop.
inline void parallel_for(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t)>& fn) {
  threads = resolve_threads(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

// Cheapest scheme with exp-leak at most L.
inline TradeoffPoint min_cost_for_leak(const Channel& channel, double L,
                                       const OptimizeOptions& opt = {}) {
  detail::Eq7Builder builder(channel);
  return detail::min_cost_with(channel, L, builder, detail::try_greedy(channel),
                               opt);
}

// Least-leaking scheme with total cost at most `budget`.
inline TradeoffPoint min_leak_for_cost(const Channel& channel, double budget,
                                       const OptimizeOptions& opt = {}) {
  if (std::isnan(budget) || budget < 0.0) {
    throw InvalidArgument("budget must be nonnegative");
  }
  const double floor_cost = min_achievable_cost(channel);
  if (budget < floor_cost - 1e-12 * std::max(1.0, floor_cost)) {
    std::ostringstream os;
    os.precision(17);
    os << "budget " << budget << " is below the minimum achievable cost "
       << floor_cost;
    throw InfeasibleError(os.str(), floor_cost);
  }
  // Past the most expensive finite scheme the budget no longer binds.
  double ceiling = 0.0;
  for (std::size_t x = 0; x < channel.num_inputs(); ++x) {
    double worst = 0.0;
    for (std::size_t y = 0; y < channel.num_outputs(); ++y) {
      if (channel.cost().is_finite(x, y)) {
        worst = std::max(worst, channel.cost()(x, y));
      }
    }
    ceiling += channel.px()[x] * worst;
  }
  const double bound = std::max(std::min(budget, ceiling + 1.0), floor_cost);

  detail::Eq7Builder builder(channel);
  std::vector<ProtectionScheme> hints;
  if (auto g = detail::try_greedy(channel)) {
    // The two greedy points bracketing the budget.
    const ProtectionScheme* above = nullptr;
    for (const auto& p : g->points) {
      if (p.cost > bound) {
        above = &p.scheme;
      } else {
        hints.push_back(p.scheme);
        break;
      }
    }
    if (above) hints.push_back(*above);
  }
  auto r = builder.solve(detail::Eq7Mode::kMinLeak, bound,
                         builder.seed(hints), opt);
  TradeoffPoint pt;
  pt.scheme = std::move(r.scheme);
  pt.exp_leak_bound = exp_leak(channel.px(), pt.scheme);
  pt.cost = total_cost(channel, pt.scheme);
  return pt;
}

// Exp-leak of the cheapest deterministic scheme (each row on its cheapest
// column). C*(L) is flat from here on.
inline int saturation_leak(const Channel& channel) {
  std::vector<std::size_t> target(channel.num_inputs());
  for (std::size_t x = 0; x < target.size(); ++x) {
    target[x] = cheapest_column(channel.cost(), x);
  }
  const auto p = ProtectionScheme::from_mapping(target, channel.num_outputs());
  return static_cast<int>(std::lround(exp_leak(channel.px(), p)));
}

// Integer exp-leak points of the lower hull, each with a deterministic
// scheme attaining it. Integer L that sit on a flat stretch or strictly
// inside a hull segment without a deterministic scheme of their own are
// left out.
inline std::vector<Corner> deterministic_corners(
    const Channel& channel, int L_max, const OptimizeOptions& opt = {}) {
  if (L_max < 1) throw InvalidArgument("L_max must be at least 1");
  if (static_cast<std::size_t>(L_max) > channel.num_outputs()) {
    throw InvalidArgument("L_max exceeds the number of outputs");
  }
  if (!is_staircase_nondecreasing(channel.cost())) {
    throw InvalidArgument(
        "deterministic corners need a staircase nondecreasing cost");
  }
  if (opt.corners == CornerMethod::kDynamicProgram) {
    const auto best = detail::staircase_optima(channel, L_max);
    std::vector<Corner> out;
    for (std::size_t i = 0; i < best.size(); ++i) {
      auto p = ProtectionScheme::from_mapping(best[i].mapping,
                                              channel.num_outputs());
      const double c = total_cost(channel, p);
      const double tol = 1e-9 * std::max(1.0, std::abs(c));
      if (!out.empty() && c >= out.back().cost - tol) continue;
      out.push_back({static_cast<int>(i) + 1, c, std::move(p)});
    }
    return out;
  }
  const int sat = saturation_leak(channel);
  const int upper = std::min(L_max, sat);
  const int solves = upper < sat ? upper + 1 : upper;

  detail::Eq7Builder builder(channel);
  const auto greedy = detail::try_greedy(channel);
  std::vector<TradeoffPoint> lp(static_cast<std::size_t>(solves));
  detail::parallel_for(lp.size(), opt.threads, [&](std::size_t i) {
    lp[i] = detail::min_cost_with(channel, static_cast<double>(i + 1), builder,
                                  greedy, opt);
  });
  auto C = [&](int k) {
    return k <= solves ? lp[k - 1].cost : min_achievable_cost(channel);
  };
  double scale = 1.0;
  for (const auto& p : lp) scale = std::max(scale, std::abs(p.cost));
  const double tol = 1e-9 * scale;

  std::vector<std::optional<Corner>> found(static_cast<std::size_t>(upper));
  detail::parallel_for(found.size(), opt.threads, [&](std::size_t i) {
    const int k = static_cast<int>(i) + 1;
    const double s_l = k == 1 ? kInfinity : C(k - 1) - C(k);
    const double s_r = C(k) - C(k + 1);
    if (s_l <= tol) return;  // dominated by k - 1
    const bool vertex = s_l > s_r + tol;
    double alpha;
    if (!vertex) {
      alpha = s_l;  // collinear with both neighbours
    } else if (k == 1) {
      alpha = s_r + std::max(1.0, s_r);
    } else {
      alpha = 0.5 * (s_l + s_r);
    }
    ProtectionScheme det;
    try {
      det = determinize(channel, lp[i].scheme, alpha);
    } catch (const InvalidArgument&) {
      if (vertex) throw;
      return;
    }
    const double leak = exp_leak(channel.px(), det);
    const double cost = total_cost(channel, det);
    if (std::abs(leak - k) > 1e-9 || std::abs(cost - C(k)) > 1e-7 * scale) {
      if (vertex) {
        std::ostringstream os;
        os.precision(12);
        os << "determinized corner at L=" << k << " landed at (" << leak
           << ", " << cost << ")";
        throw InternalError(os.str());
      }
      return;
    }
    found[i] = Corner{k, cost, std::move(det)};
  });

  std::vector<Corner> out;
  for (auto& c : found) {
    if (!c) continue;
    if (!out.empty() && std::abs(out.back().cost - c->cost) <= tol) continue;
    out.push_back(std::move(*c));
  }
  return out;
}

// Lower convex hull of the deterministic corners.
inline TradeoffCurve build_curve(const Channel& channel,
                                 const OptimizeOptions& opt = {}) {
  if (!is_staircase_nondecreasing(channel.cost())) {
    throw InvalidArgument(
        "trade-off curve decomposition needs a staircase nondecreasing cost");
  }
  TradeoffCurve curve;
  curve.deterministic_corners = deterministic_corners(
      channel, static_cast<int>(channel.num_outputs()), opt);
  for (const auto& c : curve.deterministic_corners) {
    TradeoffPoint p{static_cast<double>(c.L), c.cost, c.scheme};
    while (curve.hull.size() >= 2) {
      const auto& a = curve.hull[curve.hull.size() - 2];
      const auto& b = curve.hull.back();
      // Drop b when it lies on or above the chord from a to p.
      const double cross =
          (b.exp_leak_bound - a.exp_leak_bound) * (p.cost - a.cost) -
          (b.cost - a.cost) * (p.exp_leak_bound - a.exp_leak_bound);
      if (cross <= 1e-12) {
        curve.hull.pop_back();
      } else {
        break;
      }
    }
    curve.hull.push_back(std::move(p));
  }
  return curve;
}

struct MiResult {
  ProtectionScheme scheme;
  double mi_bits = 0.0;
  double gap = 0.0;  // final Frank-Wolfe gap
  long iterations = 0;
  bool converged = false;  // false: iteration cap hit, best scheme returned
};

inline constexpr double kMiTol = 1e-6;
inline constexpr long kMiMaxIters = 20000;

// Conditional-gradient minimization of I(X;Y) over schemes with total cost
// at most `budget`, with away steps. Linear steps solve an LP over the same
// polytope; step lengths come from a golden-section search, which is exact
// up to its bracket since MI is convex along any segment.
inline MiResult mi_optimal_scheme(const Channel& channel, double budget,
                                  double tol = kMiTol,
                                  long max_iters = kMiMaxIters,
                                  const OptimizeOptions& opt = {}) {
  const double floor_cost = min_achievable_cost(channel);
  if (std::isnan(budget) || budget < floor_cost - 1e-12) {
    throw InfeasibleError("budget is below the minimum achievable cost",
                          floor_cost);
  }
  const auto& px = channel.px();
  const auto& cost = channel.cost();
  const std::size_t m = channel.num_inputs(), n = channel.num_outputs();

  struct Cell {
    std::size_t x, y;
  };
  std::vector<Cell> cells;
  std::vector<std::size_t> support;
  for (std::size_t x = 0; x < m; ++x) {
    if (px[x] == 0.0) continue;
    support.push_back(x);
    for (std::size_t y = 0; y < n; ++y) {
      if (cost.is_finite(x, y)) cells.push_back({x, y});
    }
  }
  const std::size_t k_cells = cells.size();
  lp::LinearProgram lmo;
  lmo.objective.assign(k_cells, 0.0);
  if (std::isfinite(budget)) {
    std::vector<double> row(k_cells);
    for (std::size_t k = 0; k < k_cells; ++k) {
      row[k] = px[cells[k].x] * cost(cells[k].x, cells[k].y);
    }
    lmo.add(std::move(row), lp::Relation::kLessEqual,
            std::max(budget, floor_cost));
  }
  for (std::size_t x : support) {
    std::vector<double> row(k_cells, 0.0);
    for (std::size_t k = 0; k < k_cells; ++k) {
      if (cells[k].x == x) row[k] = 1.0;
    }
    lmo.add(std::move(row), lp::Relation::kEqual, 1.0);
  }

  using Point = std::vector<double>;  // one value per cell
  auto to_scheme = [&](const Point& v) {
    auto s = ProtectionScheme::zeros(m, n);
    for (std::size_t x = 0; x < m; ++x) {
      if (px[x] == 0.0) s(x, cheapest_column(cost, x)) = 1.0;
    }
    for (std::size_t k = 0; k < k_cells; ++k) {
      s(cells[k].x, cells[k].y) = std::max(0.0, v[k]);
    }
    return s;
  };
  auto mi = [&](const Point& v) {
    return detail::mutual_information_rows(px.probs(), to_scheme(v));
  };
  auto dot = [](const Point& a, const Point& b) {
    double t = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) t += a[k] * b[k];
    return t;
  };
  auto along = [](const Point& p, const Point& d, double g) {
    Point r(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) r[k] = p[k] + g * d[k];
    return r;
  };

  // Active vertices and their convex weights; start at the cheapest scheme.
  std::vector<Point> verts;
  std::vector<double> weights;
  {
    Point v(k_cells, 0.0);
    for (std::size_t k = 0; k < k_cells; ++k) {
      if (cells[k].y == cheapest_column(cost, cells[k].x)) v[k] = 1.0;
    }
    verts.push_back(v);
    weights.push_back(1.0);
  }
  Point P = verts.front();
  double f = mi(P);

  MiResult res;
  for (res.iterations = 0; res.iterations < max_iters; ++res.iterations) {
    std::vector<double> py(n, 0.0);
    for (std::size_t k = 0; k < k_cells; ++k) {
      py[cells[k].y] += px[cells[k].x] * P[k];
    }
    Point grad(k_cells);
    for (std::size_t k = 0; k < k_cells; ++k) {
      const double pxk = px[cells[k].x];
      grad[k] = py[cells[k].y] <= 0.0
                    ? pxk * std::log2(1.0 / pxk)
                    : pxk * std::log2(std::max(P[k], 1e-300) / py[cells[k].y]);
    }
    lmo.objective = grad;
    const auto sol = lp::solve(lmo, opt.solver);
    if (sol.status != lp::Status::kOptimal) {
      throw NumericalError("linear step of the MI minimizer failed");
    }
    Point S = sol.values;
    for (double& v : S) v = std::max(0.0, v);

    const double gp = dot(grad, P);
    res.gap = gp - dot(grad, S);
    if (res.gap <= tol) {
      res.converged = true;
      break;
    }
    std::size_t away = 0;
    for (std::size_t i = 1; i < verts.size(); ++i) {
      if (dot(grad, verts[i]) > dot(grad, verts[away])) away = i;
    }
    const double away_gap = dot(grad, verts[away]) - gp;

    Point d(k_cells);
    double g_max;
    const bool fw_step = res.gap >= away_gap || verts.size() == 1;
    if (fw_step) {
      for (std::size_t k = 0; k < k_cells; ++k) d[k] = S[k] - P[k];
      g_max = 1.0;
    } else {
      for (std::size_t k = 0; k < k_cells; ++k) d[k] = P[k] - verts[away][k];
      g_max = weights[away] / (1.0 - weights[away]);
    }

    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = 0.0, hi = g_max;
    double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
    double fa = mi(along(P, d, a)), fb = mi(along(P, d, b));
    for (int it = 0; it < 100 && hi - lo > 1e-14 * std::max(1.0, g_max);
         ++it) {
      if (fa <= fb) {
        hi = b;
        b = a;
        fb = fa;
        a = hi - phi * (hi - lo);
        fa = mi(along(P, d, a));
      } else {
        lo = a;
        a = b;
        fa = fb;
        b = lo + phi * (hi - lo);
        fb = mi(along(P, d, b));
      }
    }
    double gamma = fa <= fb ? a : b;
    double f_new = std::min(fa, fb);
    const double f_end = mi(along(P, d, g_max));
    if (f_end <= f_new) {
      gamma = g_max;
      f_new = f_end;
    }
    if (f_new > f) break;  // no descent left at machine precision

    if (fw_step) {
      for (double& w : weights) w *= 1.0 - gamma;
      std::size_t hit = verts.size();
      for (std::size_t i = 0; i < verts.size(); ++i) {
        double diff = 0.0;
        for (std::size_t k = 0; k < k_cells; ++k) {
          diff = std::max(diff, std::abs(verts[i][k] - S[k]));
        }
        if (diff <= 1e-12) hit = i;
      }
      if (hit == verts.size()) {
        verts.push_back(S);
        weights.push_back(gamma);
      } else {
        weights[hit] += gamma;
      }
    } else {
      for (double& w : weights) w *= 1.0 + gamma;
      weights[away] -= gamma;
    }
    for (std::size_t i = verts.size(); i-- > 0;) {
      if (weights[i] <= 1e-15) {
        verts.erase(verts.begin() + static_cast<std::ptrdiff_t>(i));
        weights.erase(weights.begin() + static_cast<std::ptrdiff_t>(i));
      }
    }
    P = along(P, d, gamma);
    f = f_new;
  }
  res.scheme = to_scheme(P);
  for (std::size_t x = 0; x < m; ++x) {
    double sum = 0.0;
    for (std::size_t y = 0; y < n; ++y) sum += res.scheme(x, y);
    for (std::size_t y = 0; y < n; ++y) res.scheme(x, y) /= sum;
  }
  res.mi_bits = mutual_information(px, res.scheme);
  return res;
}

}  // namespace leakbound

#endif  // LEAKBOUND_OPTIMIZE_HPP_
