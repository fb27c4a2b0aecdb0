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

// Conversion of an optimizing stochastic scheme into a deterministic one on
// staircase costs.
//
// The loop alternates water-filling with a +-1 perturbation direction Q
// that moves every maxed-out entry of a column together. Along Q the
// objective cost + alpha * exp_leak is affine, and for an optimizing input
// it is flat, so stepping to either end of the admissible interval keeps
// the objective while removing at least one fractional column or hanging
// entry.
//
// Rows with p(x) = 0 are left out of column maxima and of the walk.

#ifndef LEAKBOUND_DETERMINIZE_HPP_
#define LEAKBOUND_DETERMINIZE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <vector>

#include "leakbound/core.hpp"
#include "leakbound/metrics.hpp"

namespace leakbound {

using Mask = Matrix<std::uint8_t>;

// Entries in {-1, 0, +1}.
using DirectionMatrix = Matrix<int>;

struct EntryClassification {
  Mask fractional_mask;
  Mask maxed_out_mask;
  Mask hanging_mask;
  std::vector<std::size_t> fractional_columns;
  std::vector<double> column_max;
};

inline constexpr double kDeterminizeTol = 1e-9;
inline constexpr double kObjectiveDriftTol = 1e-7;

namespace detail {

inline std::vector<bool> all_rows(std::size_t m) {
  return std::vector<bool>(m, true);
}

inline std::vector<double> column_maxima(const ProtectionScheme& scheme,
                                         const std::vector<bool>& rows) {
  std::vector<double> out(scheme.cols(), 0.0);
  for (std::size_t x = 0; x < scheme.rows(); ++x) {
    if (!rows[x]) continue;
    for (std::size_t y = 0; y < scheme.cols(); ++y) {
      out[y] = std::max(out[y], scheme(x, y));
    }
  }
  return out;
}

inline void require_staircase(const CostMatrix& cost) {
  if (!is_staircase_nondecreasing(cost)) {
    throw InvalidArgument("cost matrix is not staircase nondecreasing");
  }
}

}  // namespace detail

// Masks are computed over the rows selected by `rows` (support rows).
inline EntryClassification classify(const ProtectionScheme& scheme,
                                    const std::vector<bool>& rows) {
  const double tol = kDeterminizeTol;
  const std::size_t m = scheme.rows(), n = scheme.cols();
  EntryClassification out{Mask(m, n, 0), Mask(m, n, 0), Mask(m, n, 0), {},
                          detail::column_maxima(scheme, rows)};
  for (std::size_t y = 0; y < n; ++y) {
    const double cm = out.column_max[y];
    if (cm > tol && cm < 1.0 - tol) out.fractional_columns.push_back(y);
  }
  for (std::size_t x = 0; x < m; ++x) {
    if (!rows[x]) continue;
    for (std::size_t y = 0; y < n; ++y) {
      const double p = scheme(x, y);
      if (p > tol && p < 1.0 - tol) out.fractional_mask(x, y) = 1;
      if (p <= tol) continue;
      if (std::abs(p - out.column_max[y]) <= tol) {
        out.maxed_out_mask(x, y) = 1;
      } else {
        out.hanging_mask(x, y) = 1;
      }
    }
  }
  return out;
}

inline EntryClassification classify(const ProtectionScheme& scheme) {
  return classify(scheme, detail::all_rows(scheme.rows()));
}

// Number of fractional columns plus number of hanging entries.
inline int randomness(const EntryClassification& c) {
  int r = static_cast<int>(c.fractional_columns.size());
  for (std::size_t x = 0; x < c.hanging_mask.rows(); ++x) {
    for (auto h : c.hanging_mask.row(x)) r += h;
  }
  return r;
}

inline int randomness(const ProtectionScheme& scheme,
                      const std::vector<bool>& rows) {
  return randomness(classify(scheme, rows));
}

inline int randomness(const ProtectionScheme& scheme) {
  return randomness(classify(scheme));
}

// Rebuilds every support row left to right under the column maxima of the
// input. Zero-probability rows are copied through.
inline ProtectionScheme water_fill(const Channel& channel,
                                   const ProtectionScheme& scheme) {
  check_same_shape(channel, scheme);
  detail::require_staircase(channel.cost());
  const auto rows = support_mask(channel.px());
  const auto caps = detail::column_maxima(scheme, rows);
  const auto& cost = channel.cost();
  ProtectionScheme out = scheme;
  for (std::size_t x = 0; x < scheme.rows(); ++x) {
    if (!rows[x]) continue;
    double rem = 1.0;
    std::size_t last = scheme.cols();
    for (std::size_t y = 0; y < scheme.cols(); ++y) {
      out(x, y) = 0.0;
      if (!cost.is_finite(x, y) || rem <= 1e-12) continue;
      const double v = std::min(caps[y], rem);
      out(x, y) = v;
      rem -= v;
      if (v > 0.0) last = y;
    }
    if (rem > kDeterminizeTol || last == scheme.cols()) {
      std::ostringstream os;
      os << "row " << x << " cannot absorb its mass under the column maxima"
         << " (short by " << rem << ")";
      throw InfeasibleError(os.str());
    }
    out(x, last) += rem;
  }
  return out;
}

inline bool is_water_filled(const Channel& channel,
                            const ProtectionScheme& scheme,
                            double tol = kDeterminizeTol) {
  const auto filled = water_fill(channel, scheme);
  for (std::size_t x = 0; x < scheme.rows(); ++x) {
    for (std::size_t y = 0; y < scheme.cols(); ++y) {
      if (std::abs(filled(x, y) - scheme(x, y)) > tol) return false;
    }
  }
  return true;
}

// The Q-generation walk. `scheme` must be water-filled and not
// deterministic on the support rows.
inline DirectionMatrix generate_q(const Channel& channel,
                                  const ProtectionScheme& scheme) {
  check_same_shape(channel, scheme);
  if (!is_water_filled(channel, scheme)) {
    throw InvalidArgument("generate_q needs a water-filled scheme");
  }
  const auto rows = support_mask(channel.px());
  const auto cls = classify(scheme, rows);
  if (cls.fractional_columns.empty()) {
    throw InvalidArgument("generate_q needs a scheme with a fractional entry");
  }
  const std::size_t m = scheme.rows(), n = scheme.cols();

  std::vector<bool> has_hanging(m, false);
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      if (cls.hanging_mask(x, y)) has_hanging[x] = true;
    }
  }
  auto is_fractional_col = [&](std::size_t y) {
    return std::find(cls.fractional_columns.begin(),
                     cls.fractional_columns.end(),
                     y) != cls.fractional_columns.end();
  };

  DirectionMatrix q(m, n, 0);
  std::vector<int> nnz(m, 0);
  std::size_t y = cls.fractional_columns.front();
  int sign = +1;
  for (;;) {
    // Stamp every maxed-out entry of the column.
    std::vector<std::size_t> maxed;
    for (std::size_t x = 0; x < m; ++x) {
      if (!cls.maxed_out_mask(x, y)) continue;
      maxed.push_back(x);
      if (q(x, y) == 0) ++nnz[x];
      q(x, y) = sign;
    }
    sign = -sign;

    std::size_t next_row = m;
    for (std::size_t x : maxed) {
      if (!has_hanging[x] && nnz[x] < 2) {
        next_row = x;  // topmost, since `maxed` is in row order
        break;
      }
    }
    if (next_row == m) break;

    std::size_t next_col = n;
    for (std::size_t c = n; c-- > 0;) {
      if (cls.maxed_out_mask(next_row, c)) {
        next_col = c;
        break;
      }
    }
    if (next_col == n || next_col <= y || !is_fractional_col(next_col)) {
      std::ostringstream os;
      os << "Q walk from column " << y << " via row " << next_row
         << " does not reach a fractional column to the right";
      throw InternalError(os.str());
    }
    y = next_col;
  }

  // Balance rows that carry hanging mass.
  for (std::size_t x = 0; x < m; ++x) {
    if (!has_hanging[x] || nnz[x] % 2 == 0) continue;
    int sum = 0;
    for (std::size_t c = 0; c < n; ++c) sum += q(x, c);
    if (sum != 1 && sum != -1) {
      std::ostringstream os;
      os << "row " << x << " of Q has sum " << sum << " before balancing";
      throw InternalError(os.str());
    }
    for (std::size_t c = 0; c < n; ++c) {
      if (cls.hanging_mask(x, c)) q(x, c) = -sum;
    }
  }

  for (std::size_t x = 0; x < m; ++x) {
    int sum = 0;
    for (std::size_t c = 0; c < n; ++c) sum += q(x, c);
    if (sum != 0) {
      std::ostringstream os;
      os << "row " << x << " of Q sums to " << sum;
      throw InternalError(os.str());
    }
  }
  return q;
}

struct DeltaBounds {
  double minus = 0.0;  // < 0
  double plus = 0.0;   // > 0
};

namespace detail {

// Largest t >= 0 such that scheme + t * dir * q keeps its fractional and
// maxed-out sets.
inline double step_limit(const ProtectionScheme& scheme,
                         const DirectionMatrix& q,
                         const EntryClassification& cls,
                         const std::vector<bool>& rows, int dir) {
  const std::size_t m = scheme.rows(), n = scheme.cols();
  // Shift of each column maximum per unit step.
  std::vector<int> col_shift(n, 0);
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      if (cls.maxed_out_mask(x, y) && q(x, y) != 0) col_shift[y] = dir * q(x, y);
    }
  }
  double limit = kInfinity;
  for (std::size_t x = 0; x < m; ++x) {
    if (!rows[x]) continue;
    for (std::size_t y = 0; y < n; ++y) {
      const double p = scheme(x, y);
      const int d = dir * q(x, y);
      if (d > 0) limit = std::min(limit, (1.0 - p) / d);
      if (d < 0) limit = std::min(limit, p / -d);
      if (cls.hanging_mask(x, y)) {
        const int closing = d - col_shift[y];
        if (closing > 0) {
          limit = std::min(limit, (cls.column_max[y] - p) / closing);
        }
      }
    }
  }
  return limit;
}

}  // namespace detail

inline DeltaBounds delta_bounds(const ProtectionScheme& scheme,
                                const DirectionMatrix& q,
                                const std::vector<bool>& rows) {
  if (q.rows() != scheme.rows() || q.cols() != scheme.cols()) {
    throw DimensionError("Q shape does not match scheme");
  }
  const auto cls = classify(scheme, rows);
  DeltaBounds b;
  b.plus = detail::step_limit(scheme, q, cls, rows, +1);
  b.minus = -detail::step_limit(scheme, q, cls, rows, -1);
  if (!(b.plus > 0.0) || !std::isfinite(b.plus) || !(b.minus < 0.0) ||
      !std::isfinite(b.minus)) {
    throw InternalError("degenerate step interval for Q");
  }
  return b;
}

inline DeltaBounds delta_bounds(const ProtectionScheme& scheme,
                                const DirectionMatrix& q) {
  return delta_bounds(scheme, q, detail::all_rows(scheme.rows()));
}

// cost + alpha * exp_leak.
inline double lagrangian(const Channel& channel, const ProtectionScheme& scheme,
                         double alpha) {
  return total_cost(channel, scheme) + alpha * exp_leak(channel.px(), scheme);
}

namespace detail {

inline ProtectionScheme step(const ProtectionScheme& scheme,
                             const DirectionMatrix& q, double delta) {
  ProtectionScheme out = scheme;
  for (std::size_t x = 0; x < scheme.rows(); ++x) {
    for (std::size_t y = 0; y < scheme.cols(); ++y) {
      if (q(x, y) == 0) continue;
      double v = scheme(x, y) + delta * q(x, y);
      if (std::abs(v) <= kDeterminizeTol) v = 0.0;
      if (std::abs(v - 1.0) <= kDeterminizeTol) v = 1.0;
      out(x, y) = v;
    }
  }
  return out;
}

inline void round_deterministic(ProtectionScheme& scheme) {
  for (std::size_t x = 0; x < scheme.rows(); ++x) {
    for (std::size_t y = 0; y < scheme.cols(); ++y) {
      scheme(x, y) = scheme(x, y) > 0.5 ? 1.0 : 0.0;
    }
  }
}

}  // namespace detail

// One Q step in both directions: scheme = lambda * plus + (1 - lambda) * minus.
struct QSplit {
  DirectionMatrix q;
  DeltaBounds delta;
  ProtectionScheme plus;
  ProtectionScheme minus;
  double lambda = 0.0;  // weight on `plus`
};

// `scheme` must be water-filled with a fractional entry.
inline QSplit split_once(const Channel& channel,
                         const ProtectionScheme& scheme) {
  QSplit s;
  s.q = generate_q(channel, scheme);
  s.delta = delta_bounds(scheme, s.q, support_mask(channel.px()));
  s.plus = detail::step(scheme, s.q, s.delta.plus);
  s.minus = detail::step(scheme, s.q, s.delta.minus);
  s.lambda = -s.delta.minus / (s.delta.plus - s.delta.minus);
  return s;
}

struct DeterminizeResult {
  ProtectionScheme scheme;
  int iterations = 0;
  int initial_randomness = 0;  // R of the input
  double objective_in = 0.0;
  double objective_out = 0.0;
};

// Requires `scheme` to minimize cost + alpha * exp_leak over all valid
// schemes. Zero-probability rows come out mapped to their cheapest column.
inline DeterminizeResult determinize_traced(const Channel& channel,
                                            const ProtectionScheme& scheme,
                                            double alpha) {
  check_same_shape(channel, scheme);
  detail::require_staircase(channel.cost());
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InvalidArgument("alpha must be positive and finite");
  }
  if (auto v = validate_scheme(channel, scheme)) {
    throw InvalidArgument("determinize input invalid: " + v->message);
  }
  const auto rows = support_mask(channel.px());

  DeterminizeResult res;
  res.initial_randomness = randomness(scheme, rows);
  res.objective_in = lagrangian(channel, scheme, alpha);
  const double drift_tol =
      kObjectiveDriftTol * std::max(1.0, std::abs(res.objective_in));

  auto check_drift = [&](const ProtectionScheme& p, const char* where) {
    const double obj = lagrangian(channel, p, alpha);
    if (std::abs(obj - res.objective_in) > drift_tol) {
      std::ostringstream os;
      os.precision(12);
      os << "objective moved from " << res.objective_in << " to " << obj
         << " " << where << "; input does not minimize cost + alpha*leak";
      throw InvalidArgument(os.str());
    }
  };

  ProtectionScheme p = water_fill(channel, scheme);
  check_drift(p, "during water-filling");
  int r = randomness(p, rows);
  // Hard stop well past anything the randomness measure allows.
  const int cap = r + res.initial_randomness + 1;
  while (r > 0) {
    if (res.iterations >= cap) {
      throw InternalError("determinize exceeded its iteration bound");
    }
    const auto split = split_once(channel, p);
    const double f_plus = lagrangian(channel, split.plus, alpha);
    const double f_minus = lagrangian(channel, split.minus, alpha);
    ProtectionScheme next =
        f_plus <= f_minus + 1e-12 ? split.plus : split.minus;
    next = water_fill(channel, next);
    check_drift(next, "along Q");
    const int r_next = randomness(next, rows);
    if (r_next >= r) {
      std::ostringstream os;
      os << "randomness did not decrease (" << r << " -> " << r_next << ")";
      throw InternalError(os.str());
    }
    p = std::move(next);
    r = r_next;
    ++res.iterations;
  }

  for (std::size_t x = 0; x < p.rows(); ++x) {
    if (rows[x]) continue;
    const std::size_t c = cheapest_column(channel.cost(), x);
    for (std::size_t y = 0; y < p.cols(); ++y) p(x, y) = y == c ? 1.0 : 0.0;
  }
  detail::round_deterministic(p);
  res.objective_out = lagrangian(channel, p, alpha);
  check_drift(p, "after rounding");
  res.scheme = std::move(p);
  return res;
}

inline ProtectionScheme determinize(const Channel& channel,
                                    const ProtectionScheme& scheme,
                                    double alpha) {
  return determinize_traced(channel, scheme, alpha).scheme;
}

}  // namespace leakbound

#endif  // LEAKBOUND_DETERMINIZE_HPP_
