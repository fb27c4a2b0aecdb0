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

// Dense two-phase primal simplex.
//
// Minimizes c'v subject to rows (a_i'v {<=,=,>=} b_i) and bounds
// lo <= v <= hi. Variables are shifted to v - lo >= 0, finite upper bounds
// become extra <= rows, and every row gets an identity column (slack or
// artificial) so that B^-1 stays readable from the tableau; duals come from
// those columns. Entering variables follow the most-negative reduced cost
// rule, switching to Bland's rule after a streak of degenerate pivots.
// Returned optima are basic (vertex) solutions.

#ifndef LEAKBOUND_SIMPLEX_HPP_
#define LEAKBOUND_SIMPLEX_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "leakbound/core.hpp"

namespace leakbound::lp {

enum class Relation { kLessEqual, kEqual, kGreaterEqual };

struct Constraint {
  std::vector<double> coeffs;
  Relation relation = Relation::kLessEqual;
  double rhs = 0.0;
};

struct Bounds {
  double lo = 0.0;
  double hi = kInfinity;
};

struct LinearProgram {
  std::vector<double> objective;  // minimize objective' v
  std::vector<Constraint> constraints;
  std::vector<Bounds> bounds;  // empty means [0, inf) for every variable

  std::size_t num_variables() const { return objective.size(); }

  Bounds bound(std::size_t j) const {
    return bounds.empty() ? Bounds{} : bounds[j];
  }

  void add(std::vector<double> coeffs, Relation rel, double rhs) {
    constraints.push_back({std::move(coeffs), rel, rhs});
  }

  void validate() const {
    const std::size_t n = num_variables();
    if (!bounds.empty() && bounds.size() != n) {
      throw DimensionError("bounds length does not match objective");
    }
    for (double c : objective) {
      if (!std::isfinite(c)) throw InvalidArgument("objective not finite");
    }
    for (std::size_t i = 0; i < constraints.size(); ++i) {
      const auto& row = constraints[i];
      if (row.coeffs.size() != n) {
        std::ostringstream os;
        os << "constraint " << i << " has " << row.coeffs.size()
           << " coefficients, expected " << n;
        throw DimensionError(os.str());
      }
      if (!std::isfinite(row.rhs)) {
        throw InvalidArgument("constraint right-hand side not finite");
      }
    }
    for (std::size_t j = 0; j < bounds.size(); ++j) {
      if (!std::isfinite(bounds[j].lo) || bounds[j].lo > bounds[j].hi) {
        std::ostringstream os;
        os << "variable " << j << " has invalid bounds";
        throw InvalidArgument(os.str());
      }
    }
  }
};

enum class Status { kOptimal, kInfeasible, kUnbounded };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::kOptimal: return "optimal";
    case Status::kInfeasible: return "infeasible";
    case Status::kUnbounded: return "unbounded";
  }
  return "?";
}

struct LpSolution {
  Status status = Status::kInfeasible;
  std::vector<double> values;
  double objective_value = 0.0;
  bool is_vertex = false;
  // One multiplier per constraint (not per bound), signed so that
  // objective_j - sum_i duals_i * a_ij is the reduced cost of v_j.
  std::vector<double> duals;
  // Reduced cost of each variable at the final basis.
  std::vector<double> reduced_costs;
  long pivots = 0;
};

struct SolverOptions {
  double pivot_tol = 1e-9;
  double optimality_tol = 1e-9;
  double feasibility_tol = 1e-7;
  int degenerate_streak = 50;
  long max_pivots = 0;  // 0: derived from problem size
};

// Pivot count exceeded the configured cap.
class StallError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Independent check of a candidate point against rows and bounds. Returns a
// description of every violation larger than tol.
inline std::vector<std::string> check_feasibility(
    const LinearProgram& lp, std::span<const double> values,
    double tol = 1e-7) {
  std::vector<std::string> out;
  if (values.size() != lp.num_variables()) {
    out.push_back("wrong number of values");
    return out;
  }
  for (std::size_t j = 0; j < values.size(); ++j) {
    const Bounds b = lp.bound(j);
    if (values[j] < b.lo - tol || values[j] > b.hi + tol) {
      std::ostringstream os;
      os << "variable " << j << " = " << values[j] << " outside [" << b.lo
         << ", " << b.hi << "]";
      out.push_back(os.str());
    }
  }
  for (std::size_t i = 0; i < lp.constraints.size(); ++i) {
    const auto& row = lp.constraints[i];
    double lhs = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
      lhs += row.coeffs[j] * values[j];
    }
    const double scale = 1.0 + std::abs(row.rhs);
    bool bad = false;
    switch (row.relation) {
      case Relation::kLessEqual: bad = lhs > row.rhs + tol * scale; break;
      case Relation::kGreaterEqual: bad = lhs < row.rhs - tol * scale; break;
      case Relation::kEqual: bad = std::abs(lhs - row.rhs) > tol * scale; break;
    }
    if (bad) {
      std::ostringstream os;
      os.precision(12);
      os << "constraint " << i << ": lhs " << lhs << " vs rhs " << row.rhs;
      out.push_back(os.str());
    }
  }
  return out;
}

namespace detail {

class Tableau {
 public:
  Tableau(const LinearProgram& lp, const SolverOptions& opt)
      : opt_(opt), n_(lp.num_variables()) {
    // Rows: user constraints, then finite upper bounds.
    struct Row {
      std::vector<double> a;
      Relation rel;
      double b;
    };
    std::vector<Row> rows;
    rows.reserve(lp.constraints.size());
    for (const auto& c : lp.constraints) {
      double b = c.rhs;
      for (std::size_t j = 0; j < n_; ++j) b -= c.coeffs[j] * lp.bound(j).lo;
      rows.push_back({c.coeffs, c.relation, b});
    }
    num_user_rows_ = rows.size();
    for (std::size_t j = 0; j < n_; ++j) {
      const Bounds bd = lp.bound(j);
      if (std::isfinite(bd.hi)) {
        std::vector<double> a(n_, 0.0);
        a[j] = 1.0;
        rows.push_back({std::move(a), Relation::kLessEqual, bd.hi - bd.lo});
      }
    }
    m_ = rows.size();
    sign_.assign(m_, 1.0);
    for (std::size_t i = 0; i < m_; ++i) {
      if (rows[i].b < 0.0) {
        for (double& v : rows[i].a) v = -v;
        rows[i].b = -rows[i].b;
        sign_[i] = -1.0;
        if (rows[i].rel == Relation::kLessEqual) {
          rows[i].rel = Relation::kGreaterEqual;
        } else if (rows[i].rel == Relation::kGreaterEqual) {
          rows[i].rel = Relation::kLessEqual;
        }
      }
    }

    // Column layout: structural | slack/surplus | artificial | rhs.
    std::size_t num_slack = 0, num_art = 0;
    for (const auto& r : rows) {
      if (r.rel != Relation::kEqual) ++num_slack;
      if (r.rel != Relation::kLessEqual) ++num_art;
    }
    art_begin_ = n_ + num_slack;
    cols_ = art_begin_ + num_art;
    width_ = cols_ + 1;
    t_.assign(m_ * width_, 0.0);
    basis_.assign(m_, 0);
    id_col_.assign(m_, 0);

    std::size_t s = n_, a = art_begin_;
    for (std::size_t i = 0; i < m_; ++i) {
      double* r = &t_[i * width_];
      std::copy(rows[i].a.begin(), rows[i].a.end(), r);
      r[cols_] = rows[i].b;
      switch (rows[i].rel) {
        case Relation::kLessEqual:
          r[s] = 1.0;
          basis_[i] = id_col_[i] = s++;
          break;
        case Relation::kGreaterEqual:
          r[s++] = -1.0;
          r[a] = 1.0;
          basis_[i] = id_col_[i] = a++;
          break;
        case Relation::kEqual:
          r[a] = 1.0;
          basis_[i] = id_col_[i] = a++;
          break;
      }
    }

    cost_.assign(cols_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) cost_[j] = lp.objective[j];
    max_pivots_ = opt.max_pivots > 0
                      ? opt.max_pivots
                      : static_cast<long>(50 * (m_ + cols_) + 10000);
  }

  Status run() {
    // Phase 1: minimize the sum of artificials.
    if (art_begin_ < cols_) {
      std::vector<double> c1(cols_, 0.0);
      for (std::size_t j = art_begin_; j < cols_; ++j) c1[j] = 1.0;
      price(c1);
      optimize(c1, /*allow_artificial=*/true);
      double infeas = 0.0, scale = 1.0;
      for (std::size_t i = 0; i < m_; ++i) {
        scale = std::max(scale, std::abs(at(i, cols_)));
        if (basis_[i] >= art_begin_) infeas += at(i, cols_);
      }
      if (infeas > 1e-9 * scale) return Status::kInfeasible;
      drive_out_artificials();
    }
    // Re-price from scratch after each pass so that drift in the updated
    // reduced costs cannot end the search early.
    for (int pass = 0; pass < 3; ++pass) {
      price(cost_);
      if (!optimize(cost_, /*allow_artificial=*/false)) {
        return Status::kUnbounded;
      }
    }
    price(cost_);
    return Status::kOptimal;
  }

  void extract(const LinearProgram& lp, LpSolution& sol) const {
    sol.values.assign(n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) sol.values[basis_[i]] = at(i, cols_);
    }
    for (std::size_t j = 0; j < n_; ++j) {
      sol.values[j] = std::max(sol.values[j], 0.0) + lp.bound(j).lo;
    }
    sol.objective_value = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      sol.objective_value += lp.objective[j] * sol.values[j];
    }
    sol.duals.assign(num_user_rows_, 0.0);
    for (std::size_t i = 0; i < num_user_rows_; ++i) {
      double y = 0.0;
      for (std::size_t r = 0; r < m_; ++r) {
        y += cost_[basis_[r]] * at(r, id_col_[i]);
      }
      sol.duals[i] = sign_[i] * y;
    }
    sol.reduced_costs.assign(d_.begin(), d_.begin() + n_);
    sol.pivots = pivots_;
    sol.is_vertex = true;
  }

 private:
  double& at(std::size_t i, std::size_t j) { return t_[i * width_ + j]; }
  double at(std::size_t i, std::size_t j) const { return t_[i * width_ + j]; }

  // Reduced costs d = c - c_B' T for the current basis.
  void price(const std::vector<double>& c) {
    d_.assign(cols_, 0.0);
    for (std::size_t j = 0; j < cols_; ++j) d_[j] = c[j];
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = c[basis_[i]];
      if (cb == 0.0) continue;
      const double* r = &t_[i * width_];
      for (std::size_t j = 0; j < cols_; ++j) d_[j] -= cb * r[j];
    }
  }

  // Returns false on unboundedness.
  bool optimize(const std::vector<double>& c, bool allow_artificial) {
    const std::size_t limit = allow_artificial ? cols_ : art_begin_;
    bool bland = false;
    int streak = 0;
    for (;;) {
      std::size_t enter = cols_;
      if (bland) {
        for (std::size_t j = 0; j < limit; ++j) {
          if (d_[j] < -opt_.optimality_tol) {
            enter = j;
            break;
          }
        }
      } else {
        double best = -opt_.optimality_tol;
        for (std::size_t j = 0; j < limit; ++j) {
          if (d_[j] < best) {
            best = d_[j];
            enter = j;
          }
        }
      }
      if (enter == cols_) return true;

      std::size_t leave = m_;
      double best_ratio = 0.0, best_piv = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const double piv = at(i, enter);
        if (piv <= opt_.pivot_tol) continue;
        const double ratio = at(i, cols_) / piv;
        if (leave == m_ || ratio < best_ratio - 1e-12) {
          leave = i;
          best_ratio = ratio;
          best_piv = piv;
        } else if (ratio <= best_ratio + 1e-12) {
          const bool take = bland ? basis_[i] < basis_[leave] : piv > best_piv;
          if (take) {
            leave = i;
            best_ratio = std::min(ratio, best_ratio);
            best_piv = piv;
          }
        }
      }
      if (leave == m_) return false;

      if (best_ratio <= 1e-12) {
        if (++streak > opt_.degenerate_streak) bland = true;
      } else {
        streak = 0;
        bland = false;
      }
      pivot(leave, enter, c);
    }
  }

  void pivot(std::size_t r, std::size_t e, const std::vector<double>& c) {
    if (++pivots_ > max_pivots_) {
      throw StallError("simplex pivot limit exceeded");
    }
    double* pr = &t_[r * width_];
    const double inv = 1.0 / pr[e];
    nz_.clear();
    for (std::size_t j = 0; j < width_; ++j) {
      if (pr[j] != 0.0) {
        pr[j] *= inv;
        nz_.push_back(j);
      }
    }
    pr[e] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* pi = &t_[i * width_];
      const double f = pi[e];
      if (f == 0.0) continue;
      for (std::size_t j : nz_) {
        double v = pi[j] - f * pr[j];
        if (std::abs(v) < 1e-13) v = 0.0;
        pi[j] = v;
      }
      pi[e] = 0.0;
      if (pi[cols_] < 0.0 && pi[cols_] > -1e-11) pi[cols_] = 0.0;
    }
    const double f = d_[e];
    if (f != 0.0) {
      for (std::size_t j : nz_) {
        if (j < cols_) d_[j] -= f * pr[j];
      }
      d_[e] = 0.0;
    }
    basis_[r] = e;
    (void)c;
  }

  void drive_out_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < art_begin_) continue;
      std::size_t best = art_begin_;
      double best_abs = opt_.pivot_tol;
      for (std::size_t j = 0; j < art_begin_; ++j) {
        if (std::abs(at(i, j)) > best_abs) {
          best_abs = std::abs(at(i, j));
          best = j;
        }
      }
      // A row with no usable pivot is redundant; its artificial stays basic
      // at zero and never moves again.
      if (best < art_begin_) {
        at(i, cols_) = 0.0;
        pivot(i, best, cost_);
      }
    }
  }

  SolverOptions opt_;
  std::size_t n_ = 0, m_ = 0, num_user_rows_ = 0;
  std::size_t art_begin_ = 0, cols_ = 0, width_ = 0;
  std::vector<double> t_;
  std::vector<double> d_;
  std::vector<double> cost_;
  std::vector<double> sign_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> id_col_;
  std::vector<std::size_t> nz_;
  long pivots_ = 0;
  long max_pivots_ = 0;
};

}  // namespace detail

inline LpSolution solve(const LinearProgram& lp,
                        const SolverOptions& options = {}) {
  lp.validate();
  detail::Tableau tableau(lp, options);
  LpSolution sol;
  sol.status = tableau.run();
  if (sol.status != Status::kOptimal) return sol;
  tableau.extract(lp, sol);
  const auto violations =
      check_feasibility(lp, sol.values, options.feasibility_tol);
  if (!violations.empty()) {
    throw NumericalError("simplex returned an infeasible point: " +
                         violations.front());
  }
  return sol;
}

}  // namespace leakbound::lp

#endif  // LEAKBOUND_SIMPLEX_HPP_
