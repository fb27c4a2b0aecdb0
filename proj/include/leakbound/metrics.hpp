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

// Leakage metrics of a protection scheme: exponentiated maximal leakage,
// mult-leakage of an explicit secret, mutual information and channel
// capacity. Everything is reported in bits.

#ifndef LEAKBOUND_METRICS_HPP_
#define LEAKBOUND_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include "leakbound/core.hpp"

namespace leakbound {

// Joint distribution of a secret U and the intermediate X, given as p(u)
// and the row-stochastic p(x|u).
class SecretJoint {
 public:
  SecretJoint(Pmf pu, Matrix<double> x_given_u)
      : pu_(std::move(pu)), x_given_u_(std::move(x_given_u)) {
    if (x_given_u_.rows() != pu_.size()) {
      throw DimensionError("p(x|u) row count does not match p(u)");
    }
    for (std::size_t u = 0; u < x_given_u_.rows(); ++u) {
      double sum = 0.0;
      for (double v : x_given_u_.row(u)) {
        if (!(v >= 0.0)) throw InvalidArgument("p(x|u) has a negative entry");
        sum += v;
      }
      if (std::abs(sum - 1.0) > kRowSumTol) {
        std::ostringstream os;
        os << "p(x|u) row " << u << " sums to " << sum;
        throw InvalidArgument(os.str());
      }
    }
    (void)marginal();  // throws if the induced p(x) is not a pmf
  }

  const Pmf& pu() const { return pu_; }
  const Matrix<double>& x_given_u() const { return x_given_u_; }
  std::size_t num_secrets() const { return pu_.size(); }
  std::size_t num_inputs() const { return x_given_u_.cols(); }

  Pmf marginal() const {
    std::vector<double> px(x_given_u_.cols(), 0.0);
    for (std::size_t u = 0; u < x_given_u_.rows(); ++u) {
      for (std::size_t x = 0; x < px.size(); ++x) {
        px[x] += pu_[u] * x_given_u_(u, x);
      }
    }
    return Pmf(std::move(px));
  }

 private:
  Pmf pu_;
  Matrix<double> x_given_u_;
};

struct LeakageReport {
  double exp_leak = 1.0;
  double ml_bits = 0.0;
  double mi_bits = 0.0;
  double cc_bits = 0.0;
};

inline void check_input_size(const Pmf& px, const ProtectionScheme& scheme) {
  if (px.size() != scheme.rows()) {
    throw DimensionError("p(x) length does not match scheme rows");
  }
}

// Sum over y of the column maximum, taken over rows with p(x) > 0.
inline double exp_leak(const Pmf& px, const ProtectionScheme& scheme) {
  check_input_size(px, scheme);
  const auto support = px.support();
  if (support.empty()) throw InvalidArgument("p(x) has empty support");
  double total = 0.0;
  for (std::size_t y = 0; y < scheme.cols(); ++y) {
    double m = 0.0;
    for (std::size_t x : support) m = std::max(m, scheme(x, y));
    total += m;
  }
  return total;
}

inline double maximal_leakage_bits(const Pmf& px,
                                   const ProtectionScheme& scheme) {
  return std::log2(exp_leak(px, scheme));
}

// log2 of (MAP success after observing Y) / (blind-guess success).
inline double mult_leakage(const SecretJoint& joint,
                           const ProtectionScheme& scheme) {
  if (joint.num_inputs() != scheme.rows()) {
    throw DimensionError("secret joint alphabet does not match scheme rows");
  }
  const auto& pu = joint.pu();
  const auto& xu = joint.x_given_u();
  const std::size_t k = joint.num_secrets();
  const std::size_t n = scheme.cols();

  double informed = 0.0;
  for (std::size_t y = 0; y < n; ++y) {
    double best = 0.0;
    for (std::size_t u = 0; u < k; ++u) {
      double py_given_u = 0.0;
      for (std::size_t x = 0; x < scheme.rows(); ++x) {
        py_given_u += xu(u, x) * scheme(x, y);
      }
      best = std::max(best, pu[u] * py_given_u);
    }
    informed += best;
  }
  const double blind = *std::max_element(pu.probs().begin(), pu.probs().end());
  return std::log2(informed / blind);
}

// Uniform secret over `denominator` values, each mapped to one x, with
// round(p(x) * denominator) values per x.
inline SecretJoint shattering_joint(const Pmf& px, long long denominator) {
  if (denominator <= 0) throw InvalidArgument("denominator must be positive");
  const double d = static_cast<double>(denominator);
  std::vector<long long> counts(px.size());
  std::size_t worst = 0;
  double worst_err = 0.0;
  long long total = 0;
  for (std::size_t x = 0; x < px.size(); ++x) {
    const double scaled = px[x] * d;
    const double rounded = std::round(scaled);
    const double err = std::abs(scaled - rounded);
    if (err > worst_err) {
      worst_err = err;
      worst = x;
    }
    counts[x] = static_cast<long long>(rounded);
    total += counts[x];
  }
  if (worst_err > 1e-9) {
    std::ostringstream os;
    os << "p(x) is not representable with denominator " << denominator
       << ": x=" << worst << " gives " << px[worst] * d << " secret values";
    throw InvalidArgument(os.str());
  }
  if (total != denominator) {
    std::ostringstream os;
    os << "rounded counts sum to " << total << ", not " << denominator;
    throw InvalidArgument(os.str());
  }
  const auto k = static_cast<std::size_t>(denominator);
  Matrix<double> x_given_u(k, px.size(), 0.0);
  std::size_t u = 0;
  for (std::size_t x = 0; x < px.size(); ++x) {
    for (long long c = 0; c < counts[x]; ++c) x_given_u(u++, x) = 1.0;
  }
  return SecretJoint(Pmf(std::vector<double>(k, 1.0 / d)),
                     std::move(x_given_u));
}

namespace detail {

// I(X;Y) in bits for input weights r over the given rows.
inline double mutual_information_rows(std::span<const double> r,
                                      const ProtectionScheme& scheme) {
  const std::size_t n = scheme.cols();
  std::vector<double> py(n, 0.0);
  for (std::size_t x = 0; x < scheme.rows(); ++x) {
    if (r[x] == 0.0) continue;
    for (std::size_t y = 0; y < n; ++y) py[y] += r[x] * scheme(x, y);
  }
  double mi = 0.0;
  for (std::size_t x = 0; x < scheme.rows(); ++x) {
    if (r[x] == 0.0) continue;
    for (std::size_t y = 0; y < n; ++y) {
      const double p = scheme(x, y);
      if (p == 0.0) continue;  // 0 log 0 = 0
      mi += r[x] * p * std::log2(p / py[y]);
    }
  }
  return std::max(mi, 0.0);
}

}  // namespace detail

inline double mutual_information(const Pmf& px,
                                 const ProtectionScheme& scheme) {
  check_input_size(px, scheme);
  return detail::mutual_information_rows(px.probs(), scheme);
}

namespace detail {

// D(P_x || q) in bits for every row in `rows`, with q induced by r.
inline void row_divergences(const ProtectionScheme& scheme,
                            const std::vector<std::size_t>& rows,
                            const std::vector<double>& r,
                            std::vector<double>& q, std::vector<double>& div) {
  std::fill(q.begin(), q.end(), 0.0);
  for (std::size_t x : rows) {
    for (std::size_t y = 0; y < q.size(); ++y) q[y] += r[x] * scheme(x, y);
  }
  for (std::size_t x : rows) {
    double d = 0.0;
    for (std::size_t y = 0; y < q.size(); ++y) {
      const double p = scheme(x, y);
      if (p > 0.0) d += p * std::log2(p / q[y]);
    }
    div[x] = d;
  }
}

// Newton's method on D(P_x || q) = lambda over the candidate support, with
// sum r = 1. Rows that go negative are dropped and the solve restarts.
// Returns false when the system is singular or does not settle.
inline bool equalize_divergences(const ProtectionScheme& scheme,
                                 std::vector<std::size_t> support,
                                 std::vector<double>& r) {
  const std::size_t n = scheme.cols();
  std::vector<double> q(n), div(scheme.rows(), 0.0);
  constexpr double kLn2 = 0.69314718055994530942;
  // Identical rows make the system singular; one of them carries the weight.
  std::vector<std::size_t> distinct;
  for (std::size_t x : support) {
    bool repeat = false;
    for (std::size_t d : distinct) {
      bool same = true;
      for (std::size_t y = 0; y < n && same; ++y) same = scheme(x, y) == scheme(d, y);
      if (same) {
        repeat = true;
        break;
      }
    }
    if (!repeat) distinct.push_back(x);
  }
  support = std::move(distinct);
  while (!support.empty()) {
    std::vector<double> t(scheme.rows(), 0.0);
    double z = 0.0;
    for (std::size_t x : support) z += (t[x] = std::max(r[x], 1e-12));
    for (std::size_t x : support) t[x] /= z;
    const std::size_t k = support.size();
    bool dropped = false, settled = false;
    for (int it = 0; it < 50 && !dropped; ++it) {
      row_divergences(scheme, support, t, q, div);
      double lambda = 0.0;
      for (std::size_t x : support) lambda += t[x] * div[x];
      double resid = 0.0;
      for (std::size_t x : support) resid = std::max(resid, std::abs(div[x] - lambda));
      if (resid < 1e-13) {
        settled = true;
        break;
      }
      // Unknowns: t over the support, then lambda.
      Matrix<double> a(k + 1, k + 2, 0.0);
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
          double v = 0.0;
          for (std::size_t y = 0; y < n; ++y) {
            if (q[y] > 0.0) {
              v += scheme(support[i], y) * scheme(support[j], y) / q[y];
            }
          }
          a(i, j) = -v / kLn2;
        }
        a(i, k) = -1.0;
        a(i, k + 1) = -(div[support[i]] - lambda);
        a(k, i) = 1.0;
      }
      a(k, k + 1) = 0.0;
      // Gaussian elimination with partial pivoting.
      for (std::size_t c = 0; c <= k; ++c) {
        std::size_t piv = c;
        for (std::size_t i = c + 1; i <= k; ++i) {
          if (std::abs(a(i, c)) > std::abs(a(piv, c))) piv = i;
        }
        if (std::abs(a(piv, c)) < 1e-12) return false;
        for (std::size_t j = 0; j < k + 2; ++j) std::swap(a(c, j), a(piv, j));
        for (std::size_t i = 0; i <= k; ++i) {
          if (i == c || a(i, c) == 0.0) continue;
          const double f = a(i, c) / a(c, c);
          for (std::size_t j = c; j < k + 2; ++j) a(i, j) -= f * a(c, j);
        }
      }
      std::size_t worst = k;
      double worst_val = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const double next = t[support[i]] + a(i, k + 1) / a(i, i);
        if (next <= 0.0 && next < worst_val) {
          worst = i;
          worst_val = next;
        }
        t[support[i]] = next;
      }
      if (worst < k) {
        support.erase(support.begin() + static_cast<std::ptrdiff_t>(worst));
        dropped = true;
      }
    }
    if (dropped) continue;
    if (!settled) return false;
    std::fill(r.begin(), r.end(), 0.0);
    for (std::size_t x : support) r[x] = t[x];
    return true;
  }
  return false;
}

}  // namespace detail

inline constexpr double kCapacityTol = 1e-9;
inline constexpr long kCapacityMaxIters = 100000;

// max over input pmfs supported on `support_mask` of I(X;Y), by alternating
// maximization. Stops once max_x D(P_x || q) - I(r) <= tol; that gap bounds
// the distance to capacity.
inline double channel_capacity(const ProtectionScheme& scheme,
                               const std::vector<bool>& support_mask,
                               double tol = kCapacityTol,
                               long max_iters = kCapacityMaxIters) {
  if (support_mask.size() != scheme.rows()) {
    throw DimensionError("support mask length does not match scheme rows");
  }
  std::vector<std::size_t> rows;
  for (std::size_t x = 0; x < support_mask.size(); ++x) {
    if (support_mask[x]) rows.push_back(x);
  }
  if (rows.empty()) throw InvalidArgument("support mask is empty");

  const std::size_t n = scheme.cols();
  std::vector<double> r(scheme.rows(), 0.0);
  for (std::size_t x : rows) r[x] = 1.0 / static_cast<double>(rows.size());
  std::vector<double> q(n), div(scheme.rows(), 0.0);

  // Over-relaxed updates r *= 2^(mu * div): mu grows while I(r) keeps
  // rising and drops back to 1, the plain alternating step, when it falls.
  double best = 0.0, prev_lower = -1.0, mu = 1.0;
  bool relaxed = false;
  std::vector<double> r_prev = r;
  std::vector<double> div_prev(scheme.rows(), 0.0);
  double upper_prev = 0.0;
  auto bounds = [&](const std::vector<double>& w, double& lower,
                    double& upper) {
    detail::row_divergences(scheme, rows, w, q, div);
    lower = 0.0;
    upper = 0.0;
    for (std::size_t x : rows) {
      lower += w[x] * div[x];
      upper = std::max(upper, div[x]);
    }
  };
  for (long iter = 0; iter < max_iters; ++iter) {
    double lower = 0.0, upper = 0.0;
    bounds(r, lower, upper);
    // Plain and relaxed steps alike converge slowly when an input with zero
    // optimal weight sits at the capacity. Every 64 steps, try solving for
    // the point where the likely support has equal divergences.
    if (iter % 64 == 63 && upper - lower > tol) {
      std::vector<std::size_t> support;
      for (std::size_t x : rows) {
        if (div[x] >= lower - (upper - lower)) support.push_back(x);
      }
      std::vector<double> polished = r;
      if (detail::equalize_divergences(scheme, support, polished)) {
        double pl = 0.0, pu = 0.0;
        bounds(polished, pl, pu);
        if (pu - pl <= tol) return std::max(pl, 0.0);
        bounds(r, lower, upper);
      }
    }
    best = std::max(best, lower);
    if (upper - lower <= tol) return std::max(lower, 0.0);
    if (relaxed && lower < prev_lower) {
      // Retake the last step without relaxation.
      r = r_prev;
      div = div_prev;
      upper = upper_prev;
      mu = 1.0;
    } else {
      r_prev = r;
      div_prev = div;
      upper_prev = upper;
      prev_lower = lower;
    }
    double z = 0.0;
    for (std::size_t x : rows) {
      r[x] *= std::exp2(mu * (div[x] - upper));
      z += r[x];
    }
    for (std::size_t x : rows) r[x] /= z;
    relaxed = mu > 1.0;
    mu = std::min(mu * 1.5, 1e4);
  }
  throw NumericalError("channel capacity did not converge", best);
}

inline std::vector<bool> support_mask(const Pmf& px) {
  std::vector<bool> mask(px.size());
  for (std::size_t x = 0; x < px.size(); ++x) mask[x] = px[x] > 0.0;
  return mask;
}

inline LeakageReport leakage_report(const Pmf& px,
                                    const ProtectionScheme& scheme) {
  LeakageReport rep;
  rep.exp_leak = exp_leak(px, scheme);
  rep.ml_bits = std::log2(rep.exp_leak);
  rep.mi_bits = mutual_information(px, scheme);
  rep.cc_bits = channel_capacity(scheme, support_mask(px));
  return rep;
}

}  // namespace leakbound

#endif  // LEAKBOUND_METRICS_HPP_
