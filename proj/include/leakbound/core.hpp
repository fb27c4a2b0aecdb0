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

// Domain types shared by every module: input distributions, cost matrices,
// protection schemes (row-stochastic transition matrices) and channels.

#ifndef LEAKBOUND_CORE_HPP_
#define LEAKBOUND_CORE_HPP_

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace leakbound {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Tolerances.
inline constexpr double kPmfSumTol = 1e-12;
inline constexpr double kRowSumTol = 1e-9;
inline constexpr double kEntryTol = 1e-9;

//------------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A documented precondition on the arguments does not hold.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A scheme puts positive mass on an infinite-cost cell.
class InfiniteCostError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what,
                           std::optional<double> min_cost = std::nullopt)
      : Error(what), min_cost_(min_cost) {}
  // Smallest achievable total cost, when the infeasibility is a budget issue.
  std::optional<double> min_cost() const { return min_cost_; }

 private:
  std::optional<double> min_cost_;
};

// Iterative routine ran out of its iteration/pivot allowance.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what,
                          std::optional<double> best_value = std::nullopt)
      : Error(what), best_value_(best_value) {}
  std::optional<double> best_value() const { return best_value_; }

 private:
  std::optional<double> best_value_;
};

// A proven property of an algorithm was violated at runtime.
class InternalError : public Error {
 public:
  using Error::Error;
};

//------------------------------------------------------------------------------
// Matrix

// Dense row-major matrix with value semantics.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<T>> init) {
    rows_ = init.size();
    cols_ = rows_ == 0 ? 0 : init.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : init) {
      if (r.size() != cols_) throw DimensionError("ragged matrix initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }
  static Matrix from_rows(const std::vector<std::vector<T>>& rows) {
    Matrix m;
    m.rows_ = rows.size();
    m.cols_ = rows.empty() ? 0 : rows.front().size();
    m.data_.reserve(m.rows_ * m.cols_);
    for (const auto& r : rows) {
      if (r.size() != m.cols_) throw DimensionError("ragged matrix rows");
      m.data_.insert(m.data_.end(), r.begin(), r.end());
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<std::vector<T>> to_rows() const {
    std::vector<std::vector<T>> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
      out[r].assign(row(r).begin(), row(r).end());
    }
    return out;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

//------------------------------------------------------------------------------
// Pmf

// Probability mass function over an index-ordered alphabet. Labels are
// display metadata (cycle counts, packet sizes) and never affect the math.
class Pmf {
 public:
  explicit Pmf(std::vector<double> probs, std::vector<double> labels = {})
      : probs_(std::move(probs)), labels_(std::move(labels)) {
    if (probs_.empty()) throw InvalidArgument("pmf is empty");
    if (!labels_.empty() && labels_.size() != probs_.size()) {
      throw DimensionError("pmf labels length does not match probabilities");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
      if (!(probs_[i] >= 0.0) || !std::isfinite(probs_[i])) {
        std::ostringstream os;
        os << "pmf entry " << i << " is not a nonnegative number";
        throw InvalidArgument(os.str());
      }
      sum += probs_[i];
    }
    if (std::abs(sum - 1.0) > kPmfSumTol) {
      std::ostringstream os;
      os.precision(17);
      os << "pmf sums to " << sum << ", not 1";
      throw InvalidArgument(os.str());
    }
  }

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  const std::vector<double>& probs() const { return probs_; }
  const std::vector<double>& labels() const { return labels_; }
  bool has_labels() const { return !labels_.empty(); }

  // Indices with strictly positive probability.
  std::vector<std::size_t> support() const {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
      if (probs_[i] > 0.0) s.push_back(i);
    }
    return s;
  }

 private:
  std::vector<double> probs_;
  std::vector<double> labels_;
};

//------------------------------------------------------------------------------
// CostMatrix

// c(x, y) in [0, +inf]; an infinite entry marks an illegal mapping.
class CostMatrix {
 public:
  explicit CostMatrix(Matrix<double> entries) : entries_(std::move(entries)) {
    if (entries_.rows() == 0 || entries_.cols() == 0) {
      throw InvalidArgument("cost matrix must be at least 1x1");
    }
    for (std::size_t x = 0; x < entries_.rows(); ++x) {
      bool any_finite = false;
      for (std::size_t y = 0; y < entries_.cols(); ++y) {
        const double c = entries_(x, y);
        if (std::isnan(c) || c < 0.0) {
          std::ostringstream os;
          os << "cost (" << x << "," << y << ") is negative or NaN";
          throw InvalidArgument(os.str());
        }
        any_finite = any_finite || std::isfinite(c);
      }
      if (!any_finite) {
        std::ostringstream os;
        os << "cost row " << x << " has no finite entry";
        throw InvalidArgument(os.str());
      }
    }
  }
  CostMatrix(std::initializer_list<std::initializer_list<double>> init)
      : CostMatrix(Matrix<double>(init)) {}

  std::size_t rows() const { return entries_.rows(); }
  std::size_t cols() const { return entries_.cols(); }
  double operator()(std::size_t x, std::size_t y) const {
    return entries_(x, y);
  }
  bool is_finite(std::size_t x, std::size_t y) const {
    return std::isfinite(entries_(x, y));
  }
  const Matrix<double>& entries() const { return entries_; }

 private:
  Matrix<double> entries_;
};

//------------------------------------------------------------------------------
// ProtectionScheme

// M x N matrix of p(y|x). Construction does not validate; use
// validate_scheme() against a channel to check the stochastic invariants.
class ProtectionScheme {
 public:
  ProtectionScheme() = default;
  explicit ProtectionScheme(Matrix<double> rows) : rows_(std::move(rows)) {}
  ProtectionScheme(std::initializer_list<std::initializer_list<double>> init)
      : rows_(init) {}

  static ProtectionScheme zeros(std::size_t m, std::size_t n) {
    return ProtectionScheme(Matrix<double>(m, n, 0.0));
  }
  static ProtectionScheme identity(std::size_t n) {
    Matrix<double> m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return ProtectionScheme(std::move(m));
  }
  // Deterministic scheme sending row x to column target[x].
  static ProtectionScheme from_mapping(const std::vector<std::size_t>& target,
                                       std::size_t n) {
    Matrix<double> m(target.size(), n, 0.0);
    for (std::size_t x = 0; x < target.size(); ++x) m(x, target[x]) = 1.0;
    return ProtectionScheme(std::move(m));
  }
  // lambda * a + (1 - lambda) * b.
  static ProtectionScheme blend(double lambda, const ProtectionScheme& a,
                                const ProtectionScheme& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
      throw DimensionError("blend of schemes with different shapes");
    }
    Matrix<double> m(a.rows(), a.cols());
    for (std::size_t x = 0; x < a.rows(); ++x) {
      for (std::size_t y = 0; y < a.cols(); ++y) {
        m(x, y) = lambda * a(x, y) + (1.0 - lambda) * b(x, y);
      }
    }
    return ProtectionScheme(std::move(m));
  }

  std::size_t rows() const { return rows_.rows(); }
  std::size_t cols() const { return rows_.cols(); }
  double& operator()(std::size_t x, std::size_t y) { return rows_(x, y); }
  double operator()(std::size_t x, std::size_t y) const { return rows_(x, y); }
  std::span<const double> row(std::size_t x) const { return rows_.row(x); }
  const Matrix<double>& matrix() const { return rows_; }

  friend bool operator==(const ProtectionScheme&,
                         const ProtectionScheme&) = default;

 private:
  Matrix<double> rows_;
};

//------------------------------------------------------------------------------
// Channel

// Fixed problem data of an optimization instance: p(x) and c(x, y).
class Channel {
 public:
  Channel(Pmf px, CostMatrix cost, std::vector<double> y_labels = {})
      : px_(std::move(px)), cost_(std::move(cost)),
        y_labels_(std::move(y_labels)) {
    if (px_.size() != cost_.rows()) {
      throw DimensionError("p(x) length does not match cost matrix rows");
    }
    if (!y_labels_.empty() && y_labels_.size() != cost_.cols()) {
      throw DimensionError("y labels length does not match cost columns");
    }
  }

  const Pmf& px() const { return px_; }
  const CostMatrix& cost() const { return cost_; }
  const std::vector<double>& y_labels() const { return y_labels_; }
  std::size_t num_inputs() const { return cost_.rows(); }
  std::size_t num_outputs() const { return cost_.cols(); }

 private:
  Pmf px_;
  CostMatrix cost_;
  std::vector<double> y_labels_;
};

//------------------------------------------------------------------------------
// Operations

struct Violation {
  enum class Kind { kEntryOutOfRange, kRowSum, kInfiniteCostMass };
  Kind kind;
  std::size_t x = 0;
  std::size_t y = 0;  // unused for kRowSum
  std::string message;
};

inline void check_same_shape(const Channel& channel,
                             const ProtectionScheme& scheme) {
  if (scheme.rows() != channel.num_inputs() ||
      scheme.cols() != channel.num_outputs()) {
    std::ostringstream os;
    os << "scheme is " << scheme.rows() << "x" << scheme.cols()
       << " but channel is " << channel.num_inputs() << "x"
       << channel.num_outputs();
    throw DimensionError(os.str());
  }
}

// Returns the first violated invariant in row-major order, or nullopt.
// Indices in the report are 0-based.
inline std::optional<Violation> validate_scheme(const Channel& channel,
                                                const ProtectionScheme& scheme) {
  check_same_shape(channel, scheme);
  const auto& cost = channel.cost();
  for (std::size_t x = 0; x < scheme.rows(); ++x) {
    double sum = 0.0;
    for (std::size_t y = 0; y < scheme.cols(); ++y) {
      const double p = scheme(x, y);
      if (!(p >= 0.0 && p <= 1.0)) {
        std::ostringstream os;
        os << "entry (" << x << "," << y << ") = " << p << " outside [0,1]";
        return Violation{Violation::Kind::kEntryOutOfRange, x, y, os.str()};
      }
      if (p > 0.0 && !cost.is_finite(x, y)) {
        std::ostringstream os;
        os << "mass on infinite-cost cell (" << x << "," << y << ")";
        return Violation{Violation::Kind::kInfiniteCostMass, x, y, os.str()};
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTol) {
      std::ostringstream os;
      os << "row " << x << " sums to " << sum;
      return Violation{Violation::Kind::kRowSum, x, 0, os.str()};
    }
  }
  return std::nullopt;
}

// Sum over x,y of p(x) c(x,y) p_xy. Cells with p_xy == 0 are skipped, so
// an infinite cost on an unused cell contributes nothing.
inline double total_cost(const Channel& channel,
                         const ProtectionScheme& scheme) {
  check_same_shape(channel, scheme);
  const auto& px = channel.px();
  const auto& cost = channel.cost();
  double total = 0.0;
  for (std::size_t x = 0; x < scheme.rows(); ++x) {
    for (std::size_t y = 0; y < scheme.cols(); ++y) {
      const double p = scheme(x, y);
      if (p == 0.0) continue;
      if (!cost.is_finite(x, y)) {
        std::ostringstream os;
        os << "mass " << p << " on infinite-cost cell (" << x << "," << y
           << ")";
        throw InfiniteCostError(os.str());
      }
      total += px[x] * cost(x, y) * p;
    }
  }
  return total;
}

// Infinities propagate down each column, and finite entries of each row are
// nondecreasing left to right.
inline bool is_staircase_nondecreasing(const CostMatrix& cost) {
  for (std::size_t y = 0; y < cost.cols(); ++y) {
    bool seen_inf = false;
    for (std::size_t x = 0; x < cost.rows(); ++x) {
      if (!cost.is_finite(x, y)) {
        seen_inf = true;
      } else if (seen_inf) {
        return false;
      }
    }
  }
  for (std::size_t x = 0; x < cost.rows(); ++x) {
    bool seen_finite = false;
    double prev = 0.0;
    for (std::size_t y = 0; y < cost.cols(); ++y) {
      const double c = cost(x, y);
      if (std::isfinite(c)) {
        if (seen_finite && c < prev) return false;
        seen_finite = true;
        prev = c;
      } else if (seen_finite) {
        return false;
      }
    }
  }
  return true;
}

inline bool is_deterministic(const ProtectionScheme& scheme,
                             double tol = kEntryTol) {
  for (std::size_t x = 0; x < scheme.rows(); ++x) {
    for (double p : scheme.row(x)) {
      if (std::abs(p) > tol && std::abs(p - 1.0) > tol) return false;
    }
  }
  return true;
}

// Row x's index of the cheapest finite column (lowest index on ties).
inline std::size_t cheapest_column(const CostMatrix& cost, std::size_t x) {
  std::size_t best = cost.cols();
  for (std::size_t y = 0; y < cost.cols(); ++y) {
    if (!cost.is_finite(x, y)) continue;
    if (best == cost.cols() || cost(x, y) < cost(x, best)) best = y;
  }
  return best;
}

// Sum over x of p(x) * min_y c(x, y): the cost of the cheapest scheme.
inline double min_achievable_cost(const Channel& channel) {
  double total = 0.0;
  for (std::size_t x = 0; x < channel.num_inputs(); ++x) {
    const double p = channel.px()[x];
    if (p == 0.0) continue;
    total += p * channel.cost()(x, cheapest_column(channel.cost(), x));
  }
  return total;
}

}  // namespace leakbound

#endif  // LEAKBOUND_CORE_HPP_
