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

// Instance builders: binary symmetric channel, binomial-noise timing
// channel for square-and-multiply, width extension over a label set, and
// random staircase instances.

#ifndef LEAKBOUND_CASEGEN_HPP_
#define LEAKBOUND_CASEGEN_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "leakbound/core.hpp"

namespace leakbound {

struct BscCase {
  Pmf px;
  ProtectionScheme scheme;
};

inline BscCase bsc(double p) {
  if (!(p >= 0.0 && p <= 0.5)) {
    throw InvalidArgument("BSC flip probability must lie in [0, 0.5]");
  }
  return {Pmf({0.5, 0.5}), ProtectionScheme{{1.0 - p, p}, {p, 1.0 - p}}};
}

// Binomial(n, prob) pmf over 0..n.
inline std::vector<double> binomial_pmf(long n, double prob) {
  if (n < 0) throw InvalidArgument("binomial size must be nonnegative");
  if (!(prob >= 0.0 && prob <= 1.0)) {
    throw InvalidArgument("binomial probability must lie in [0, 1]");
  }
  std::vector<double> out(static_cast<std::size_t>(n) + 1, 0.0);
  if (prob == 0.0 || prob == 1.0) {
    out[prob == 0.0 ? 0 : out.size() - 1] = 1.0;
    return out;
  }
  if (prob == 0.5 && n <= 50) {
    // Exact: binomial coefficients stay below 2^53.
    double c = 1.0;
    const double scale = std::ldexp(1.0, static_cast<int>(-n));
    for (long k = 0; k <= n; ++k) {
      out[k] = c * scale;
      c = c * static_cast<double>(n - k) / static_cast<double>(k + 1);
    }
    return out;
  }
  const double lp = std::log(prob), lq = std::log1p(-prob);
  const double ln = std::lgamma(static_cast<double>(n) + 1.0);
  for (long k = 0; k <= n; ++k) {
    const double lc = ln - std::lgamma(static_cast<double>(k) + 1.0) -
                      std::lgamma(static_cast<double>(n - k) + 1.0);
    out[k] = std::exp(lc + k * lp + (n - k) * lq);
  }
  double sum = 0.0;
  for (double v : out) sum += v;
  for (double& v : out) v /= sum;
  return out;
}

struct BinomialNoiseSpec {
  long size = 0;               // m
  double success_prob = 0.5;
  double per_unit_cost = 1.0;  // K, cost per unit of added delay
};

struct TimingCase {
  Channel channel;
  ProtectionScheme scheme;
};

// X = key weight ~ Binomial(n, 1/2) over 0..n, Y = X + Z with Z ~
// Binomial(m, prob), cost K * (y - x) for y >= x.
inline TimingCase square_multiply_channel(long key_bits,
                                          const BinomialNoiseSpec& noise) {
  if (key_bits < 1) throw InvalidArgument("key_bits must be at least 1");
  if (noise.size < 0) throw InvalidArgument("noise size must be nonnegative");
  if (!(noise.per_unit_cost > 0.0)) {
    throw InvalidArgument("per-unit cost must be positive");
  }
  const std::size_t m_in = static_cast<std::size_t>(key_bits) + 1;
  const std::size_t n_out = m_in + static_cast<std::size_t>(noise.size);
  const auto z = binomial_pmf(noise.size, noise.success_prob);

  std::vector<double> x_labels(m_in), y_labels(n_out);
  for (std::size_t i = 0; i < m_in; ++i) x_labels[i] = static_cast<double>(i);
  for (std::size_t i = 0; i < n_out; ++i) y_labels[i] = static_cast<double>(i);

  Matrix<double> cost(m_in, n_out, kInfinity);
  Matrix<double> p(m_in, n_out, 0.0);
  for (std::size_t x = 0; x < m_in; ++x) {
    for (std::size_t y = x; y < n_out; ++y) {
      cost(x, y) = noise.per_unit_cost * static_cast<double>(y - x);
    }
    for (std::size_t k = 0; k < z.size(); ++k) p(x, x + k) = z[k];
  }
  Pmf px(binomial_pmf(key_bits, 0.5), std::move(x_labels));
  return {Channel(std::move(px), CostMatrix(std::move(cost)),
                  std::move(y_labels)),
          ProtectionScheme(std::move(p))};
}

struct ExtensionSpec {
  long width = 0;  // w
};

struct ExtensionCase {
  std::vector<double> y_labels;
  ProtectionScheme scheme;
  CostMatrix cost;
};

// Most frequent gap between consecutive labels; ties go to the smaller gap.
inline double most_common_gap(const std::vector<double>& labels) {
  std::map<double, int> counts;
  for (std::size_t i = 1; i < labels.size(); ++i) {
    ++counts[labels[i] - labels[i - 1]];
  }
  double gap = 0.0;
  int best = 0;
  for (const auto& [g, c] : counts) {
    if (c > best) {
      best = c;
      gap = g;
    }
  }
  return gap;
}

// Y is X extended by w labels at the most common gap; x moves z positions
// up with probability Binomial(w, 1/2)(z). Cost is label distance.
inline ExtensionCase extension_scheme(const std::vector<double>& x_labels,
                                      const ExtensionSpec& spec) {
  if (spec.width < 0) throw InvalidArgument("width must be nonnegative");
  if (x_labels.empty()) throw InvalidArgument("label set is empty");
  for (std::size_t i = 1; i < x_labels.size(); ++i) {
    if (!(x_labels[i] > x_labels[i - 1])) {
      throw InvalidArgument("labels must be strictly increasing");
    }
  }
  if (spec.width > 0 && x_labels.size() < 2) {
    throw InvalidArgument("extension needs at least two labels");
  }
  const std::size_t m = x_labels.size();
  const auto w = static_cast<std::size_t>(spec.width);
  std::vector<double> y = x_labels;
  if (w > 0) {
    const double gap = most_common_gap(x_labels);
    for (std::size_t k = 1; k <= w; ++k) {
      y.push_back(x_labels.back() + gap * static_cast<double>(k));
    }
  }
  const auto z = binomial_pmf(spec.width, 0.5);
  Matrix<double> p(m, y.size(), 0.0), cost(m, y.size(), kInfinity);
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t k = 0; k <= w; ++k) p(x, x + k) = z[k];
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[j] >= x_labels[x]) cost(x, j) = y[j] - x_labels[x];
    }
  }
  return {std::move(y), ProtectionScheme(std::move(p)),
          CostMatrix(std::move(cost))};
}

// Random full-support pmf with a staircase-nondecreasing cost. The first
// finite column of each row is nondecreasing down the rows and the last
// column is finite everywhere.
inline Channel random_instance(std::size_t M, std::size_t N,
                               std::uint64_t seed) {
  if (M < 1 || N < 1) throw InvalidArgument("dimensions must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<double> w(M);
  double total = 0.0;
  for (double& v : w) {
    v = weight(rng);
    total += v;
  }
  for (double& v : w) v /= total;

  Matrix<double> cost(M, N, kInfinity);
  std::size_t frontier = 0;
  for (std::size_t x = 0; x < M; ++x) {
    // Advance the frontier by 0 or 1 column, never past the last column.
    if (x > 0 && frontier + 1 < N && unit(rng) < 0.5) ++frontier;
    double c = std::floor(unit(rng) * 3.0);
    for (std::size_t y = frontier; y < N; ++y) {
      cost(x, y) = c;
      c += std::floor(unit(rng) * 4.0);  // increments in {0,1,2,3}
    }
  }
  return Channel(Pmf(std::move(w)), CostMatrix(std::move(cost)));
}

}  // namespace leakbound

#endif  // LEAKBOUND_CASEGEN_HPP_
