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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// line fails. Every tolerance and time limit is a named constant below.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "leakbound/io.hpp"
#include "leakbound/leakbound.hpp"
#include "oracles.hpp"

namespace {

using namespace leakbound;

constexpr double kTolEndpoints = 1e-9;
constexpr double kTolInterior = 1e-6;
constexpr double kTolLp = 1e-6;
constexpr double kTolPrinted = 1e-6;    // printed matrices carry 4 digits
constexpr double kTolLambda = 1e-9;
constexpr double kMiSlack = 1e-3;
constexpr double kTolHull = 1e-6;
constexpr double kTolLagrangian = 1e-7;
constexpr double kTolWaterFill = 1e-9;
constexpr double kTolSubmodular = 1e-9;
constexpr double kTolSqmCost = 1e-12;
constexpr double kTolSqmLeak = 1e-9;
constexpr double kTolOrdering = 1e-6;
constexpr double kTolShatter = 1e-9;

constexpr double kLimitC1 = 1.0;   // seconds
constexpr double kLimitC3 = 5.0;
constexpr double kLimitC4 = 30.0;
constexpr double kLimitC10 = 60.0;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

//------------------------------------------------------------------------------

Outcome bsc_endpoints() {
  Outcome o;
  for (double p : {0.0, 0.5}) {
    const auto c = bsc(p);
    const auto r = leakage_report(c.px, c.scheme);
    const double want = p == 0.0 ? 1.0 : 0.0;
    o.require(std::abs(r.ml_bits - want) <= kTolEndpoints,
              "p=" + num(p) + " ML " + num(r.ml_bits));
    o.require(std::abs(r.mi_bits - want) <= kTolEndpoints,
              "p=" + num(p) + " MI " + num(r.mi_bits));
    o.require(std::abs(r.cc_bits - want) <= kTolEndpoints,
              "p=" + num(p) + " CC " + num(r.cc_bits));
  }
  return o;
}

Outcome bsc_interior() {
  Outcome o;
  const auto c = bsc(0.25);
  const auto r = leakage_report(c.px, c.scheme);
  const double ml = std::log2(1.5);
  const double mi = 1.0 - oracle::h2(0.25);
  o.require(std::abs(r.ml_bits - ml) <= kTolInterior, "ML " + num(r.ml_bits));
  o.require(std::abs(r.mi_bits - mi) <= kTolInterior, "MI " + num(r.mi_bits));
  o.require(std::abs(r.cc_bits - mi) <= kTolInterior, "CC " + num(r.cc_bits));
  if (o.pass) o.detail = "ML " + num(r.ml_bits) + ", MI = CC " + num(r.mi_bits);
  return o;
}

Outcome four_by_four() {
  Outcome o;
  const auto ch = oracle::four_by_four();
  const auto pts = oracle::enumerate_deterministic(ch);
  o.require(pts.size() <= 256, "enumeration produced " + std::to_string(pts.size()));

  // The enumeration oracle gives 2.8 at L=1, not the 2.2 listed with the
  // criterion: a single column must be y=4 (the only finite column for x=4),
  // costing .4*3 + .2*2 + .2*1 + .2*0 = 1.8 above the identity's 1.0.
  const double oracle_costs[4] = {oracle::best_deterministic(pts, 1),
                                  oracle::best_deterministic(pts, 2),
                                  oracle::best_deterministic(pts, 3),
                                  oracle::best_deterministic(pts, 4)};
  const double expected[4] = {2.8, 1.6, 1.2, 1.0};
  for (int i = 0; i < 4; ++i) {
    o.require(std::abs(oracle_costs[i] - expected[i]) <= kTolLp,
              "oracle corner " + std::to_string(i + 1) + " " + num(oracle_costs[i]));
  }
  const auto corners = deterministic_corners(ch, 4);
  o.require(corners.size() == 4, "library found " + std::to_string(corners.size()) +
                                     " corners");
  for (std::size_t i = 0; i < corners.size() && i < 4; ++i) {
    o.require(corners[i].L == static_cast<int>(i + 1) &&
                  std::abs(corners[i].cost - oracle_costs[i]) <= kTolLp,
              "library corner " + std::to_string(i + 1) + " " + num(corners[i].cost));
  }

  const auto lp = min_cost_for_leak(ch, 2.25);
  o.require(std::abs(lp.cost - 1.5) <= kTolLp, "LP at 2.25 gives " + num(lp.cost));

  const auto printed = oracle::printed_ml_scheme();
  const double pl = exp_leak(ch.px(), printed);
  const double pc = total_cost(ch, printed);
  o.require(std::abs(pl - 2.25) <= kTolPrinted, "printed exp-leak " + num(pl));
  o.require(std::abs(pc - 1.5) <= kTolPrinted, "printed cost " + num(pc));

  const auto mix = build_curve(ch).query(2.25);
  const auto listed_l3 = ProtectionScheme::from_mapping({0, 1, 3, 3}, 4);
  o.require(std::abs(mix.lambda - 0.75) <= kTolLambda, "lambda " + num(mix.lambda));
  o.require(mix.L1 == 2.0 && std::abs(mix.C1 - 1.6) <= kTolLp,
            "first component (" + num(mix.L1) + ", " + num(mix.C1) + ")");
  o.require(mix.p2 == listed_l3, "second component is not the listed L=3 scheme");
  const auto split = split_once(ch, printed);
  o.require(std::abs(split.lambda - 0.25) <= kTolLambda && split.plus == listed_l3,
            "Q split of the printed scheme: lambda " + num(split.lambda));

  const double printed_mi = oracle::mi_bits(ch.px().probs(), oracle::printed_mi_scheme());
  const auto mi = mi_optimal_scheme(ch, 1.5);
  o.require(mi.mi_bits <= printed_mi + kMiSlack,
            "MI optimum " + num(mi.mi_bits) + " vs printed " + num(printed_mi));
  o.detail += std::string(o.detail.empty() ? "" : "; ") +
              "L=1 corner is 2.8 by enumeration (2.2 listed is inconsistent); MI " +
              num(mi.mi_bits) + " <= printed " + num(printed_mi);
  return o;
}

Outcome hull_equivalence() {
  Outcome o;
  std::mt19937_64 rng(4242);
  int instances = 0, checks = 0;
  double worst = 0.0;
  for (int s = 0; instances < 24; ++s) {
    const std::size_t M = 2 + s % 3, N = 2 + (s / 3) % 3;
    const auto ch = random_instance(M, N, 9000 + s);
    const auto pts = oracle::enumerate_deterministic(ch);
    std::uniform_real_distribution<double> u(1.0, static_cast<double>(N));
    for (int k = 0; k < 10; ++k) {
      const double L = u(rng);
      const double got = min_cost_for_leak(ch, L).cost;
      const double want = oracle::hull_at(pts, L);
      worst = std::max(worst, std::abs(got - want));
      o.require(std::abs(got - want) <= kTolHull,
                "seed " + std::to_string(s) + " L " + num(L) + ": " + num(got) +
                    " vs " + num(want));
      ++checks;
    }
    ++instances;
  }
  if (o.pass) {
    o.detail = std::to_string(instances) + " instances, " + std::to_string(checks) +
               " bounds, max deviation " + num(worst);
  }
  return o;
}

struct OptimizingInput {
  Channel channel;
  ProtectionScheme scheme;
  double alpha;
};

// LP vertex optima at fractional L between two hull vertices; alpha is the
// hull slope there, which makes the vertex a minimizer of cost + alpha*leak.
std::vector<OptimizingInput> optimizing_inputs(int want) {
  std::vector<OptimizingInput> out;
  std::mt19937_64 rng(707);
  for (int s = 0; static_cast<int>(out.size()) < want && s < 600; ++s) {
    const std::size_t M = 3 + s % 2, N = 3 + (s / 2) % 2;
    const auto ch = random_instance(M, N, 12000 + s);
    const auto pts = oracle::enumerate_deterministic(ch);
    for (std::size_t L = 1; L < N; ++L) {
      const double slope = oracle::hull_at(pts, L) - oracle::hull_at(pts, L + 1);
      if (slope <= 1e-6) continue;
      std::uniform_real_distribution<double> u(0.2, 0.8);
      const auto pt = min_cost_for_leak(ch, L + u(rng));
      if (is_deterministic(pt.scheme)) continue;
      out.push_back({ch, pt.scheme, slope});
      break;
    }
  }
  return out;
}

Outcome determinization() {
  Outcome o;
  const auto inputs = optimizing_inputs(24);
  o.require(inputs.size() >= 20, "only " + std::to_string(inputs.size()) + " inputs");
  int qs = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto& in = inputs[i];
    const std::string tag = "input " + std::to_string(i) + ": ";

    const auto wf = water_fill(in.channel, in.scheme);
    const double dc = std::abs(total_cost(in.channel, wf) -
                               total_cost(in.channel, in.scheme));
    const double dl = std::abs(exp_leak(in.channel.px(), wf) -
                               exp_leak(in.channel.px(), in.scheme));
    o.require(dc <= kTolWaterFill && dl <= kTolWaterFill,
              tag + "water-fill moved cost by " + num(dc) + ", leak by " + num(dl));

    auto p = wf;
    for (int guard = 0; randomness(p) > 0 && guard < 100; ++guard) {
      const auto split = split_once(in.channel, p);
      for (std::size_t x = 0; x < split.q.rows(); ++x) {
        int sum = 0;
        for (std::size_t y = 0; y < split.q.cols(); ++y) sum += split.q(x, y);
        o.require(sum == 0, tag + "Q row " + std::to_string(x) + " sums to " +
                                std::to_string(sum));
      }
      ++qs;
      const double lp = lagrangian(in.channel, split.plus, in.alpha);
      const double lm = lagrangian(in.channel, split.minus, in.alpha);
      p = lp <= lm ? split.plus : split.minus;
      p = water_fill(in.channel, p);
    }

    const auto r = determinize_traced(in.channel, in.scheme, in.alpha);
    o.require(is_deterministic(r.scheme), tag + "output not deterministic");
    o.require(r.iterations <= r.initial_randomness,
              tag + std::to_string(r.iterations) + " iterations > R = " +
                  std::to_string(r.initial_randomness));
    const double before = lagrangian(in.channel, in.scheme, in.alpha);
    const double after = lagrangian(in.channel, r.scheme, in.alpha);
    o.require(std::abs(after - before) <= kTolLagrangian,
              tag + "objective moved by " + num(after - before));
  }
  if (o.pass) {
    o.detail = std::to_string(inputs.size()) + " LP vertex optima, " +
               std::to_string(qs) + " Q matrices";
  }
  return o;
}

Outcome greedy_guarantee() {
  Outcome o;
  int instances = 0, reports = 0;
  double worst = 0.0;
  for (int s = 0; instances < 60; ++s) {
    const std::size_t N = 4 + s % 6;
    const std::size_t M = 3 + s % 5;
    const auto ch = random_instance(M, N, 31000 + s);
    for (std::size_t L = 2; L <= N; ++L) {
      const auto opt = enumerate_optimal_subsets(ch, L);
      const auto r = greedy_bound_check(ch, L, opt.cost);
      o.require(r.holds, "seed " + std::to_string(s) + " L " + std::to_string(L) +
                             " ratio " + num(r.ratio) + " > " + num(r.bound));
      if (L == 2) {
        o.require(r.greedy_cost == opt.cost,
                  "seed " + std::to_string(s) + " L=2 greedy " + num(r.greedy_cost) +
                      " vs " + num(opt.cost));
      }
      if (std::isfinite(r.ratio)) worst = std::max(worst, r.ratio - r.bound);
      ++reports;
    }
    ++instances;
  }

  std::mt19937_64 rng(808);
  int tuples = 0;
  for (int s = 0; tuples < 550; ++s) {
    const std::size_t N = 6;
    const auto ch = random_instance(4, N, 33000 + s);
    const std::size_t y0 = find_y0(ch);
    std::vector<std::size_t> others;
    for (std::size_t y = 0; y < N; ++y) {
      if (y != y0) others.push_back(y);
    }
    for (int k = 0; k < 11; ++k) {
      std::shuffle(others.begin(), others.end(), rng);
      const std::size_t a = rng() % (others.size() - 1);
      std::vector<std::size_t> A(others.begin(), others.begin() + a);
      const std::size_t b = others[a], c = others[a + 1];
      auto f = [&](std::vector<std::size_t> extra) {
        auto set = A;
        set.insert(set.end(), extra.begin(), extra.end());
        return set_objective(ch, y0, set);
      };
      const double lhs = f({b}) + f({c});
      const double rhs = f({b, c}) + f({});
      o.require(lhs >= rhs - kTolSubmodular,
                "submodularity fails by " + num(rhs - lhs));
      ++tuples;
    }
  }
  if (o.pass) {
    o.detail = std::to_string(instances) + " instances, " + std::to_string(reports) +
               " (instance, L) pairs, " + std::to_string(tuples) + " tuples";
  }
  return o;
}

Outcome square_multiply() {
  Outcome o;
  double prev = kInfinity;
  for (long m = 0; m <= 8; ++m) {
    const auto t = square_multiply_channel(16, {m, 0.5, 1.0});
    const double cost = total_cost(t.channel, t.scheme);
    o.require(std::abs(cost - m / 2.0) <= kTolSqmCost,
              "m=" + std::to_string(m) + " cost " + num(cost));
    const double ml = maximal_leakage_bits(t.channel.px(), t.scheme);
    if (m == 0) {
      o.require(std::abs(ml - std::log2(17.0)) <= kTolSqmLeak, "ML(0) " + num(ml));
    }
    if (m == 2) {
      o.require(std::abs(ml - std::log2(9.0)) <= kTolSqmLeak, "ML(2) " + num(ml));
    }
    o.require(ml <= prev + kTolSqmLeak, "ML rises at m=" + std::to_string(m));
    prev = ml;
  }
  return o;
}

Outcome extension() {
  Outcome o;
  const auto e = extension_scheme({1, 5, 7, 9, 11, 13}, {4});
  const std::vector<double> want{1, 5, 7, 9, 11, 13, 15, 17, 19, 21};
  o.require(e.y_labels == want, "labels differ");
  return o;
}

Outcome metric_ordering() {
  Outcome o;
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int channels = 0;
  for (; channels < 150; ++channels) {
    const std::size_t M = 2 + rng() % 5, N = 2 + rng() % 5;
    std::vector<double> w(M);
    double total = 0.0;
    for (double& v : w) total += (v = u(rng) + 0.01);
    for (double& v : w) v /= total;
    const Pmf px(w);
    Matrix<double> p(M, N, 0.0);
    for (std::size_t x = 0; x < M; ++x) {
      double s = 0.0;
      for (std::size_t y = 0; y < N; ++y) {
        p(x, y) = u(rng) < 0.3 ? 0.0 : u(rng);
        s += p(x, y);
      }
      if (s == 0.0) {
        p(x, 0) = 1.0;
        s = 1.0;
      }
      for (std::size_t y = 0; y < N; ++y) p(x, y) /= s;
    }
    const auto r = leakage_report(px, ProtectionScheme(p));
    o.require(r.mi_bits <= r.cc_bits + kTolOrdering && r.cc_bits <= r.ml_bits + kTolOrdering,
              "channel " + std::to_string(channels) + ": MI " + num(r.mi_bits) +
                  " CC " + num(r.cc_bits) + " ML " + num(r.ml_bits));
  }

  int shattered = 0;
  for (int s = 0; shattered < 60; ++s) {
    const std::size_t M = 2 + s % 4, N = 2 + (s / 4) % 4;
    const long long d = 8 + s % 9;
    // Counts summing to d, each at least one.
    std::vector<double> counts(M, 1.0);
    for (long long left = d - static_cast<long long>(M); left > 0; --left) {
      counts[rng() % M] += 1.0;
    }
    for (double& c : counts) c /= static_cast<double>(d);
    const Pmf px(counts);
    std::mt19937_64 srng(60000 + s);
    Channel ch(px, CostMatrix(Matrix<double>(M, N, 0.0)));
    const auto scheme = oracle::random_scheme(ch, srng, 0.3);
    const auto joint = shattering_joint(px, d);
    const double mult = mult_leakage(joint, scheme);
    const double ml = maximal_leakage_bits(px, scheme);
    o.require(std::abs(mult - ml) <= kTolShatter,
              "case " + std::to_string(s) + ": " + num(mult) + " vs " + num(ml));
    ++shattered;
  }
  if (o.pass) {
    o.detail = std::to_string(channels) + " channels, " + std::to_string(shattered) +
               " shattering cases";
  }
  return o;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LEAKBOUND_CLI_PATH) + " " + args + " > /dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome synthetic_histogram() {
  Outcome o;
  namespace fs = std::filesystem;
  const fs::path dir =
      fs::temp_directory_path() / ("leakbound_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string csv = (dir / "hist.csv").string();
  const std::string channel = (dir / "channel.json").string();
  const std::string curve = (dir / "curve.csv").string();

  // 151 packet sizes, 40..1540 step 10, with a skewed synthetic count profile.
  std::mt19937_64 rng(151);
  std::ostringstream os;
  os << "label,count\n";
  for (int i = 0; i < 151; ++i) {
    const double mode = std::exp(-std::pow((i - 20) / 18.0, 2.0)) +
                        0.4 * std::exp(-std::pow((i - 140) / 6.0, 2.0));
    const long count = 1 + static_cast<long>(5000.0 * mode) +
                       static_cast<long>(rng() % 40);
    os << 40 + 10 * i << "," << count << "\n";
  }
  io::write_text(csv, os.str());

  o.require(run_cli("ingest --csv " + csv + " --out " + channel) == 0, "ingest failed");
  if (o.pass) {
    o.require(run_cli("curve --channel " + channel + " --method lp --out " + curve) == 0,
              "curve failed");
  }
  if (o.pass) {
    std::istringstream in(io::read_text(curve));
    std::string line;
    std::getline(in, line);
    int rows = 0;
    double prev_cost = kInfinity;
    while (std::getline(in, line)) {
      double L = 0, bits = 0, cost = 0, pct = 0;
      if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &L, &bits, &cost, &pct) != 4) {
        o.require(false, "bad CSV row " + line);
        break;
      }
      o.require(cost <= prev_cost + 1e-9, "curve rises at L " + num(L));
      prev_cost = cost;
      ++rows;
    }
    o.require(rows >= 2, std::to_string(rows) + " curve rows");
    // Padding cost: the identity at L=151 is free.
    o.require(prev_cost == 0.0, "last corner costs " + num(prev_cost));
  }
  fs::remove_all(dir);
  o.detail += std::string(o.detail.empty() ? "" : "; ") +
              "the published 1.6862 and 1.8111 bit figures need unreleased "
              "datasets and are not reproduced";
  return o;
}

struct Criterion {
  int id;
  std::string name;
  double limit;  // seconds, 0 for none
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "BSC endpoints", kLimitC1, bsc_endpoints},
      {2, "BSC interior", 0.0, bsc_interior},
      {3, "4x4 instance", kLimitC3, four_by_four},
      {4, "hull equivalence", kLimitC4, hull_equivalence},
      {5, "determinization", 0.0, determinization},
      {6, "greedy bound and submodularity", 0.0, greedy_guarantee},
      {7, "square-and-multiply channel", 0.0, square_multiply},
      {8, "extension labels", 0.0, extension},
      {9, "metric ordering and shattering", 0.0, metric_ordering},
      {10, "synthetic 151-symbol histogram", kLimitC10, synthetic_histogram},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit > 0.0 && secs >= c.limit) {
      o.pass = false;
      o.detail += (o.detail.empty() ? "" : "; ") + std::string("took ") + num(secs) +
                  " s, limit " + num(c.limit) + " s";
    }
    if (!o.pass) ++failures;
    char t[32];
    std::snprintf(t, sizeof t, "%.3f s", secs);
    std::cout << "criterion " << c.id << " " << (o.pass ? "PASS" : "FAIL") << "  "
              << c.name << " (" << t << ")";
    if (!o.detail.empty()) std::cout << ": " << o.detail;
    std::cout << "\n";
  }
  return failures == 0 ? 0 : 1;
}
