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

// leakbound command-line tool.
//
// Exit codes: 0 success, 2 invalid input, 3 infeasible request,
// 4 numerical failure.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "leakbound/leakbound.hpp"
#include "leakbound/io.hpp"

namespace {

using leakbound::io::json;
namespace lb = leakbound;
namespace io = leakbound::io;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumerical = 4;

unsigned threads_from_env() {
  const char* v = std::getenv("LEAKBOUND_THREADS");
  if (v == nullptr || *v == '\0') return 0;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 0) {
    throw lb::InvalidArgument("LEAKBOUND_THREADS must be a nonnegative integer");
  }
  return static_cast<unsigned>(n);
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    io::write_text(out_path, text);
  }
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0') {
      throw lb::InvalidArgument("not a number in list: \"" + item + "\"");
    }
    out.push_back(v);
  }
  return out;
}

std::string fmt(double v) { return io::format_number(v); }

//------------------------------------------------------------------------------
// analyze

struct AnalyzeArgs {
  std::string channel, scheme;
  bool json_only = false;
};

int run_analyze(const AnalyzeArgs& a) {
  const auto cf = io::load_channel(a.channel);
  const auto ch = cf.to_channel();
  const auto sf = io::load_scheme(a.scheme);
  if (auto v = lb::validate_scheme(ch, sf.scheme)) {
    std::cerr << "invalid scheme: " << v->message << "\n";
    return kExitInvalid;
  }
  const auto rep = lb::leakage_report(ch.px(), sf.scheme);
  const double cost = lb::total_cost(ch, sf.scheme);
  const double base = cf.baseline();
  json j = io::report_to_json(rep);
  j["total_cost"] = cost;
  j["baseline"] = base;
  j["percent_overhead"] =
      base > 0.0 ? json(100.0 * cost / base) : json(nullptr);
  if (!a.json_only) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "exp-leak          %.6f\nML (bits)         %.6f\n"
                  "MI (bits)         %.6f\nCC (bits)         %.6f\n"
                  "total cost        %.6f\n",
                  rep.exp_leak, rep.ml_bits, rep.mi_bits, rep.cc_bits, cost);
    std::cout << buf;
    if (base > 0.0) {
      std::snprintf(buf, sizeof buf, "overhead (%%)      %.4f\n",
                    100.0 * cost / base);
      std::cout << buf;
    }
  }
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

//------------------------------------------------------------------------------
// optimize

struct OptimizeArgs {
  std::string channel, out;
  double leak_bits = std::nan("");
  double budget = std::nan("");
  std::string budget_mode = "total";
  bool decompose = false;
};

int run_optimize(const OptimizeArgs& a) {
  const auto cf = io::load_channel(a.channel);
  const auto ch = cf.to_channel();
  lb::OptimizeOptions opt;
  opt.threads = threads_from_env();

  const bool by_leak = !std::isnan(a.leak_bits);
  const bool by_budget = !std::isnan(a.budget);
  if (by_leak == by_budget) {
    throw lb::InvalidArgument("give exactly one of --leak-bits and --budget");
  }
  json params = {{"channel", a.channel}, {"decompose", a.decompose}};
  double budget = a.budget;
  if (by_leak) {
    if (!(a.leak_bits >= 0.0)) throw lb::InvalidArgument("--leak-bits must be >= 0");
    params["leak_bits"] = a.leak_bits;
  } else {
    if (a.budget_mode == "excess") {
      budget += lb::min_achievable_cost(ch);
    } else if (a.budget_mode != "total") {
      throw lb::InvalidArgument("--budget-mode must be total or excess");
    }
    params["budget"] = a.budget;
    params["budget_mode"] = a.budget_mode;
  }

  io::SchemeFile sf;
  if (a.decompose) {
    // The hull answers both questions directly, without the LP.
    const auto curve = lb::build_curve(ch, opt);
    const double L = by_leak ? std::exp2(a.leak_bits)
                             : curve.leak_for_cost(budget);
    const auto mix = curve.query(L);
    sf.scheme = mix.blend();
    sf.mixture = io::MixtureRecord{mix.lambda, mix.p1.matrix(),
                                   mix.p2.matrix()};
    params["mixture_exp_leak"] = mix.mixed_exp_leak();
  } else if (by_leak) {
    sf.scheme = lb::min_cost_for_leak(ch, std::exp2(a.leak_bits), opt).scheme;
  } else {
    sf.scheme = lb::min_leak_for_cost(ch, budget, opt).scheme;
  }
  sf.metrics = lb::leakage_report(ch.px(), sf.scheme);
  sf.provenance = {{"command", "optimize"}, {"parameters", params}};
  const double cost = lb::total_cost(ch, sf.scheme);
  const std::string text = io::scheme_to_json(sf).dump(2) + "\n";
  emit(a.out, text);
  if (!a.out.empty() && a.out != "-") {
    std::cout << "exp-leak " << fmt(sf.metrics->exp_leak) << "  ML bits "
              << fmt(sf.metrics->ml_bits) << "  cost " << fmt(cost);
    if (sf.mixture) std::cout << "  lambda " << fmt(sf.mixture->lambda);
    std::cout << "\n";
  }
  return kExitOk;
}

//------------------------------------------------------------------------------
// curve

struct CurveArgs {
  std::string channel, method = "lp", out;
  int samples = 0;
};

int run_curve(const CurveArgs& a) {
  const auto cf = io::load_channel(a.channel);
  const auto ch = cf.to_channel();
  std::vector<io::CurveRow> rows;
  if (a.method == "lp") {
    lb::OptimizeOptions opt;
    opt.threads = threads_from_env();
    const auto curve = lb::build_curve(ch, opt);
    // Corners above the hull are never optimal; only hull corners go out.
    for (const auto& h : curve.hull) rows.push_back({h.exp_leak_bound, h.cost});
    for (std::size_t i = 1; i < curve.hull.size() && a.samples > 0; ++i) {
      const double l0 = curve.hull[i - 1].exp_leak_bound;
      const double l1 = curve.hull[i].exp_leak_bound;
      for (int s = 1; s <= a.samples; ++s) {
        const double L = l0 + (l1 - l0) * s / (a.samples + 1);
        rows.push_back({L, curve.cost_at(L)});
      }
    }
  } else if (a.method == "greedy") {
    const auto g = lb::greedy_curve(ch, ch.num_outputs());
    for (const auto& p : g.points) rows.push_back({p.exp_leak, p.cost});
  } else {
    throw lb::InvalidArgument("--method must be lp or greedy");
  }
  emit(a.out, io::curve_csv(rows, cf.baseline()));
  return kExitOk;
}

//------------------------------------------------------------------------------
// casegen

struct CasegenArgs {
  std::string kind, out, scheme_out;
  double p = 0.0;
  long n = 16, m = 0;
  double per_unit = 1.0;
  std::string labels, probs;
  long w = 0;
  long rows = 4, cols = 4;
  unsigned long long seed = 1;
};

void write_scheme_if(const std::string& path, const lb::Channel& ch,
                     const lb::ProtectionScheme& s, const json& params) {
  if (path.empty()) return;
  io::SchemeFile sf;
  sf.scheme = s;
  sf.metrics = lb::leakage_report(ch.px(), s);
  sf.provenance = {{"command", "casegen"}, {"parameters", params}};
  io::save_scheme(path, sf);
}

int run_casegen(const CasegenArgs& a) {
  if (a.out.empty()) throw lb::InvalidArgument("--out is required");
  json params = {{"kind", a.kind}};
  if (a.kind == "bsc") {
    const auto c = lb::bsc(a.p);
    params["p"] = a.p;
    io::ChannelFile f;
    f.x_labels = {0, 1};
    f.p_x = c.px.probs();
    f.cost.kind = "matrix";
    f.cost.rows = lb::Matrix<double>(2, 2, 0.0);
    io::save_channel(a.out, f);
    write_scheme_if(a.scheme_out, f.to_channel(), c.scheme, params);
  } else if (a.kind == "sqm") {
    const auto c = lb::square_multiply_channel(
        a.n, lb::BinomialNoiseSpec{a.m, 0.5, a.per_unit});
    params["n"] = a.n;
    params["m"] = a.m;
    params["per_unit"] = a.per_unit;
    io::ChannelFile f;
    f.x_labels = c.channel.px().labels();
    f.p_x = c.channel.px().probs();
    f.y_labels = c.channel.y_labels();
    f.cost.kind = "delay";
    f.cost.per_unit = a.per_unit;
    io::save_channel(a.out, f);
    write_scheme_if(a.scheme_out, f.to_channel(), c.scheme, params);
  } else if (a.kind == "extension") {
    const auto labels = parse_list(a.labels);
    const auto c = lb::extension_scheme(labels, lb::ExtensionSpec{a.w});
    params["labels"] = labels;
    params["w"] = a.w;
    io::ChannelFile f;
    f.x_labels = labels;
    f.p_x = a.probs.empty()
                ? std::vector<double>(labels.size(), 1.0 / labels.size())
                : parse_list(a.probs);
    f.y_labels = c.y_labels;
    f.cost.kind = "padding";
    io::save_channel(a.out, f);
    write_scheme_if(a.scheme_out, f.to_channel(), c.scheme, params);
  } else if (a.kind == "random") {
    if (a.rows < 1 || a.cols < 1) throw lb::InvalidArgument("--M and --N must be >= 1");
    const auto ch = lb::random_instance(static_cast<std::size_t>(a.rows),
                                        static_cast<std::size_t>(a.cols),
                                        a.seed);
    auto f = io::channel_file_from(ch);
    f.x_labels.clear();
    for (long i = 0; i < a.rows; ++i) f.x_labels.push_back(static_cast<double>(i));
    io::save_channel(a.out, f);
  } else {
    throw lb::InvalidArgument("unknown case kind \"" + a.kind + "\"");
  }
  return kExitOk;
}

//------------------------------------------------------------------------------
// ingest

struct IngestArgs {
  std::string csv, out, kind = "padding";
  double per_unit = 1.0;
};

int run_ingest(const IngestArgs& a) {
  const auto f = io::ingest_histogram(a.csv, a.kind, a.per_unit);
  emit(a.out, io::channel_to_json(f).dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Side-channel leakage analysis and cost-optimal protection"};
  app.require_subcommand(1);

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Leakage metrics of a scheme");
  analyze->add_option("--channel", an.channel, "Channel JSON")->required();
  analyze->add_option("--scheme", an.scheme, "Scheme JSON")->required();
  analyze->add_flag("--json", an.json_only, "Print only the JSON report");

  OptimizeArgs op;
  auto* optimize = app.add_subcommand("optimize", "Cost-optimal scheme");
  optimize->add_option("--channel", op.channel, "Channel JSON")->required();
  auto* lb_opt = optimize->add_option("--leak-bits", op.leak_bits,
                                      "Maximal leakage bound in bits");
  auto* bud_opt = optimize->add_option("--budget", op.budget, "Cost budget");
  lb_opt->excludes(bud_opt);
  optimize->add_option("--budget-mode", op.budget_mode,
                       "total (default) or excess over the minimum cost")
      ->check(CLI::IsMember({"total", "excess"}));
  optimize->add_flag("--decompose", op.decompose,
                     "Emit a two-scheme deterministic mixture");
  optimize->add_option("--out", op.out, "Scheme JSON output (default stdout)");

  CurveArgs cu;
  auto* curve = app.add_subcommand("curve", "Cost/leakage trade-off curve CSV");
  curve->add_option("--channel", cu.channel, "Channel JSON")->required();
  curve->add_option("--method", cu.method, "lp or greedy")
      ->check(CLI::IsMember({"lp", "greedy"}));
  curve->add_option("--out", cu.out, "CSV output (default stdout)");
  curve->add_option("--samples", cu.samples,
                    "Interior points per hull segment (lp only)")
      ->check(CLI::NonNegativeNumber);

  CasegenArgs cg;
  auto* casegen = app.add_subcommand("casegen", "Write synthetic channels");
  casegen->add_option("kind", cg.kind, "bsc | sqm | extension | random")
      ->required()
      ->check(CLI::IsMember({"bsc", "sqm", "extension", "random"}));
  casegen->add_option("--out", cg.out, "Channel JSON output")->required();
  casegen->add_option("--scheme-out", cg.scheme_out, "Scheme JSON output");
  casegen->add_option("--p", cg.p, "BSC flip probability");
  casegen->add_option("--n", cg.n, "Key bits (sqm)");
  casegen->add_option("--m", cg.m, "Binomial noise size (sqm)");
  casegen->add_option("--per-unit", cg.per_unit, "Cost per unit delay (sqm)");
  casegen->add_option("--labels", cg.labels, "Comma-separated labels (extension)");
  casegen->add_option("--probs", cg.probs, "Comma-separated p(x) (extension)");
  casegen->add_option("--w", cg.w, "Extension width");
  casegen->add_option("--M", cg.rows, "Rows (random)");
  casegen->add_option("--N", cg.cols, "Columns (random)");
  casegen->add_option("--seed", cg.seed, "Seed (random)");

  IngestArgs in;
  auto* ingest = app.add_subcommand("ingest", "Histogram CSV to channel JSON");
  ingest->add_option("--csv", in.csv, "label,count CSV")->required();
  ingest->add_option("--out", in.out, "Channel JSON output (default stdout)");
  ingest->add_option("--kind", in.kind, "padding or delay")
      ->check(CLI::IsMember({"padding", "delay"}));
  ingest->add_option("--per-unit", in.per_unit, "Cost per label unit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*analyze) return run_analyze(an);
    if (*optimize) return run_optimize(op);
    if (*curve) return run_curve(cu);
    if (*casegen) return run_casegen(cg);
    if (*ingest) return run_ingest(in);
  } catch (const lb::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    if (e.min_cost()) {
      std::cerr << "minimum achievable cost: " << fmt(*e.min_cost()) << "\n";
    }
    return kExitInfeasible;
  } catch (const lb::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const lb::InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const lb::Error& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}
