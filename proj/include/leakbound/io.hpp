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

// File formats: channel and scheme JSON documents, label/count histogram
// CSV, and trade-off curve CSV. Requires nlohmann/json.

#ifndef LEAKBOUND_IO_HPP_
#define LEAKBOUND_IO_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "leakbound/core.hpp"
#include "leakbound/metrics.hpp"

namespace leakbound::io {

using nlohmann::json;

// Malformed or inconsistent file content.
class FormatError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

//------------------------------------------------------------------------------
// Numbers

// Infinite costs are written as the string "inf".
inline json number_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return json(v);
}

inline double number_from_json(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "Infinity" || s == "+inf") return kInfinity;
  }
  throw FormatError(where + ": expected a number or \"inf\"");
}

inline std::vector<double> vector_from_json(const json& j,
                                            const std::string& where) {
  if (!j.is_array()) throw FormatError(where + ": expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(number_from_json(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

inline Matrix<double> matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) {
    throw FormatError(where + ": expected a nonempty array of rows");
  }
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < j.size(); ++i) {
    rows.push_back(vector_from_json(j[i], where + "[" + std::to_string(i) + "]"));
    if (rows.back().size() != rows.front().size()) {
      throw FormatError(where + ": rows have different lengths");
    }
  }
  return Matrix<double>::from_rows(rows);
}

inline json matrix_to_json(const Matrix<double>& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (double v : m.row(r)) row.push_back(number_to_json(v));
    rows.push_back(std::move(row));
  }
  return rows;
}

// %.17g, with "inf" for infinities.
inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  out << text;
}

inline json parse_json(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(where + ": " + e.what());
  }
}

//------------------------------------------------------------------------------
// Channel files

struct CostSpec {
  std::string kind = "padding";  // padding | delay | matrix
  double per_unit = 1.0;
  std::optional<Matrix<double>> rows;  // kind == matrix
};

struct ChannelFile {
  std::vector<double> x_labels;
  std::vector<double> p_x;
  std::vector<double> y_labels;  // optional; defaults to x_labels
  CostSpec cost;

  // Label-distance cost: per_unit * (y - x) for y >= x, infinite below.
  Channel to_channel() const {
    if (!x_labels.empty() && x_labels.size() != p_x.size()) {
      throw FormatError("x_labels and p_x have different lengths");
    }
    Pmf px(p_x, x_labels);
    if (cost.kind == "matrix") {
      if (!cost.rows) throw FormatError("matrix cost without rows");
      if (cost.rows->rows() != p_x.size()) {
        throw FormatError("cost rows do not match p_x length");
      }
      if (!y_labels.empty() && y_labels.size() != cost.rows->cols()) {
        throw FormatError("y_labels do not match cost columns");
      }
      return Channel(std::move(px), CostMatrix(*cost.rows), y_labels);
    }
    if (cost.kind != "padding" && cost.kind != "delay") {
      throw FormatError("unknown cost kind \"" + cost.kind + "\"");
    }
    if (x_labels.empty()) throw FormatError("label cost needs x_labels");
    if (!(cost.per_unit > 0.0) || !std::isfinite(cost.per_unit)) {
      throw FormatError("per_unit must be positive and finite");
    }
    const auto& ys = y_labels.empty() ? x_labels : y_labels;
    Matrix<double> c(x_labels.size(), ys.size(), kInfinity);
    for (std::size_t x = 0; x < x_labels.size(); ++x) {
      for (std::size_t y = 0; y < ys.size(); ++y) {
        if (ys[y] >= x_labels[x]) c(x, y) = cost.per_unit * (ys[y] - x_labels[x]);
      }
    }
    return Channel(std::move(px), CostMatrix(std::move(c)), ys);
  }

  // Baseline for percent overhead: sum p(x) * x_label.
  double baseline() const {
    double b = 0.0;
    for (std::size_t i = 0; i < x_labels.size() && i < p_x.size(); ++i) {
      b += p_x[i] * x_labels[i];
    }
    return b;
  }
};

inline ChannelFile channel_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("channel file must be a JSON object");
  ChannelFile f;
  if (!j.contains("p_x")) throw FormatError("channel file lacks \"p_x\"");
  f.p_x = vector_from_json(j["p_x"], "p_x");
  if (j.contains("x_labels")) f.x_labels = vector_from_json(j["x_labels"], "x_labels");
  if (j.contains("y_labels")) f.y_labels = vector_from_json(j["y_labels"], "y_labels");
  if (!j.contains("cost") || !j["cost"].is_object()) {
    throw FormatError("channel file lacks a \"cost\" object");
  }
  const auto& c = j["cost"];
  if (!c.contains("kind") || !c["kind"].is_string()) {
    throw FormatError("cost lacks a \"kind\" string");
  }
  f.cost.kind = c["kind"].get<std::string>();
  if (f.cost.kind == "matrix") {
    if (!c.contains("rows")) throw FormatError("matrix cost lacks \"rows\"");
    f.cost.rows = matrix_from_json(c["rows"], "cost.rows");
  } else if (c.contains("per_unit")) {
    f.cost.per_unit = number_from_json(c["per_unit"], "cost.per_unit");
  }
  f.to_channel();  // validates
  return f;
}

inline json channel_to_json(const ChannelFile& f) {
  json j;
  json xl = json::array(), px = json::array();
  for (double v : f.x_labels) xl.push_back(v);
  for (double v : f.p_x) px.push_back(v);
  j["x_labels"] = xl;
  j["p_x"] = px;
  if (!f.y_labels.empty()) {
    json yl = json::array();
    for (double v : f.y_labels) yl.push_back(v);
    j["y_labels"] = yl;
  }
  if (f.cost.kind == "matrix") {
    j["cost"] = {{"kind", "matrix"}, {"rows", matrix_to_json(*f.cost.rows)}};
  } else {
    j["cost"] = {{"kind", f.cost.kind}, {"per_unit", f.cost.per_unit}};
  }
  return j;
}

inline ChannelFile load_channel(const std::string& path) {
  return channel_from_json(parse_json(read_text(path), path));
}

inline void save_channel(const std::string& path, const ChannelFile& f) {
  write_text(path, channel_to_json(f).dump(2) + "\n");
}

// Channel file holding an explicit cost matrix.
inline ChannelFile channel_file_from(const Channel& ch) {
  ChannelFile f;
  f.p_x = ch.px().probs();
  f.x_labels = ch.px().labels();
  f.y_labels = ch.y_labels();
  f.cost.kind = "matrix";
  f.cost.rows = ch.cost().entries();
  return f;
}

//------------------------------------------------------------------------------
// Scheme files

struct MixtureRecord {
  double lambda = 1.0;
  Matrix<double> p1_rows;
  Matrix<double> p2_rows;
};

struct SchemeFile {
  ProtectionScheme scheme;
  std::optional<MixtureRecord> mixture;
  std::optional<LeakageReport> metrics;
  json provenance = json::object();
};

inline json report_to_json(const LeakageReport& r) {
  return {{"exp_leak", r.exp_leak},
          {"ml_bits", r.ml_bits},
          {"mi_bits", r.mi_bits},
          {"cc_bits", r.cc_bits}};
}

inline json scheme_to_json(const SchemeFile& f) {
  json j;
  j["rows"] = matrix_to_json(f.scheme.matrix());
  if (f.mixture) {
    j["mixture"] = {{"lambda", f.mixture->lambda},
                    {"p1_rows", matrix_to_json(f.mixture->p1_rows)},
                    {"p2_rows", matrix_to_json(f.mixture->p2_rows)}};
  }
  if (f.metrics) j["metrics"] = report_to_json(*f.metrics);
  j["provenance"] = f.provenance;
  return j;
}

// Parses and checks the document's own consistency (row sums, entry range,
// mixture blend). Channel-dependent checks are left to validate_scheme.
inline SchemeFile scheme_from_json(const json& j) {
  if (!j.is_object() || !j.contains("rows")) {
    throw FormatError("scheme file lacks \"rows\"");
  }
  SchemeFile f;
  f.scheme = ProtectionScheme(matrix_from_json(j["rows"], "rows"));
  for (std::size_t x = 0; x < f.scheme.rows(); ++x) {
    double sum = 0.0;
    for (std::size_t y = 0; y < f.scheme.cols(); ++y) {
      const double p = f.scheme(x, y);
      if (!(p >= 0.0 && p <= 1.0)) {
        std::ostringstream os;
        os << "entry (" << x << "," << y << ") = " << p << " outside [0,1]";
        throw FormatError(os.str());
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTol) {
      std::ostringstream os;
      os.precision(17);
      os << "row " << x << " sums to " << sum;
      throw FormatError(os.str());
    }
  }
  if (j.contains("mixture") && !j["mixture"].is_null()) {
    const auto& m = j["mixture"];
    MixtureRecord r;
    r.lambda = number_from_json(m.at("lambda"), "mixture.lambda");
    r.p1_rows = matrix_from_json(m.at("p1_rows"), "mixture.p1_rows");
    r.p2_rows = matrix_from_json(m.at("p2_rows"), "mixture.p2_rows");
    if (!(r.lambda >= 0.0 && r.lambda <= 1.0)) {
      throw FormatError("mixture lambda outside [0,1]");
    }
    const auto blend = ProtectionScheme::blend(
        r.lambda, ProtectionScheme(r.p1_rows), ProtectionScheme(r.p2_rows));
    if (blend.rows() != f.scheme.rows() || blend.cols() != f.scheme.cols()) {
      throw FormatError("mixture shape does not match rows");
    }
    for (std::size_t x = 0; x < blend.rows(); ++x) {
      for (std::size_t y = 0; y < blend.cols(); ++y) {
        if (std::abs(blend(x, y) - f.scheme(x, y)) > 1e-9) {
          std::ostringstream os;
          os << "mixture blend differs from rows at (" << x << "," << y << ")";
          throw FormatError(os.str());
        }
      }
    }
    f.mixture = std::move(r);
  }
  if (j.contains("metrics") && j["metrics"].is_object()) {
    const auto& m = j["metrics"];
    LeakageReport r;
    r.exp_leak = m.value("exp_leak", 0.0);
    r.ml_bits = m.value("ml_bits", 0.0);
    r.mi_bits = m.value("mi_bits", 0.0);
    r.cc_bits = m.value("cc_bits", 0.0);
    f.metrics = r;
  }
  if (j.contains("provenance")) f.provenance = j["provenance"];
  return f;
}

inline SchemeFile load_scheme(const std::string& path) {
  return scheme_from_json(parse_json(read_text(path), path));
}

inline void save_scheme(const std::string& path, const SchemeFile& f) {
  write_text(path, scheme_to_json(f).dump(2) + "\n");
}

//------------------------------------------------------------------------------
// Histogram CSV

struct Histogram {
  std::vector<double> labels;  // ascending, distinct
  std::vector<double> probs;
};

// Two columns, label and count (or frequency). An optional header line is
// skipped; duplicate labels are summed.
inline Histogram parse_histogram(const std::string& text) {
  std::map<double, double> acc;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool first_content = true;
  auto fail = [&](const std::string& what) {
    throw FormatError("line " + std::to_string(lineno) + ": " + what);
  };
  auto parse_num = [&](std::string s, double& out) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) return false;
    s = s.substr(b, e - b + 1);
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) fail("expected two comma-separated columns");
    if (line.find(',', comma + 1) != std::string::npos) {
      fail("expected exactly two columns");
    }
    double label = 0.0, count = 0.0;
    const bool ok_label = parse_num(line.substr(0, comma), label);
    const bool ok_count = parse_num(line.substr(comma + 1), count);
    if (first_content && !ok_label && !ok_count) {
      first_content = false;  // header
      continue;
    }
    first_content = false;
    if (!ok_label || !std::isfinite(label)) fail("label is not a number");
    if (!ok_count || !std::isfinite(count)) fail("count is not a number");
    if (count < 0.0) fail("count is negative");
    acc[label] += count;
  }
  double total = 0.0;
  for (const auto& [l, c] : acc) total += c;
  if (acc.empty() || !(total > 0.0)) {
    throw FormatError("histogram has no positive counts");
  }
  Histogram h;
  for (const auto& [l, c] : acc) {
    h.labels.push_back(l);
    h.probs.push_back(c / total);
  }
  // Fold the rounding residue into the largest entry so the pmf check holds.
  double sum = 0.0;
  for (double p : h.probs) sum += p;
  auto big = std::max_element(h.probs.begin(), h.probs.end());
  *big += 1.0 - sum;
  return h;
}

inline ChannelFile ingest_histogram(const std::string& path,
                                    const std::string& kind = "padding",
                                    double per_unit = 1.0) {
  const auto h = parse_histogram(read_text(path));
  ChannelFile f;
  f.x_labels = h.labels;
  f.p_x = h.probs;
  f.cost.kind = kind;
  f.cost.per_unit = per_unit;
  f.to_channel();
  return f;
}

//------------------------------------------------------------------------------
// Curve CSV

struct CurveRow {
  double exp_leak = 1.0;
  double cost = 0.0;
};

inline constexpr const char* kCurveHeader =
    "exp_leak,leak_bits,cost,percent_overhead";

// Rows sorted by exp_leak; percent_overhead = 100 * cost / baseline.
inline std::string curve_csv(std::vector<CurveRow> rows, double baseline) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const CurveRow& a, const CurveRow& b) {
                     return a.exp_leak < b.exp_leak;
                   });
  std::string out = std::string(kCurveHeader) + "\n";
  for (const auto& r : rows) {
    const double pct = baseline > 0.0 ? 100.0 * r.cost / baseline
                                      : std::numeric_limits<double>::quiet_NaN();
    out += format_number(r.exp_leak) + "," +
           format_number(std::log2(r.exp_leak)) + "," + format_number(r.cost) +
           "," + (std::isnan(pct) ? std::string("nan") : format_number(pct)) +
           "\n";
  }
  return out;
}

}  // namespace leakbound::io

#endif  // LEAKBOUND_IO_HPP_
