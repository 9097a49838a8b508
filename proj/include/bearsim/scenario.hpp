#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "bearsim/errors.hpp"

namespace bearsim {

/// One desired bearing, oriented from agent j toward agent i.
struct BearingEntry {
  int i = 0;
  int j = 0;
  Eigen::VectorXd g;
};

/// Everything needed to reproduce a run: topology, bearings, leader system,
/// follower models, gains, integration grid, safety margin, and the seeded
/// initial-condition specification. Parsed from a sectioned key = value text
/// format (see serialize_scenario for the canonical layout).
struct Scenario {
  std::string name = "scenario";

  // [graph]
  int agents = 0;
  int leaders = 0;
  std::vector<std::pair<int, int>> edges;

  // [bearings]
  int dim = 2;
  std::vector<BearingEntry> bearings;

  // [leader]
  Eigen::MatrixXd S;
  Eigen::MatrixXd F;
  Eigen::VectorXd eta0;
  Eigen::VectorXd q_l0;  // stacked leader positions

  // [followers]
  std::string model = "planar_2dof";

  // [gains] -- scalars expand to scaled identities of the model dimensions
  double gamma = 1.0;
  std::optional<double> lambda_s_scalar;
  std::optional<Eigen::MatrixXd> lambda_s_matrix;
  std::optional<double> lambda_theta_scalar;
  std::optional<Eigen::MatrixXd> lambda_theta_matrix;

  // [integration]
  double horizon = 30.0;
  double dt = 1e-3;
  int log_stride = 100;

  // [safety]
  double gamma_safe = 2.0;

  // [init] -- centered uniform draws (u - 0.5) * scale, SplitMix64 stream
  // seeded once; draw order: eta_tilde, s, theta_tilde, q_tilde. Explicit
  // vectors, when present, replace the corresponding drawn quantity.
  std::uint64_t seed = 1;
  double eta_tilde_scale = 10.0;
  double s_scale = 2.0;
  double theta_tilde_scale = 1.0;
  double q_tilde_scale = 1.0;
  std::optional<Eigen::VectorXd> q_f0;
  std::optional<Eigen::VectorXd> qdot_f0;
  std::optional<Eigen::VectorXd> eta_hat0;
  std::optional<Eigen::VectorXd> theta_hat0;
};

namespace scenario_detail {

struct Value {
  enum class Kind { number, string, array };
  Kind kind = Kind::number;
  double num = 0.0;
  std::string str;
  std::vector<Value> arr;
};

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class ValueParser {
public:
  ValueParser(const std::string& text, const std::string& where)
      : text_(text), where_(where) {}

  Value parse() {
    Value v = parse_value();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters after value");
    return v;
  }

private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(where_ + ": " + msg);
  }

  Value parse_value() {
    skip_ws();
    if (pos_ >= text_.size()) fail("expected a value");
    if (text_[pos_] == '[') return parse_array();
    return parse_scalar();
  }

  Value parse_array() {
    Value v;
    v.kind = Value::Kind::array;
    ++pos_;  // '['
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == ']') {
      ++pos_;
      return v;
    }
    while (true) {
      v.arr.push_back(parse_value());
      skip_ws();
      if (pos_ >= text_.size()) fail("unterminated array");
      if (text_[pos_] == ',') {
        ++pos_;
        continue;
      }
      if (text_[pos_] == ']') {
        ++pos_;
        return v;
      }
      fail("expected ',' or ']' in array");
    }
  }

  Value parse_scalar() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ']' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    const std::string tok = text_.substr(start, pos_ - start);
    if (tok.empty()) fail("empty scalar");
    Value v;
    char* end = nullptr;
    const double num = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() + tok.size()) {
      v.kind = Value::Kind::number;
      v.num = num;
    } else {
      v.kind = Value::Kind::string;
      v.str = tok;
    }
    return v;
  }

  const std::string& text_;
  std::string where_;
  std::size_t pos_ = 0;
};

inline double as_number(const Value& v, const std::string& where) {
  if (v.kind != Value::Kind::number) throw ParseError(where + ": expected a number");
  return v.num;
}

inline int as_int(const Value& v, const std::string& where) {
  const double x = as_number(v, where);
  const int i = static_cast<int>(std::llround(x));
  if (std::abs(x - i) > 1e-9) throw ParseError(where + ": expected an integer");
  return i;
}

inline Eigen::VectorXd as_vector(const Value& v, const std::string& where) {
  if (v.kind != Value::Kind::array) throw ParseError(where + ": expected an array");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.arr.size()));
  for (std::size_t k = 0; k < v.arr.size(); ++k) {
    out[static_cast<Eigen::Index>(k)] = as_number(v.arr[k], where);
  }
  return out;
}

inline Eigen::MatrixXd as_matrix(const Value& v, const std::string& where) {
  if (v.kind != Value::Kind::array || v.arr.empty()) {
    throw ParseError(where + ": expected a non-empty array of rows");
  }
  const Eigen::VectorXd first = as_vector(v.arr[0], where);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(v.arr.size()), first.size());
  m.row(0) = first;
  for (std::size_t r = 1; r < v.arr.size(); ++r) {
    const Eigen::VectorXd row = as_vector(v.arr[r], where);
    if (row.size() != first.size()) throw ParseError(where + ": ragged matrix rows");
    m.row(static_cast<Eigen::Index>(r)) = row;
  }
  return m;
}

inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::string format_vector(const Eigen::VectorXd& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v[i]);
  }
  return out + "]";
}

inline std::string format_matrix(const Eigen::MatrixXd& m) {
  std::string out = "[";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r) out += ", ";
    out += format_vector(m.row(r).transpose());
  }
  return out + "]";
}

}  // namespace scenario_detail

inline Scenario parse_scenario(const std::string& text, const std::string& source = "<text>") {
  using scenario_detail::Value;
  Scenario sc;
  sc.name = source;

  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  bool saw_lambda_s = false, saw_lambda_theta = false;

  auto where = [&](const std::string& key) {
    return source + ":" + std::to_string(line_no) + ": [" + section + "] " + key;
  };

  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = scenario_detail::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ParseError(source + ":" + std::to_string(line_no) + ": malformed section header");
      }
      section = scenario_detail::trim(line.substr(1, line.size() - 2));
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = scenario_detail::trim(line.substr(0, eq));
    const std::string rhs = scenario_detail::trim(line.substr(eq + 1));
    scenario_detail::ValueParser vp(rhs, where(key));
    const Value val = vp.parse();

    using scenario_detail::as_int;
    using scenario_detail::as_matrix;
    using scenario_detail::as_number;
    using scenario_detail::as_vector;

    if (section == "graph") {
      if (key == "agents") sc.agents = as_int(val, where(key));
      else if (key == "leaders") sc.leaders = as_int(val, where(key));
      else if (key == "edges") {
        if (val.kind != Value::Kind::array) throw ParseError(where(key) + ": expected an array");
        for (const Value& e : val.arr) {
          if (e.kind != Value::Kind::array || e.arr.size() != 2) {
            throw ParseError(where(key) + ": each edge must be [i, j]");
          }
          sc.edges.emplace_back(as_int(e.arr[0], where(key)), as_int(e.arr[1], where(key)));
        }
      } else throw ParseError(where(key) + ": unknown key");
    } else if (section == "bearings") {
      if (key == "dim") sc.dim = as_int(val, where(key));
      else if (key == "bearing") {
        const Eigen::VectorXd row = as_vector(val, where(key));
        if (row.size() < 4) throw ParseError(where(key) + ": expected [i, j, components...]");
        BearingEntry be;
        be.i = static_cast<int>(std::llround(row[0]));
        be.j = static_cast<int>(std::llround(row[1]));
        be.g = row.tail(row.size() - 2);
        sc.bearings.push_back(std::move(be));
      } else throw ParseError(where(key) + ": unknown key");
    } else if (section == "leader") {
      if (key == "S") sc.S = as_matrix(val, where(key));
      else if (key == "F") sc.F = as_matrix(val, where(key));
      else if (key == "eta0") sc.eta0 = as_vector(val, where(key));
      else if (key == "positions") {
        const Eigen::MatrixXd rows = as_matrix(val, where(key));
        sc.q_l0.resize(rows.rows() * rows.cols());
        for (Eigen::Index r = 0; r < rows.rows(); ++r) {
          sc.q_l0.segment(r * rows.cols(), rows.cols()) = rows.row(r);
        }
      } else throw ParseError(where(key) + ": unknown key");
    } else if (section == "followers") {
      if (key == "model") {
        if (val.kind != Value::Kind::string) throw ParseError(where(key) + ": expected a name");
        sc.model = val.str;
      } else throw ParseError(where(key) + ": unknown key");
    } else if (section == "gains") {
      if (key == "gamma") sc.gamma = as_number(val, where(key));
      else if (key == "lambda_s") {
        saw_lambda_s = true;
        if (val.kind == Value::Kind::number) sc.lambda_s_scalar = val.num;
        else sc.lambda_s_matrix = as_matrix(val, where(key));
      } else if (key == "lambda_theta") {
        saw_lambda_theta = true;
        if (val.kind == Value::Kind::number) sc.lambda_theta_scalar = val.num;
        else sc.lambda_theta_matrix = as_matrix(val, where(key));
      } else throw ParseError(where(key) + ": unknown key");
    } else if (section == "integration") {
      if (key == "horizon") sc.horizon = as_number(val, where(key));
      else if (key == "dt") sc.dt = as_number(val, where(key));
      else if (key == "log_stride") sc.log_stride = as_int(val, where(key));
      else throw ParseError(where(key) + ": unknown key");
    } else if (section == "safety") {
      if (key == "gamma_safe") sc.gamma_safe = as_number(val, where(key));
      else throw ParseError(where(key) + ": unknown key");
    } else if (section == "init") {
      if (key == "seed") {
        const double x = as_number(val, where(key));
        if (x < 0) throw ParseError(where(key) + ": seed must be nonnegative");
        sc.seed = static_cast<std::uint64_t>(x);
      } else if (key == "eta_tilde_scale") sc.eta_tilde_scale = as_number(val, where(key));
      else if (key == "s_scale") sc.s_scale = as_number(val, where(key));
      else if (key == "theta_tilde_scale") sc.theta_tilde_scale = as_number(val, where(key));
      else if (key == "q_tilde_scale") sc.q_tilde_scale = as_number(val, where(key));
      else if (key == "q_f0") sc.q_f0 = as_vector(val, where(key));
      else if (key == "qdot_f0") sc.qdot_f0 = as_vector(val, where(key));
      else if (key == "eta_hat0") sc.eta_hat0 = as_vector(val, where(key));
      else if (key == "theta_hat0") sc.theta_hat0 = as_vector(val, where(key));
      else throw ParseError(where(key) + ": unknown key");
    } else if (section.empty()) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": key outside any section");
    } else {
      throw ParseError(source + ":" + std::to_string(line_no) + ": unknown section [" +
                       section + "]");
    }
  }

  if (!saw_lambda_s) sc.lambda_s_scalar = 5.0;
  if (!saw_lambda_theta) sc.lambda_theta_scalar = 10.0;
  return sc;
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

/// Canonical text form; parse(serialize(s)) reproduces s field-for-field.
inline std::string serialize_scenario(const Scenario& sc) {
  using scenario_detail::format_double;
  using scenario_detail::format_matrix;
  using scenario_detail::format_vector;
  std::ostringstream out;
  out << "[graph]\n";
  out << "agents = " << sc.agents << "\n";
  out << "leaders = " << sc.leaders << "\n";
  out << "edges = [";
  for (std::size_t k = 0; k < sc.edges.size(); ++k) {
    if (k) out << ", ";
    out << "[" << sc.edges[k].first << ", " << sc.edges[k].second << "]";
  }
  out << "]\n\n[bearings]\n";
  out << "dim = " << sc.dim << "\n";
  for (const BearingEntry& b : sc.bearings) {
    out << "bearing = [" << b.i << ", " << b.j;
    for (Eigen::Index c = 0; c < b.g.size(); ++c) out << ", " << format_double(b.g[c]);
    out << "]\n";
  }
  out << "\n[leader]\n";
  out << "S = " << format_matrix(sc.S) << "\n";
  out << "F = " << format_matrix(sc.F) << "\n";
  out << "eta0 = " << format_vector(sc.eta0) << "\n";
  const int nl = static_cast<int>(sc.q_l0.size()) / sc.dim;
  out << "positions = [";
  for (int k = 0; k < nl; ++k) {
    if (k) out << ", ";
    out << format_vector(sc.q_l0.segment(k * sc.dim, sc.dim));
  }
  out << "]\n\n[followers]\n";
  out << "model = " << sc.model << "\n";
  out << "\n[gains]\n";
  out << "gamma = " << format_double(sc.gamma) << "\n";
  if (sc.lambda_s_matrix) out << "lambda_s = " << format_matrix(*sc.lambda_s_matrix) << "\n";
  else out << "lambda_s = " << format_double(sc.lambda_s_scalar.value_or(5.0)) << "\n";
  if (sc.lambda_theta_matrix)
    out << "lambda_theta = " << format_matrix(*sc.lambda_theta_matrix) << "\n";
  else out << "lambda_theta = " << format_double(sc.lambda_theta_scalar.value_or(10.0)) << "\n";
  out << "\n[integration]\n";
  out << "horizon = " << format_double(sc.horizon) << "\n";
  out << "dt = " << format_double(sc.dt) << "\n";
  out << "log_stride = " << sc.log_stride << "\n";
  out << "\n[safety]\n";
  out << "gamma_safe = " << format_double(sc.gamma_safe) << "\n";
  out << "\n[init]\n";
  out << "seed = " << sc.seed << "\n";
  out << "eta_tilde_scale = " << format_double(sc.eta_tilde_scale) << "\n";
  out << "s_scale = " << format_double(sc.s_scale) << "\n";
  out << "theta_tilde_scale = " << format_double(sc.theta_tilde_scale) << "\n";
  out << "q_tilde_scale = " << format_double(sc.q_tilde_scale) << "\n";
  if (sc.q_f0) out << "q_f0 = " << format_vector(*sc.q_f0) << "\n";
  if (sc.qdot_f0) out << "qdot_f0 = " << format_vector(*sc.qdot_f0) << "\n";
  if (sc.eta_hat0) out << "eta_hat0 = " << format_vector(*sc.eta_hat0) << "\n";
  if (sc.theta_hat0) out << "theta_hat0 = " << format_vector(*sc.theta_hat0) << "\n";
  return out.str();
}

/// Bundled default scenario: two leaders on the left edge of a 3x2 station
/// grid with 100 m spacing, followers completing the rectangle outline. The
/// graph is complete except for the leader-leader pair (no edge between
/// agents 1 and 2), and every edge carries the bearing realized by the grid,
/// so the target formation solves to the grid exactly and the smallest
/// pairwise target distance is 100.
inline Scenario default_scenario() {
  Scenario sc;
  sc.name = "default";
  sc.agents = 6;
  sc.leaders = 2;
  sc.dim = 2;
  const double positions[6][2] = {{0, 100}, {0, 0},     {100, 100},
                                  {100, 0}, {200, 100}, {200, 0}};
  for (int i = 1; i <= 6; ++i) {
    for (int j = i + 1; j <= 6; ++j) {
      if (i == 1 && j == 2) continue;  // leaders do not communicate
      sc.edges.emplace_back(i, j);
      Eigen::Vector2d diff(positions[i - 1][0] - positions[j - 1][0],
                           positions[i - 1][1] - positions[j - 1][1]);
      BearingEntry be;
      be.i = i;
      be.j = j;
      be.g = diff.normalized();
      sc.bearings.push_back(std::move(be));
    }
  }
  const double omega = 1.5707963267948966;  // pi / 2
  sc.S.resize(3, 3);
  sc.S << 0, 0, 0, 0, 0, omega, 0, -omega, 0;
  sc.F.resize(2, 3);
  sc.F << 0.6, 0, 0, 0.3, 0.3, 0;
  sc.eta0.resize(3);
  sc.eta0 << 10, 1, 0;
  sc.q_l0.resize(4);
  sc.q_l0 << 0, 100, 0, 0;
  sc.model = "planar_2dof";
  // Gain condition 2 lambda_min(L_ff) gamma > 1 needs gamma > 0.25 here;
  // gamma = 2 gives the observer enough margin to reach 1e-4 state error
  // within the 30 s horizon.
  sc.gamma = 2.0;
  sc.lambda_s_scalar = 5.0;
  sc.lambda_theta_scalar = 10.0;
  sc.horizon = 30.0;
  sc.dt = 1e-3;
  sc.log_stride = 100;
  sc.gamma_safe = 2.0;
  sc.seed = 2026;
  sc.eta_tilde_scale = 10.0;
  sc.s_scale = 2.0;
  sc.theta_tilde_scale = 1.0;
  sc.q_tilde_scale = 0.5;
  return sc;
}

/// Default scenario with initial-error scales shrunk until the
/// initial-condition safety certificate holds with margin; used for seeded
/// collision-avoidance batches.
inline Scenario safety_batch_scenario() {
  Scenario sc = default_scenario();
  sc.name = "safety_batch";
  sc.eta_tilde_scale = 1.0;
  sc.s_scale = 0.5;
  sc.theta_tilde_scale = 0.5;
  sc.q_tilde_scale = 1.0;
  sc.seed = 1;
  return sc;
}

}  // namespace bearsim
