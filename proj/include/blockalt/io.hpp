#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "blockalt/control.hpp"
#include "blockalt/multistart.hpp"

// File formats and exports.
//
// Problem files are flat text, one `key value...` pair per line, '#' starts
// a comment:
//     n 3
//     bounds 0 3            # one line per variable, in order
//     bounds 2 10
//     bounds -1 1
//     cost (x1 - x2)^2 + (1/x2 + 2)^2 + 0.5*x3^2
//     constraint x1 + x2 <= 5
//     constraint x1*x3 >= 2
// `n` must come first so expressions know the variable count. Scenario files
// use the same shape (see load_scenario below). All machine-readable output
// is JSON tagged with a `schema` version string; telemetry additionally
// exports CSV.

namespace blockalt {

struct FileFormatError : std::runtime_error {
  int line;
  FileFormatError(int line_number, const std::string& message)
      : std::runtime_error("line " + std::to_string(line_number) + ": " + message),
        line(line_number) {}
};

namespace detail {

inline std::string strip(const std::string& s) {
  std::size_t begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  std::size_t end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

inline bool split_key(const std::string& line, std::string& key, std::string& rest) {
  std::string body = strip(line.substr(0, line.find('#')));
  if (body.empty()) return false;
  std::size_t space = body.find_first_of(" \t");
  if (space == std::string::npos) {
    key = body;
    rest = "";
  } else {
    key = body.substr(0, space);
    rest = strip(body.substr(space + 1));
  }
  return true;
}

}  // namespace detail

inline Problem parse_problem_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  int n = -1;
  std::vector<Bounds> bounds;
  std::string cost_text;
  int cost_line = 0;
  std::vector<std::string> constraint_text;
  std::vector<int> constraint_lines;

  while (std::getline(in, line)) {
    ++line_no;
    std::string key, rest;
    if (!detail::split_key(line, key, rest)) continue;
    if (key == "n") {
      if (n >= 0) throw FileFormatError(line_no, "duplicate 'n'");
      try {
        n = std::stoi(rest);
      } catch (...) {
        throw FileFormatError(line_no, "could not read variable count '" + rest + "'");
      }
      if (n < 1) throw FileFormatError(line_no, "variable count must be at least 1");
    } else if (key == "bounds") {
      if (n < 0) throw FileFormatError(line_no, "'n' must precede 'bounds'");
      std::istringstream pair(rest);
      Bounds b;
      if (!(pair >> b.lo >> b.hi))
        throw FileFormatError(line_no, "bounds need two numbers, got '" + rest + "'");
      bounds.push_back(b);
    } else if (key == "cost") {
      if (n < 0) throw FileFormatError(line_no, "'n' must precede 'cost'");
      if (!cost_text.empty()) throw FileFormatError(line_no, "duplicate 'cost'");
      cost_text = rest;
      cost_line = line_no;
    } else if (key == "constraint") {
      if (n < 0) throw FileFormatError(line_no, "'n' must precede 'constraint'");
      constraint_text.push_back(rest);
      constraint_lines.push_back(line_no);
    } else {
      throw FileFormatError(line_no, "unknown key '" + key + "'");
    }
  }

  if (n < 0) throw FileFormatError(line_no, "missing 'n'");
  if (static_cast<int>(bounds.size()) != n)
    throw FileFormatError(line_no, "expected " + std::to_string(n) +
                                       " bounds lines, found " +
                                       std::to_string(bounds.size()));
  if (cost_text.empty()) throw FileFormatError(line_no, "missing 'cost'");

  Expr cost;
  try {
    cost = parse_expression(cost_text, n);
  } catch (const ParseError& e) {
    throw FileFormatError(cost_line, std::string("cost: ") + e.what());
  }
  std::vector<Expr> constraints;
  for (std::size_t i = 0; i < constraint_text.size(); ++i) {
    try {
      constraints.push_back(parse_constraint(constraint_text[i], n));
    } catch (const ParseError& e) {
      throw FileFormatError(constraint_lines[i], std::string("constraint: ") + e.what());
    }
  }
  return Problem(std::move(bounds), std::move(cost), std::move(constraints),
                 std::move(constraint_text));
}

inline Problem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open problem file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_problem_text(buffer.str());
}

// ---------------------------------------------------------------------------
// Scenario files. Recognized keys (all optional except controller):
//   controller osap|lqr      duration 600      t_amb 25       r 50
//   seed 7                   theta 0.01        v_norm sqrt|squared
//   noise_sigma 0            n_starts 16       p_max 50       u_max 100
inline Scenario parse_scenario_text(const std::string& text) {
  std::istringstream in(text);
  Scenario s;
  std::string line;
  int line_no = 0;
  bool have_controller = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string key, rest;
    if (!detail::split_key(line, key, rest)) continue;
    try {
      if (key == "controller") {
        if (rest == "osap") s.controller = ControllerKind::Osap;
        else if (rest == "lqr") s.controller = ControllerKind::Lqr;
        else throw FileFormatError(line_no, "controller must be 'osap' or 'lqr'");
        have_controller = true;
      } else if (key == "duration") s.duration_s = std::stod(rest);
      else if (key == "t_amb") s.t_amb_C = std::stod(rest);
      else if (key == "r") s.r_C = std::stod(rest);
      else if (key == "seed") s.seed = std::stoull(rest);
      else if (key == "theta") s.osap.theta = std::stod(rest);
      else if (key == "noise_sigma") s.noise_sigma = std::stod(rest);
      else if (key == "n_starts") s.osap.n_starts = std::stoi(rest);
      else if (key == "p_max") s.osap.p_max = std::stod(rest);
      else if (key == "u_max") s.osap.u_max = std::stod(rest);
      else if (key == "v_norm") {
        if (rest == "sqrt") s.osap.norm = LyapunovNorm::Sqrt;
        else if (rest == "squared") s.osap.norm = LyapunovNorm::Squared;
        else throw FileFormatError(line_no, "v_norm must be 'sqrt' or 'squared'");
      } else throw FileFormatError(line_no, "unknown key '" + key + "'");
    } catch (const FileFormatError&) {
      throw;
    } catch (...) {
      throw FileFormatError(line_no, "could not read value '" + rest + "' for '" + key + "'");
    }
  }
  if (!have_controller) throw FileFormatError(line_no, "missing 'controller'");
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario_text(buffer.str());
}

// ---------------------------------------------------------------------------
// JSON exports.

inline nlohmann::json to_json(const StartSet& set) {
  nlohmann::json j;
  j["schema"] = "blockalt.start_set/1";
  j["method"] = to_string(set.method);
  j["seed"] = set.seed;
  j["grid_shortfall"] = set.grid_shortfall;
  j["lhs_fallback"] = set.lhs_fallback;
  j["points"] = set.points;
  nlohmann::json prov = nlohmann::json::array();
  for (Provenance p : set.provenance) prov.push_back(to_string(p));
  j["provenance"] = prov;
  return j;
}

inline nlohmann::json to_json(const RunTrace& trace) {
  nlohmann::json rows = nlohmann::json::array();
  for (const IterationRecord& rec : trace.iterations) {
    rows.push_back({{"k", rec.k},
                    {"coordinate", rec.coord},
                    {"point", rec.point},
                    {"cost", rec.cost}});
  }
  return {{"truncated", trace.truncated}, {"iterations", rows}};
}

inline nlohmann::json to_json(const SolverReport& report) {
  nlohmann::json j;
  j["schema"] = "blockalt.solver_report/1";
  j["method"] = report.method;
  j["seed"] = report.seed;
  j["best_point"] = report.best_point;
  j["best_cost"] = report.best_cost;
  j["winner_index"] = report.winner_index;
  j["best_feasible"] = report.best_feasible;
  j["wall_time_s"] = report.wall_time_s;
  nlohmann::json starts = nlohmann::json::array();
  for (const StartOutcome& o : report.per_start) {
    nlohmann::json row{{"start", o.start},
                       {"final", o.final},
                       {"cost", o.cost},
                       {"iterations", o.iterations},
                       {"truncated", o.truncated},
                       {"failed", o.failed}};
    if (o.failed) row["error"] = o.error;
    starts.push_back(std::move(row));
  }
  j["per_start"] = starts;
  j["winner_trace"] = to_json(report.winner_trace);
  return j;
}

inline nlohmann::json to_json(const Telemetry& tel, const Scenario& scenario) {
  nlohmann::json j;
  j["schema"] = "blockalt.telemetry/1";
  j["scenario"] = {
      {"controller", scenario.controller == ControllerKind::Osap ? "osap" : "lqr"},
      {"duration_s", scenario.duration_s},
      {"t_amb_C", scenario.t_amb_C},
      {"r_C", scenario.r_C},
      {"seed", scenario.seed},
      {"theta", scenario.osap.theta},
      {"v_norm", scenario.osap.norm == LyapunovNorm::Sqrt ? "sqrt" : "squared"},
      {"noise_sigma", scenario.noise_sigma},
      {"n_starts", scenario.osap.n_starts}};
  nlohmann::json ticks = nlohmann::json::array();
  for (std::size_t i = 0; i < tel.size(); ++i) {
    ticks.push_back({{"t", tel.t[i]},
                     {"y", tel.y[i]},
                     {"u", tel.u[i]},
                     {"x1_hat", tel.x1_hat[i]},
                     {"x2_hat", tel.x2_hat[i]},
                     {"solver_iterations", tel.solver_iterations[i]},
                     {"tick_time", tel.tick_time_s[i]},
                     {"accepted", static_cast<bool>(tel.accepted[i])},
                     {"contraction_residual", tel.contraction_residual[i]},
                     {"P", {tel.p11[i], tel.p12[i], tel.p22[i]}}});
  }
  j["ticks"] = ticks;
  j["rejected_ticks"] = tel.rejected_ticks;
  return j;
}

// Fixed column set: t, y, u, x1_hat, x2_hat, solver_iterations, tick_time.
inline std::string telemetry_csv(const Telemetry& tel) {
  std::ostringstream out;
  out.precision(17);
  out << "t,y,u,x1_hat,x2_hat,solver_iterations,tick_time\n";
  for (std::size_t i = 0; i < tel.size(); ++i) {
    out << tel.t[i] << ',' << tel.y[i] << ',' << tel.u[i] << ',' << tel.x1_hat[i]
        << ',' << tel.x2_hat[i] << ',' << tel.solver_iterations[i] << ','
        << tel.tick_time_s[i] << '\n';
  }
  return out.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace blockalt
