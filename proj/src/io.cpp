// Copyright 2026 The selftrig Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "selftrig/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "selftrig/errors.hpp"

namespace selftrig {
namespace {

using nlohmann::json;

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; })) {
      throw ConfigError("unknown field '" + key + "' in " + where);
    }
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError("missing field '" + std::string(key) + "' in " + where);
  return *it;
}

template <typename T>
T get_as(const json& v, const std::string& what) {
  try {
    return v.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

double get_number(const json& v, const std::string& what) {
  if (!v.is_number()) throw ConfigError(what + " must be a number");
  return v.get<double>();
}

Matrix parse_matrix(const json& v, const std::string& where) {
  check_keys(v, {"rows", "cols", "data"}, where);
  const auto rows = get_as<long>(require(v, "rows", where), where + ".rows");
  const auto cols = get_as<long>(require(v, "cols", where), where + ".cols");
  const auto& data = require(v, "data", where);
  if (rows < 1 || cols < 1) throw ConfigError(where + " must have positive dimensions");
  if (!data.is_array() || data.size() != static_cast<std::size_t>(rows * cols)) {
    throw ConfigError(where + ".data must hold rows*cols = " +
                      std::to_string(rows * cols) + " numbers");
  }
  Matrix M(rows, cols);
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      M(r, c) = get_number(data[static_cast<std::size_t>(r * cols + c)], where + ".data");
    }
  }
  return M;
}

// Row-major flat array of known shape, as used by gain tables.
Matrix parse_flat(const json& v, long rows, long cols, const std::string& where) {
  if (!v.is_array() || v.size() != static_cast<std::size_t>(rows * cols)) {
    throw ConfigError(where + " must hold " + std::to_string(rows * cols) + " numbers");
  }
  Matrix M(rows, cols);
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      M(r, c) = get_number(v[static_cast<std::size_t>(r * cols + c)], where);
    }
  }
  return M;
}

std::vector<int> parse_int_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + " must be an array of integers");
  std::vector<int> out;
  for (const auto& e : v) {
    if (!e.is_number_integer()) throw ConfigError(where + " must contain integers");
    out.push_back(e.get<int>());
  }
  return out;
}

LoopSpec parse_loop(const json& v, std::size_t index) {
  const std::string where = "loops[" + std::to_string(index) + "]";
  check_keys(v, {"id", "A", "B", "E", "Q", "R", "alpha", "x0", "x0_variance",
                 "noise_variance"},
             where);
  const auto id = get_as<std::string>(require(v, "id", where), where + ".id");
  std::optional<Matrix> E;
  if (v.contains("E")) E = parse_matrix(v["E"], where + ".E");
  LtiSystem sys(parse_matrix(require(v, "A", where), where + ".A"),
                parse_matrix(require(v, "B", where), where + ".B"), std::move(E));
  WeightSpec weights(parse_matrix(require(v, "Q", where), where + ".Q"),
                     parse_matrix(require(v, "R", where), where + ".R"),
                     get_number(require(v, "alpha", where), where + ".alpha"));
  InitialState x0;
  if (v.contains("x0") && v.contains("x0_variance")) {
    throw ConfigError(where + " sets both x0 and x0_variance");
  }
  if (v.contains("x0")) {
    const auto& arr = v["x0"];
    if (!arr.is_array()) throw ConfigError(where + ".x0 must be an array");
    Vector x(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t j = 0; j < arr.size(); ++j) {
      x(static_cast<Eigen::Index>(j)) = get_number(arr[j], where + ".x0");
    }
    x0.fixed = std::move(x);
  } else if (v.contains("x0_variance")) {
    x0.variance = get_number(v["x0_variance"], where + ".x0_variance");
  }
  const double noise = v.contains("noise_variance")
                           ? get_number(v["noise_variance"], where + ".noise_variance")
                           : 0.0;
  return LoopSpec{id, std::move(sys), std::move(weights), std::move(x0), noise};
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + " is not valid JSON: " + e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_flat(std::ostream& os, const Matrix& M) {
  os << '[';
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      if (r || c) os << ", ";
      os << format_double(M(r, c));
    }
  }
  os << ']';
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_ints(const std::vector<int>& values, char sep) {
  std::string out;
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (j) out += sep;
    out += std::to_string(values[j]);
  }
  return out;
}

ScenarioFile parse_scenario(const std::string& text) {
  const json doc = parse_json(text, "scenario");
  const std::string where = "scenario";
  check_keys(doc, {"schema_version", "name", "I0", "p", "horizon", "seed", "mode",
                   "periodic_ts", "loops", "outputs"},
             where);
  const auto version = get_as<int>(require(doc, "schema_version", where), "schema_version");
  if (version != kScenarioSchemaVersion) {
    throw ConfigError("unsupported scenario schema_version " + std::to_string(version) +
                      " (expected " + std::to_string(kScenarioSchemaVersion) + ")");
  }
  ScenarioFile file;
  Scenario& scn = file.scenario;
  scn.name = doc.contains("name") ? get_as<std::string>(doc["name"], "name") : "";
  scn.I0 = parse_int_list(require(doc, "I0", where), "I0");
  scn.horizon = get_as<TimeStep>(require(doc, "horizon", where), "horizon");
  scn.seed = doc.contains("seed") ? get_as<std::uint64_t>(doc["seed"], "seed") : 0;

  const auto& loops = require(doc, "loops", where);
  if (!loops.is_array() || loops.empty()) throw ConfigError("loops must be a non-empty array");
  for (std::size_t j = 0; j < loops.size(); ++j) scn.loops.push_back(parse_loop(loops[j], j));

  const json p = doc.contains("p") ? doc["p"] : json("auto");
  if (p.is_string()) {
    if (p.get<std::string>() != "auto") throw ConfigError("p must be an integer or \"auto\"");
    std::vector<LtiSystem> systems;
    for (const auto& l : scn.loops) systems.push_back(l.sys);
    scn.p = select_pstar(systems, normalized_factor_set(scn.I0));
    file.p_auto = true;
  } else {
    scn.p = get_as<int>(p, "p");
  }

  const std::string mode = doc.contains("mode") ? get_as<std::string>(doc["mode"], "mode")
                                                : "self_triggered";
  if (mode == "self_triggered") {
    scn.mode = Mode::kSelfTriggered;
    if (doc.contains("periodic_ts")) throw ConfigError("periodic_ts requires mode \"periodic\"");
  } else if (mode == "periodic") {
    scn.mode = Mode::kPeriodic;
    scn.periodic_ts = get_as<int>(require(doc, "periodic_ts", where), "periodic_ts");
  } else {
    throw ConfigError("mode must be \"self_triggered\" or \"periodic\"");
  }

  if (doc.contains("outputs")) {
    const auto& out = doc["outputs"];
    check_keys(out, {"tables", "results"}, "outputs");
    if (out.contains("tables")) file.tables_dir = get_as<std::string>(out["tables"], "outputs.tables");
    if (out.contains("results")) file.results_dir = get_as<std::string>(out["results"], "outputs.results");
  }
  scn.validate();
  return file;
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_file(path));
}

std::string gain_table_to_json(const GainTable& gt) {
  std::ostringstream os;
  os << "{\n";
  os << "  \"format\": \"" << kGainTableFormat << "\",\n";
  os << "  \"version\": " << kGainTableVersion << ",\n";
  os << "  \"loop_id\": " << json(gt.loop_id).dump() << ",\n";
  os << "  \"n\": " << gt.n << ",\n";
  os << "  \"m\": " << gt.m << ",\n";
  os << "  \"alpha\": " << format_double(gt.alpha) << ",\n";
  os << "  \"p\": " << gt.p << ",\n";
  os << "  \"I0\": [" << join_ints(gt.I0, ',') << "],\n";
  os << "  \"entries\": [\n";
  for (std::size_t j = 0; j < gt.I0.size(); ++j) {
    const int i = gt.I0[j];
    const auto& e = gt.at(i);
    os << "    {\"i\": " << i << ", \"P\": ";
    write_flat(os, e.P);
    os << ", \"L\": ";
    write_flat(os, e.L);
    os << "}" << (j + 1 < gt.I0.size() ? "," : "") << "\n";
  }
  os << "  ],\n";
  os << "  \"Pp\": ";
  write_flat(os, gt.Pp);
  os << ",\n  \"Lp\": ";
  write_flat(os, gt.Lp);
  os << ",\n  \"epsilon\": " << (gt.epsilon ? format_double(*gt.epsilon) : "null");
  os << ",\n  \"pstar\": " << (gt.pstar ? std::to_string(*gt.pstar) : "null");
  os << "\n}\n";
  return os.str();
}

GainTable parse_gain_table(const std::string& text) {
  const json doc = parse_json(text, "gain table");
  const std::string where = "gain table";
  check_keys(doc, {"format", "version", "loop_id", "n", "m", "alpha", "p", "I0", "entries",
                   "Pp", "Lp", "epsilon", "pstar"},
             where);
  if (get_as<std::string>(require(doc, "format", where), "format") != kGainTableFormat) {
    throw ConfigError("not a gain table document");
  }
  if (get_as<int>(require(doc, "version", where), "version") != kGainTableVersion) {
    throw ConfigError("unsupported gain table version");
  }
  GainTable gt;
  gt.loop_id = get_as<std::string>(require(doc, "loop_id", where), "loop_id");
  gt.n = get_as<int>(require(doc, "n", where), "n");
  gt.m = get_as<int>(require(doc, "m", where), "m");
  if (gt.n < 1 || gt.m < 1) throw ConfigError("gain table dimensions must be positive");
  gt.alpha = get_number(require(doc, "alpha", where), "alpha");
  gt.p = get_as<int>(require(doc, "p", where), "p");
  gt.I0 = parse_int_list(require(doc, "I0", where), "I0");
  const auto& entries = require(doc, "entries", where);
  if (!entries.is_array()) throw ConfigError("entries must be an array");
  for (const auto& e : entries) {
    check_keys(e, {"i", "P", "L"}, "gain table entry");
    const int i = get_as<int>(require(e, "i", "entry"), "entry.i");
    const std::string ew = "entry i=" + std::to_string(i);
    GainEntry ge{parse_flat(require(e, "P", ew), gt.n, gt.n, ew + ".P"),
                 parse_flat(require(e, "L", ew), gt.m, gt.n, ew + ".L")};
    if (!gt.entries.emplace(i, std::move(ge)).second) {
      throw ConfigError("duplicate gain table entry i=" + std::to_string(i));
    }
  }
  gt.Pp = parse_flat(require(doc, "Pp", where), gt.n, gt.n, "Pp");
  gt.Lp = parse_flat(require(doc, "Lp", where), gt.m, gt.n, "Lp");
  if (doc.contains("epsilon") && !doc["epsilon"].is_null()) {
    gt.epsilon = get_number(doc["epsilon"], "epsilon");
  }
  if (doc.contains("pstar") && !doc["pstar"].is_null()) {
    gt.pstar = get_as<int>(doc["pstar"], "pstar");
  }
  for (const int i : gt.I0) {
    if (!gt.contains(i)) throw ConfigError("gain table lacks entry i=" + std::to_string(i));
  }
  validate_gain_table(gt);
  return gt;
}

void write_gain_table(const GainTable& gt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << gain_table_to_json(gt);
}

GainTable read_gain_table(const std::filesystem::path& path) {
  return parse_gain_table(read_file(path));
}

void write_trace_csv(std::ostream& os, const LoopTrace& trace) {
  const Eigen::Index n = trace.states.cols();
  const Eigen::Index m = trace.inputs.cols();
  const Eigen::Index T = trace.inputs.rows();
  os << "k";
  for (Eigen::Index j = 1; j <= n; ++j) os << ",x_" << j;
  for (Eigen::Index j = 1; j <= m; ++j) os << ",u_" << j;
  os << ",sampled,i_chosen,V\n";
  std::size_t next = 0;
  for (Eigen::Index k = 0; k <= T; ++k) {
    os << k;
    for (Eigen::Index j = 0; j < n; ++j) os << ',' << format_double(trace.states(k, j));
    for (Eigen::Index j = 0; j < m; ++j) {
      os << ',';
      if (k < T) os << format_double(trace.inputs(k, j));
    }
    const bool sampled = next < trace.samples.size() && trace.samples[next].k == k;
    if (sampled) {
      os << ",1," << trace.samples[next].wait << ',' << format_double(trace.samples[next].value);
      ++next;
    } else {
      os << ",0,,";
    }
    os << '\n';
  }
}

void write_tx_log_csv(std::ostream& os, const SimTrace& trace,
                      const std::vector<std::string>& loop_ids) {
  os << "k,loop_id,i_chosen,feasible_set\n";
  for (const auto& t : trace.tx_log) {
    os << t.k << ',' << csv_escape(loop_ids.at(t.loop)) << ',' << t.wait << ','
       << join_ints(t.feasible) << '\n';
  }
}

void write_sweep_csv(std::ostream& os, const SweepSummary& summary, std::size_t loop) {
  os << "alpha,mean_interval,mean_cost,se_cost,n_runs\n";
  for (const auto& pt : summary.self_triggered) {
    if (!pt.error.empty()) continue;
    const auto& s = pt.loops.at(loop);
    os << format_double(pt.alpha) << ',' << format_double(s.mean_interval) << ','
       << format_double(s.mean_cost) << ',' << format_double(s.se_cost) << ',' << s.n_runs
       << '\n';
  }
}

void write_periodic_sweep_csv(std::ostream& os, const SweepSummary& summary,
                              std::size_t loop) {
  os << "Ts,mean_interval,mean_cost,se_cost,n_runs\n";
  for (const auto& pt : summary.periodic) {
    if (!pt.error.empty()) continue;
    const auto& s = pt.loops.at(loop);
    os << pt.Ts << ',' << format_double(s.mean_interval) << ',' << format_double(s.mean_cost)
       << ',' << format_double(s.se_cost) << ',' << s.n_runs << '\n';
  }
}

}  // namespace selftrig
