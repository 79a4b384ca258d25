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

#include "selftrig/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "selftrig/errors.hpp"
#include "selftrig/io.hpp"
#include "selftrig/scheduler.hpp"
#include "selftrig/simulator.hpp"
#include "selftrig/synthesis.hpp"

namespace selftrig::cli {
namespace {

constexpr int kDeskRuns = 20;
constexpr int kFullScaleRuns = 100;
constexpr long kFullScaleHorizon = 10000;

int fail(std::ostream& err, const Error& e) {
  err << "error: " << e.what() << '\n';
  return static_cast<int>(e.exit_code());
}

std::vector<LtiSystem> systems_of(const Scenario& scn) {
  std::vector<LtiSystem> out;
  for (const auto& l : scn.loops) out.push_back(l.sys);
  return out;
}

void check_network(const Scenario& scn) {
  if (scn.loops.size() > 1) ReservationLedger(scn.p, scn.I0, scn.loops.size());
}

std::string flat(const Matrix& M, int precision = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << '[';
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      if (r || c) os << ' ';
      os << M(r, c);
    }
  }
  os << ']';
  return os.str();
}

void print_table(std::ostream& out, const LoopSpec& spec, const GainTable& gt,
                 const std::optional<StabilityCertificate>& cert, int pstar) {
  out << "loop " << gt.loop_id << ": n=" << gt.n << " m=" << gt.m << " alpha=" << gt.alpha
      << " p=" << gt.p << " p*=" << pstar << " gamma=" << gt.gamma() << '\n';
  const auto lifted = lift_range(spec.sys, spec.weights, gt.gamma());
  out << std::fixed << std::setprecision(2);
  if (gt.n == 1 && gt.m == 1) {
    out << "  i    A(i)   B(i)   Q(i)   R(i)   N(i)   L(i)   P(i)\n";
    for (const int i : gt.I0) {
      const auto& lm = lifted[static_cast<std::size_t>(i - 1)];
      const auto& e = gt.at(i);
      out << "  " << std::setw(2) << i << ' ' << std::setw(7) << lm.Ai(0, 0) << std::setw(7)
          << lm.Bi(0, 0) << std::setw(7) << lm.Qi(0, 0) << std::setw(7) << lm.Ri(0, 0)
          << std::setw(7) << lm.Ni(0, 0) << std::setw(7) << e.L(0, 0) << std::setw(7)
          << e.P(0, 0) << (i == gt.p ? "  (p)" : "") << '\n';
    }
  } else {
    for (const int i : gt.I0) {
      const auto& e = gt.at(i);
      out << "  i=" << i << " L=" << flat(e.L) << " P=" << flat(e.P)
          << (i == gt.p ? "  (p)" : "") << '\n';
    }
  }
  out << std::defaultfloat << std::setprecision(6);
  if (cert) {
    out << "  epsilon=" << cert->epsilon << " bounds=[" << cert->lower_bound << ", "
        << cert->upper_bound << "]\n";
  } else {
    out << "  no stability certificate (p differs from p*)\n";
  }
}

fs::path table_path(const fs::path& dir, const std::string& id) { return dir / (id + ".json"); }

std::vector<GainTable> load_tables(const fs::path& dir, const Scenario& scn) {
  std::vector<GainTable> tables;
  for (const auto& l : scn.loops) tables.push_back(read_gain_table(table_path(dir, l.id)));
  return tables;
}

void write_gnuplot(const fs::path& path, const std::string& id, int n, int m) {
  std::ofstream gp(path);
  if (!gp) throw ConfigError("cannot write " + path.string());
  gp << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set multiplot layout 2,1 title 'loop " << id << "'\n"
     << "set xlabel 'k'\n"
     << "plot";
  for (int j = 0; j < n; ++j) {
    gp << (j ? "," : "") << " 'trace_" << id << ".csv' using 1:" << 2 + j << " with steps";
  }
  gp << "\nplot";
  for (int j = 0; j < m; ++j) {
    gp << (j ? "," : "") << " 'trace_" << id << ".csv' using 1:" << 2 + n + j
       << " with steps";
  }
  gp << "\nunset multiplot\n";
}

fs::path with_suffix(const fs::path& out, const std::string& suffix) {
  fs::path p = out;
  p.replace_filename(out.stem().string() + suffix + out.extension().string());
  return p;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) ensure_dir(path.parent_path());
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  return os;
}

}  // namespace

bool full_scale_requested() {
  const char* v = std::getenv("SELFTRIG_FULL_SCALE");
  return v != nullptr && std::string(v) == "1";
}

int cmd_synth(const fs::path& scenario, const fs::path& out_dir, std::ostream& out,
              std::ostream& err) {
  try {
    const ScenarioFile file = load_scenario(scenario);
    const Scenario& scn = file.scenario;
    check_network(scn);
    const auto systems = systems_of(scn);
    const int pstar = select_pstar(systems, normalized_factor_set(scn.I0));

    std::vector<GainTable> tables;
    for (const auto& spec : scn.loops) {
      GainTable gt = build_gain_table(spec.sys, spec.weights, scn.I0, scn.p, spec.id);
      std::optional<StabilityCertificate> cert;
      if (gt.p == pstar) {
        cert = stability_certificate(gt, spec.sys, pstar);
        gt.epsilon = cert->epsilon;
        gt.pstar = pstar;
      }
      print_table(out, spec, gt, cert, pstar);
      tables.push_back(std::move(gt));
    }
    ensure_dir(out_dir);
    for (const auto& gt : tables) write_gain_table(gt, table_path(out_dir, gt.loop_id));
    out << "wrote " << tables.size() << " gain table(s) to " << out_dir.string() << '\n';
    return 0;
  } catch (const Error& e) {
    return fail(err, e);
  }
}

int cmd_simulate(const fs::path& scenario, const std::optional<fs::path>& tables_dir,
                 const fs::path& out_dir, bool gnuplot, std::ostream& out,
                 std::ostream& err) {
  try {
    const ScenarioFile file = load_scenario(scenario);
    const Scenario& scn = file.scenario;
    std::vector<GainTable> tables;
    if (scn.mode == Mode::kSelfTriggered) {
      const auto dir = tables_dir ? tables_dir : file.tables_dir;
      if (!dir) throw ConfigError("self-triggered simulation needs a gain table directory (-t)");
      tables = load_tables(*dir, scn);
      check_tables(scn, tables);
    }
    const SimTrace trace = run_scenario(scn, tables);

    std::vector<std::string> ids;
    for (const auto& l : scn.loops) ids.push_back(l.id);
    ensure_dir(out_dir);
    for (std::size_t l = 0; l < scn.loops.size(); ++l) {
      auto os = open_out(out_dir / ("trace_" + ids[l] + ".csv"));
      write_trace_csv(os, trace.loops[l]);
      if (gnuplot) {
        write_gnuplot(out_dir / ("plot_" + ids[l] + ".gp"), ids[l], scn.loops[l].sys.n(),
                      scn.loops[l].sys.m());
      }
    }
    {
      auto os = open_out(out_dir / "tx_log.csv");
      write_tx_log_csv(os, trace, ids);
    }
    auto summary = open_out(out_dir / "summary.csv");
    summary << "loop_id,empiric_cost,mean_interval,samples,first_wait,final_wait,final_V\n";
    for (std::size_t l = 0; l < scn.loops.size(); ++l) {
      const auto& lt = trace.loops[l];
      const double cost = empiric_cost(lt, scn.loops[l].weights.Q(), scn.loops[l].weights.R());
      const double interval = average_sampling_interval(lt, scn.gamma());
      const auto& first = lt.samples.front();
      const auto& last = lt.samples.back();
      summary << ids[l] << ',' << format_double(cost) << ',' << format_double(interval) << ','
              << lt.samples.size() << ',' << first.wait << ',' << last.wait << ','
              << format_double(last.value) << '\n';
      out << "loop " << ids[l] << ": empiric_cost=" << cost << " mean_interval=" << interval
          << " samples=" << lt.samples.size() << " first_wait=" << first.wait
          << " final_wait=" << last.wait << " final_V=" << last.value << '\n';
    }
    const auto tx = trace.transmissions();
    if (!verify_conflict_free(tx)) {
      throw SchedulingError("transmission log contains a slot conflict");
    }
    out << "transmissions=" << tx.size() << " conflict_free=yes\n";
    return 0;
  } catch (const Error& e) {
    return fail(err, e);
  }
}

int cmd_sweep(const SweepRequest& req, std::ostream& out, std::ostream& err) {
  try {
    ScenarioFile file = load_scenario(req.scenario);
    Scenario& scn = file.scenario;
    const bool full = full_scale_requested();
    if (req.horizon) {
      scn.horizon = *req.horizon;
    } else if (full) {
      scn.horizon = kFullScaleHorizon;
    }
    const int runs = req.runs.value_or(full ? kFullScaleRuns : kDeskRuns);
    const std::uint64_t seed = req.seed.value_or(scn.seed);
    SweepOptions opts;
    opts.threads = req.threads;
    const SweepSummary summary = sweep_alpha(scn, req.alphas, runs, seed, opts);

    std::size_t failures = 0;
    for (const auto& pt : summary.self_triggered) {
      if (!pt.error.empty()) {
        ++failures;
        err << "alpha=" << pt.alpha << ": " << pt.error << '\n';
      }
    }
    const bool single = summary.loop_ids.size() == 1;
    for (std::size_t l = 0; l < summary.loop_ids.size(); ++l) {
      const std::string suffix = single ? "" : "." + summary.loop_ids[l];
      auto os = open_out(with_suffix(req.out, suffix));
      write_sweep_csv(os, summary, l);
      auto ps = open_out(with_suffix(req.out, suffix + "_periodic"));
      write_periodic_sweep_csv(ps, summary, l);
    }
    for (const auto& pt : summary.self_triggered) {
      if (!pt.error.empty()) continue;
      out << "alpha=" << pt.alpha;
      for (std::size_t l = 0; l < pt.loops.size(); ++l) {
        out << "  [" << summary.loop_ids[l] << "] interval=" << pt.loops[l].mean_interval
            << " cost=" << pt.loops[l].mean_cost << " (se " << pt.loops[l].se_cost << ")";
      }
      out << '\n';
    }
    out << "runs=" << runs << " horizon=" << scn.horizon << " seed=" << seed << '\n';
    return failures == summary.self_triggered.size() ? static_cast<int>(ExitCode::kNumeric)
                                                    : 0;
  } catch (const Error& e) {
    return fail(err, e);
  }
}

int cmd_verify(const fs::path& tables_dir, const fs::path& scenario, std::ostream& out,
               std::ostream& err) {
  try {
    const ScenarioFile file = load_scenario(scenario);
    const Scenario& scn = file.scenario;
    const std::vector<GainTable> tables = load_tables(tables_dir, scn);
    check_tables(scn, tables);

    int code = 0;
    if (scn.loops.size() > 1) {
      try {
        check_network(scn);
        out << "network: " << scn.loops.size() << " loops, p=" << scn.p
            << ", channel admissible: yes\n";
      } catch (const ConfigError& e) {
        out << "network: channel admissible: NO (" << e.what() << ")\n";
        code = static_cast<int>(ExitCode::kConfig);
      }
    }
    const int pstar = select_pstar(systems_of(scn), normalized_factor_set(scn.I0));
    for (std::size_t l = 0; l < tables.size(); ++l) {
      const auto& gt = tables[l];
      const auto& spec = scn.loops[l];
      const bool unit_circle = unit_circle_condition(spec.sys, gt.gamma());
      out << "loop " << gt.loop_id << ": p=" << gt.p << " p*=" << pstar
          << " gamma=" << gt.gamma() << " p*=gamma: " << (pstar == gt.gamma() ? "yes" : "no")
          << " unit-circle condition: " << (unit_circle ? "holds" : "fails") << '\n';
      if (gt.p != pstar) {
        out << "  certificate: FAIL (table p differs from p*)\n";
        code = static_cast<int>(ExitCode::kCertificate);
        continue;
      }
      try {
        const auto cert = stability_certificate(gt, spec.sys, pstar);
        out << "  epsilon=" << format_double(cert.epsilon)
            << " lower=" << format_double(cert.lower_bound)
            << " upper=" << format_double(cert.upper_bound) << '\n';
        for (const auto& [i, rho] : cert.per_i_ratio) {
          out << "    i=" << i << " ratio=" << format_double(rho) << '\n';
        }
        if (gt.epsilon && format_double(*gt.epsilon) != format_double(cert.epsilon)) {
          out << "  certificate: FAIL (stored epsilon " << format_double(*gt.epsilon)
              << " does not match recomputed value)\n";
          code = static_cast<int>(ExitCode::kCertificate);
        } else {
          out << "  certificate: ok\n";
        }
      } catch (const CertificateError& e) {
        out << "  certificate: FAIL (" << e.what() << ")\n";
        code = static_cast<int>(ExitCode::kCertificate);
      }
    }
    return code;
  } catch (const Error& e) {
    return fail(err, e);
  }
}

int cmd_partition(const fs::path& table, double xmin, double xmax, int points,
                  const fs::path& out_csv, std::ostream& out, std::ostream& err) {
  try {
    if (points < 2 || !(xmax > xmin)) throw ConfigError("need points >= 2 and xmax > xmin");
    const GainTable gt = read_gain_table(table);
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int j = 0; j < points; ++j) {
      grid[static_cast<std::size_t>(j)] = xmin + (xmax - xmin) * j / (points - 1);
    }
    const auto part = partition_1d(gt, grid);
    auto os = open_out(out_csv);
    os << "x,i_star";
    for (const int i : gt.I0) os << ",V_" << i;
    os << '\n';
    Vector x(1);
    for (const auto& [xv, istar] : part) {
      x(0) = xv;
      os << format_double(xv) << ',' << istar;
      for (const int i : gt.I0) os << ',' << format_double(value_of(gt, x, i));
      os << '\n';
    }
    out << "wrote " << part.size() << " grid points to " << out_csv.string() << '\n';
    return 0;
  } catch (const Error& e) {
    return fail(err, e);
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Self-triggered MPC: offline synthesis, simulation, sweeps and checks"};
  app.require_subcommand(1);

  fs::path scenario, out_dir, tables_dir;

  auto* synth = app.add_subcommand("synth", "Synthesize gain tables for a scenario");
  synth->add_option("-c,--scenario", scenario, "Scenario file")->required();
  synth->add_option("-o,--out", out_dir, "Output directory for gain tables")->required();

  bool gnuplot = false;
  std::optional<fs::path> sim_tables;
  auto* simulate = app.add_subcommand("simulate", "Run a closed-loop simulation");
  simulate->add_option("-c,--scenario", scenario, "Scenario file")->required();
  simulate->add_option("-t,--tables", sim_tables, "Gain table directory");
  simulate->add_option("-o,--out", out_dir, "Output directory")->required();
  simulate->add_flag("--gnuplot", gnuplot, "Also write gnuplot scripts");

  SweepRequest sweep_req;
  std::string alphas;
  auto* sweep = app.add_subcommand("sweep", "Monte-Carlo sweep over alpha");
  sweep->add_option("-c,--scenario", sweep_req.scenario, "Scenario file")->required();
  sweep->add_option("--alphas", alphas, "Comma-separated ascending alpha values")->required();
  sweep->add_option("--runs", sweep_req.runs, "Runs per alpha");
  sweep->add_option("--seed", sweep_req.seed, "Root seed");
  sweep->add_option("--horizon", sweep_req.horizon, "Steps per run");
  sweep->add_option("--threads", sweep_req.threads, "Worker threads (0 = auto)");
  sweep->add_option("-o,--out", sweep_req.out, "Summary CSV")->required();

  auto* verify = app.add_subcommand("verify", "Check stability and network conditions");
  verify->add_option("-t,--tables", tables_dir, "Gain table directory")->required();
  verify->add_option("-c,--scenario", scenario, "Scenario file")->required();

  fs::path table_file, part_out;
  double xmin = -5.0, xmax = 5.0;
  int points = 201;
  auto* partition = app.add_subcommand("partition", "Tabulate the scalar state partition");
  partition->add_option("-t,--table", table_file, "Gain table file")->required();
  partition->add_option("--xmin", xmin, "Grid start");
  partition->add_option("--xmax", xmax, "Grid end");
  partition->add_option("--points", points, "Grid points");
  partition->add_option("-o,--out", part_out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kConfig);
  }

  if (*synth) return cmd_synth(scenario, out_dir, std::cout, std::cerr);
  if (*simulate) return cmd_simulate(scenario, sim_tables, out_dir, gnuplot, std::cout, std::cerr);
  if (*sweep) {
    std::stringstream ss(alphas);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        sweep_req.alphas.push_back(std::stod(item));
      } catch (const std::exception&) {
        std::cerr << "error: bad alpha value '" << item << "'\n";
        return static_cast<int>(ExitCode::kConfig);
      }
    }
    return cmd_sweep(sweep_req, std::cout, std::cerr);
  }
  if (*verify) return cmd_verify(tables_dir, scenario, std::cout, std::cerr);
  if (*partition) {
    return cmd_partition(table_file, xmin, xmax, points, part_out, std::cout, std::cerr);
  }
  return static_cast<int>(ExitCode::kConfig);
}

}  // namespace selftrig::cli
