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

#include <gtest/gtest.h>

#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "selftrig/cli.hpp"
#include "selftrig/io.hpp"
#include "selftrig/synthesis.hpp"
#include "test_support.hpp"

namespace selftrig {
namespace {

namespace fs = std::filesystem;
using testing::scenario_path;
using testing::scratch_dir;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Captured {
  int code;
  std::string out;
  std::string err;
};

Captured synth(const std::string& scenario, const fs::path& dir) {
  std::ostringstream out, err;
  const int code = cli::cmd_synth(scenario_path(scenario), dir, out, err);
  return {code, out.str(), err.str()};
}

TEST(CliSynth, PrintsIntegratorTable) {
  const auto dir = scratch_dir("synth_integrator");
  auto r = synth("integrator.json", dir);
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* row : {"   1    1.00   1.00   1.00   1.00   0.00   0.70   1.70",
                          "   2    1.00   2.00   2.00   3.00   1.00   0.46   1.73",
                          "   4    1.00   4.00   4.00  18.00   6.00   0.28   2.08",
                          "   5    1.00   5.00   5.00  35.00  10.00   0.23   2.30"}) {
    EXPECT_NE(r.out.find(row), std::string::npos) << row << "\n" << r.out;
  }
  EXPECT_NE(r.out.find("   3    1.00   3.00   3.00   8.00   3.00   0.34   1.89"),
            std::string::npos);
  const GainTable gt = read_gain_table(dir / "integrator.json");
  ASSERT_TRUE(gt.epsilon.has_value());
  EXPECT_NEAR(*gt.epsilon, 0.8756, 1e-4);
  EXPECT_EQ(gt.pstar, 5);
}

TEST(CliSynth, InadmissibleNetwork) {
  auto r = synth("inadmissible.json", scratch_dir("synth_bad"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("channel admissibility violation"), std::string::npos) << r.err;
}

TEST(CliSynth, NegativePoleUncontrollable) {
  auto r = synth("negative_pole.json", scratch_dir("synth_flip"));
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("flip"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("p = 2"), std::string::npos) << r.err;
}

TEST(CliSynth, MissingScenario) {
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_synth("/nonexistent.json", scratch_dir("synth_missing"), out, err), 2);
}

TEST(CliSimulate, SingleLoopSummary) {
  const auto tables = scratch_dir("sim4_tables");
  ASSERT_EQ(synth("integrator.json", tables).code, 0);
  const auto out_dir = scratch_dir("sim4_out");
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_simulate(scenario_path("integrator.json"), tables, out_dir, true, out, err), 0)
      << err.str();
  const std::string summary = slurp(out_dir / "summary.csv");
  EXPECT_EQ(summary.substr(0, summary.find('\n')),
            "loop_id,empiric_cost,mean_interval,samples,first_wait,final_wait,final_V");
  EXPECT_NE(summary.find(",1,5,0.04"), std::string::npos) << summary;
  EXPECT_TRUE(fs::exists(out_dir / "trace_integrator.csv"));
  EXPECT_TRUE(fs::exists(out_dir / "plot_integrator.gp"));
  EXPECT_TRUE(fs::exists(out_dir / "tx_log.csv"));
}

TEST(CliSimulate, TwoLoopTxLog) {
  const auto tables = scratch_dir("sim9_tables");
  ASSERT_EQ(synth("two_loop.json", tables).code, 0);
  const auto out_dir = scratch_dir("sim9_out");
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_simulate(scenario_path("two_loop.json"), tables, out_dir, false, out, err), 0)
      << err.str();
  EXPECT_NE(out.str().find("conflict_free=yes"), std::string::npos);
  const std::string trace = slurp(out_dir / "trace_double_integrator.csv");
  EXPECT_EQ(trace.substr(0, trace.find('\n')), "k,x_1,x_2,u_1,sampled,i_chosen,V");
  const std::string tx = slurp(out_dir / "tx_log.csv");
  EXPECT_EQ(tx.substr(0, tx.find('\n')), "k,loop_id,i_chosen,feasible_set");
  const std::string summary = slurp(out_dir / "summary.csv");
  EXPECT_NE(summary.find("\nintegrator,"), std::string::npos);
  std::istringstream lines(summary);
  std::string line;
  std::getline(lines, line);
  std::getline(lines, line);
  EXPECT_NE(line.find(",1,5,"), std::string::npos) << line;
  std::getline(lines, line);
  EXPECT_NE(line.find(",2,5,"), std::string::npos) << line;
}

TEST(CliSimulate, ZeroStateCost) {
  const auto tables = scratch_dir("sim0_tables");
  ASSERT_EQ(synth("zero_state.json", tables).code, 0);
  const auto out_dir = scratch_dir("sim0_out");
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_simulate(scenario_path("zero_state.json"), tables, out_dir, false, out, err), 0);
  EXPECT_NE(slurp(out_dir / "summary.csv").find("\nintegrator,0,5,"), std::string::npos);
}

TEST(CliSimulate, PeriodicModeNeedsNoTables) {
  const auto out_dir = scratch_dir("simp_out");
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_simulate(scenario_path("integrator_periodic5.json"), std::nullopt, out_dir,
                              false, out, err),
            0)
      << err.str();
  EXPECT_NE(slurp(out_dir / "summary.csv").find(",5,5,"), std::string::npos);
}

TEST(CliSimulate, MismatchedTables) {
  const auto tables = scratch_dir("simx_tables");
  ASSERT_EQ(synth("integrator.json", tables).code, 0);
  GainTable gt = read_gain_table(tables / "integrator.json");
  gt.alpha = 0.5;
  write_gain_table(gt, tables / "integrator.json");
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_simulate(scenario_path("integrator.json"), tables, scratch_dir("simx_out"),
                              false, out, err),
            2);
  EXPECT_EQ(cli::cmd_simulate(scenario_path("integrator.json"), std::nullopt,
                              scratch_dir("simx_out2"), false, out, err),
            2);
}

TEST(CliVerify, IntegratorAndTwoLoop) {
  const auto tables = scratch_dir("verify_tables");
  ASSERT_EQ(synth("integrator.json", tables).code, 0);
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_verify(tables, scenario_path("integrator.json"), out, err), 0) << err.str();
  EXPECT_NE(out.str().find("p*=gamma: yes"), std::string::npos);
  EXPECT_NE(out.str().find("lower=0.040000000000000001 upper=0.040000000000000001"),
            std::string::npos)
      << out.str();

  const auto two = scratch_dir("verify_two");
  ASSERT_EQ(synth("two_loop.json", two).code, 0);
  std::ostringstream out2, err2;
  EXPECT_EQ(cli::cmd_verify(two, scenario_path("two_loop.json"), out2, err2), 0) << out2.str();
  EXPECT_NE(out2.str().find("channel admissible: yes"), std::string::npos);
}

TEST(CliVerify, CorruptedGain) {
  const auto tables = scratch_dir("verify_corrupt");
  ASSERT_EQ(synth("integrator.json", tables).code, 0);
  GainTable gt = read_gain_table(tables / "integrator.json");
  gt.entries.at(2).L(0, 0) = 5.0;
  write_gain_table(gt, tables / "integrator.json");
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_verify(tables, scenario_path("integrator.json"), out, err), 4);
  EXPECT_NE(out.str().find("certificate: FAIL"), std::string::npos);
}

TEST(CliVerify, MissingTables) {
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_verify(scratch_dir("verify_empty"), scenario_path("integrator.json"), out, err),
            2);
}

TEST(CliVerify, RoundTripEpsilonIsBitwise) {
  const auto tables = scratch_dir("verify_roundtrip");
  ASSERT_EQ(synth("two_loop.json", tables).code, 0);
  const Scenario scn = load_scenario(scenario_path("two_loop.json")).scenario;
  for (const auto& spec : scn.loops) {
    const GainTable gt = read_gain_table(tables / (spec.id + ".json"));
    const auto cert = stability_certificate(gt, spec.sys, *gt.pstar);
    EXPECT_EQ(format_double(cert.epsilon), format_double(*gt.epsilon));
    EXPECT_EQ(cert.epsilon, *gt.epsilon);
    const GainTable fresh = build_gain_table(spec.sys, spec.weights, scn.I0, scn.p, spec.id);
    const auto again = stability_certificate(fresh, spec.sys, scn.p);
    EXPECT_EQ(again.epsilon, cert.epsilon);
    EXPECT_EQ(again.upper_bound, cert.upper_bound);
  }
}

TEST(CliSweep, DeterministicAcrossInvocations) {
  const auto dir = scratch_dir("sweep");
  cli::SweepRequest req;
  req.scenario = scenario_path("sweep_integrator.json");
  req.alphas = {0.0, 1.0};
  req.runs = 1;
  req.horizon = 200;
  req.out = dir / "a.csv";
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_sweep(req, out, err), 0) << err.str();
  req.out = dir / "b.csv";
  ASSERT_EQ(cli::cmd_sweep(req, out, err), 0);
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  EXPECT_EQ(slurp(dir / "a_periodic.csv"), slurp(dir / "b_periodic.csv"));
  const std::string a = slurp(dir / "a.csv");
  EXPECT_EQ(a.substr(0, a.find('\n')), "alpha,mean_interval,mean_cost,se_cost,n_runs");
}

TEST(CliSweep, MultiLoopWritesPerLoopFiles) {
  const auto dir = scratch_dir("sweep_two");
  cli::SweepRequest req;
  req.scenario = scenario_path("sweep_two_loop.json");
  req.alphas = {0.5};
  req.runs = 2;
  req.horizon = 100;
  req.out = dir / "s.csv";
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_sweep(req, out, err), 0) << err.str();
  for (const char* f : {"s.integrator.csv", "s.double_integrator.csv", "s.integrator_periodic.csv",
                        "s.double_integrator_periodic.csv"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
}

TEST(CliRun, ArgumentParsing) {
  const auto dir = scratch_dir("run_args");
  const std::string scn = scenario_path("integrator.json").string();
  const std::string out = (dir / "tables").string();
  const char* argv[] = {"selftrig", "synth", "-c", scn.c_str(), "-o", out.c_str()};
  EXPECT_EQ(cli::run(6, const_cast<char**>(argv)), 0);
  const char* bad[] = {"selftrig", "synth"};
  EXPECT_EQ(cli::run(2, const_cast<char**>(bad)), 2);
  const char* verify[] = {"selftrig", "verify", "-t", out.c_str(), "-c", scn.c_str()};
  EXPECT_EQ(cli::run(6, const_cast<char**>(verify)), 0);
  const std::string part = (dir / "part.csv").string();
  const std::string table = (dir / "tables" / "integrator.json").string();
  const char* partition[] = {"selftrig", "partition", "-t", table.c_str(), "-o", part.c_str()};
  EXPECT_EQ(cli::run(6, const_cast<char**>(partition)), 0);
  const std::string csv = slurp(part);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "x,i_star,V_1,V_2,V_3,V_4,V_5");
}

}  // namespace
}  // namespace selftrig
