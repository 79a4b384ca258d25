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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "selftrig/controller.hpp"
#include "selftrig/errors.hpp"
#include "selftrig/io.hpp"
#include "selftrig/model.hpp"
#include "selftrig/scheduler.hpp"
#include "selftrig/simulator.hpp"
#include "selftrig/synthesis.hpp"

namespace py = pybind11;
using namespace selftrig;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Self-triggered MPC: lifted models, gain tables, scheduling and simulation.";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  auto config = py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<LookupError>(m, "LookupError", config.ptr());
  auto numeric = py::register_exception<NumericError>(m, "NumericError", error.ptr());
  py::register_exception<SynthesisError>(m, "SynthesisError", numeric.ptr());
  py::register_exception<CertificateError>(m, "CertificateError", error.ptr());
  py::register_exception<SchedulingError>(m, "SchedulingError", error.ptr());

  py::class_<LtiSystem>(m, "LtiSystem")
      .def(py::init<Matrix, Matrix, std::optional<Matrix>>(), py::arg("A"), py::arg("B"),
           py::arg("E") = py::none())
      .def_property_readonly("A", &LtiSystem::A)
      .def_property_readonly("B", &LtiSystem::B)
      .def_property_readonly("E", &LtiSystem::E)
      .def_property_readonly("n", &LtiSystem::n)
      .def_property_readonly("m", &LtiSystem::m);

  py::class_<WeightSpec>(m, "WeightSpec")
      .def(py::init<Matrix, Matrix, double>(), py::arg("Q"), py::arg("R"), py::arg("alpha"))
      .def_property_readonly("Q", &WeightSpec::Q)
      .def_property_readonly("R", &WeightSpec::R)
      .def_property_readonly("alpha", &WeightSpec::alpha);

  py::class_<LiftedModel>(m, "LiftedModel")
      .def_readonly("i", &LiftedModel::i)
      .def_readonly("Ai", &LiftedModel::Ai)
      .def_readonly("Bi", &LiftedModel::Bi)
      .def_readonly("Qi", &LiftedModel::Qi)
      .def_readonly("Ri", &LiftedModel::Ri)
      .def_readonly("Ni", &LiftedModel::Ni);

  m.def("lift_dynamics", [](const LtiSystem& sys, int i) {
    auto d = lift_dynamics(sys, i);
    return py::make_tuple(d.Ai, d.Bi);
  });
  m.def("lift_weights", [](const LtiSystem& sys, const WeightSpec& w, int i) {
    auto lw = lift_weights(sys, w, i);
    return py::make_tuple(lw.Qi, lw.Ri, lw.Ni);
  });
  m.def("lift_range", &lift_range, py::arg("sys"), py::arg("weights"), py::arg("gamma"));
  m.def("stage_cost_sum", &stage_cost_sum);

  m.def("downsampled_controllable", &downsampled_controllable);
  m.def("select_pstar", [](const std::vector<LtiSystem>& systems, const std::vector<int>& I0) {
    return select_pstar(systems, I0);
  });
  m.def("solve_periodic_riccati", [](const LtiSystem& sys, const WeightSpec& w, int p) {
    auto sol = solve_periodic_riccati(sys, w, p);
    return py::make_tuple(sol.P, sol.L);
  });

  py::class_<GainTable>(m, "GainTable")
      .def_readonly("loop_id", &GainTable::loop_id)
      .def_readonly("alpha", &GainTable::alpha)
      .def_readonly("p", &GainTable::p)
      .def_readonly("I0", &GainTable::I0)
      .def_readonly("Pp", &GainTable::Pp)
      .def_readonly("Lp", &GainTable::Lp)
      .def_readonly("epsilon", &GainTable::epsilon)
      .def_readonly("pstar", &GainTable::pstar)
      .def_property_readonly("gamma", &GainTable::gamma)
      .def("P", [](const GainTable& gt, int i) { return gt.at(i).P; })
      .def("L", [](const GainTable& gt, int i) { return gt.at(i).L; })
      .def("to_json", &gain_table_to_json)
      .def_static("from_json", &parse_gain_table);

  m.def("build_gain_table", &build_gain_table, py::arg("sys"), py::arg("weights"),
        py::arg("I0"), py::arg("p"), py::arg("loop_id") = "");

  py::class_<StabilityCertificate>(m, "StabilityCertificate")
      .def_readonly("pstar", &StabilityCertificate::pstar)
      .def_readonly("epsilon", &StabilityCertificate::epsilon)
      .def_readonly("lower_bound", &StabilityCertificate::lower_bound)
      .def_readonly("upper_bound", &StabilityCertificate::upper_bound)
      .def_readonly("per_i_ratio", &StabilityCertificate::per_i_ratio)
      .def_readonly("Si", &StabilityCertificate::Si);
  m.def("stability_certificate", &stability_certificate);

  py::class_<Decision>(m, "Decision")
      .def_readonly("i_star", &Decision::i_star)
      .def_readonly("u", &Decision::u)
      .def_readonly("value", &Decision::value)
      .def_readonly("values_by_i", &Decision::values_by_i);
  m.def("value_of", &value_of);
  m.def("decide", [](const GainTable& gt, const Vector& x, const std::vector<int>& feasible) {
    return decide(gt, x, feasible);
  });
  m.def("partition_1d", [](const GainTable& gt, const std::vector<double>& grid) {
    return partition_1d(gt, grid);
  });

  py::class_<ReservationLedger>(m, "ReservationLedger")
      .def(py::init<int, std::vector<int>, std::size_t>(), py::arg("p"), py::arg("I0"),
           py::arg("num_loops"))
      .def("feasible_set", &ReservationLedger::feasible_set)
      .def("reserve", &ReservationLedger::reserve)
      .def("next_tx", &ReservationLedger::next_tx);
  m.def("verify_conflict_free", [](const std::vector<std::pair<TimeStep, std::size_t>>& log) {
    std::vector<Transmission> tx;
    for (const auto& [k, l] : log) tx.push_back({k, l});
    return verify_conflict_free(tx);
  });

  m.def("step_plant", &step_plant);

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("name", &Scenario::name)
      .def_readonly("I0", &Scenario::I0)
      .def_readonly("p", &Scenario::p)
      .def_readwrite("horizon", &Scenario::horizon)
      .def_readwrite("seed", &Scenario::seed)
      .def_property_readonly("loop_ids", [](const Scenario& s) {
        std::vector<std::string> ids;
        for (const auto& l : s.loops) ids.push_back(l.id);
        return ids;
      });
  m.def("parse_scenario", [](const std::string& text) { return parse_scenario(text).scenario; });
  m.def("load_scenario",
        [](const std::filesystem::path& p) { return load_scenario(p).scenario; });
  m.def("synthesize_tables", &synthesize_tables);

  py::class_<SampleRecord>(m, "SampleRecord")
      .def_readonly("k", &SampleRecord::k)
      .def_readonly("wait", &SampleRecord::wait)
      .def_readonly("value", &SampleRecord::value)
      .def_readonly("feasible", &SampleRecord::feasible);
  py::class_<LoopTrace>(m, "LoopTrace")
      .def_readonly("id", &LoopTrace::id)
      .def_readonly("states", &LoopTrace::states)
      .def_readonly("inputs", &LoopTrace::inputs)
      .def_readonly("samples", &LoopTrace::samples)
      .def_readonly("stage_costs", &LoopTrace::stage_costs)
      .def("sample_times", &LoopTrace::sample_times);
  py::class_<TxRecord>(m, "TxRecord")
      .def_readonly("k", &TxRecord::k)
      .def_readonly("loop", &TxRecord::loop)
      .def_readonly("wait", &TxRecord::wait)
      .def_readonly("feasible", &TxRecord::feasible);
  py::class_<SimTrace>(m, "SimTrace")
      .def_readonly("loops", &SimTrace::loops)
      .def_readonly("tx_log", &SimTrace::tx_log)
      .def("conflict_free", [](const SimTrace& t) {
        return verify_conflict_free(t.transmissions());
      });

  m.def("run_self_triggered", [](const Scenario& scn, const std::vector<GainTable>& tables) {
    return run_self_triggered(scn, tables);
  });
  m.def("run_periodic", [](const Scenario& scn, int Ts) { return run_periodic(scn, Ts); });
  m.def("empiric_cost", &empiric_cost);
  m.def("average_sampling_interval", &average_sampling_interval);

  py::class_<LoopStats>(m, "LoopStats")
      .def_readonly("mean_interval", &LoopStats::mean_interval)
      .def_readonly("se_interval", &LoopStats::se_interval)
      .def_readonly("mean_cost", &LoopStats::mean_cost)
      .def_readonly("se_cost", &LoopStats::se_cost)
      .def_readonly("n_runs", &LoopStats::n_runs);
  py::class_<SweepPoint>(m, "SweepPoint")
      .def_readonly("alpha", &SweepPoint::alpha)
      .def_readonly("loops", &SweepPoint::loops)
      .def_readonly("error", &SweepPoint::error);
  py::class_<PeriodicPoint>(m, "PeriodicPoint")
      .def_readonly("Ts", &PeriodicPoint::Ts)
      .def_readonly("loops", &PeriodicPoint::loops)
      .def_readonly("error", &PeriodicPoint::error);
  py::class_<SweepSummary>(m, "SweepSummary")
      .def_readonly("loop_ids", &SweepSummary::loop_ids)
      .def_readonly("self_triggered", &SweepSummary::self_triggered)
      .def_readonly("periodic", &SweepSummary::periodic);
  m.def(
      "sweep_alpha",
      [](const Scenario& scn, const std::vector<double>& alphas, int n_runs, std::uint64_t seed,
         bool include_periodic) {
        SweepOptions opts;
        opts.include_periodic = include_periodic;
        py::gil_scoped_release release;
        return sweep_alpha(scn, alphas, n_runs, seed, opts);
      },
      py::arg("scenario"), py::arg("alphas"), py::arg("n_runs"), py::arg("seed"),
      py::arg("include_periodic") = true);
}
