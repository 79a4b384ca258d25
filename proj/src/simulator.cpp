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

#include "selftrig/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <set>
#include <thread>

#include "selftrig/errors.hpp"
#include "selftrig/random.hpp"

namespace selftrig {
namespace {

enum StreamPurpose : std::uint64_t { kNoiseStream = 1, kInitialStateStream = 2 };

constexpr std::uint64_t kPeriodicTag = 0x7065726964696300ULL;  // "peridic\0"

CounterRng stream(const RunKey& key, std::size_t loop, StreamPurpose purpose) {
  std::uint64_t k = CounterRng::derive(key.seed, key.alpha_tag);
  k = CounterRng::derive(k, key.run);
  k = CounterRng::derive(k, loop);
  return CounterRng(CounterRng::derive(k, purpose));
}

Vector initial_state(const LoopSpec& spec, const RunKey& key, std::size_t loop) {
  if (spec.x0.fixed) return *spec.x0.fixed;
  const int n = spec.sys.n();
  Vector x = Vector::Zero(n);
  if (spec.x0.variance > 0.0) {
    const CounterRng rng = stream(key, loop, kInitialStateStream);
    const double sd = std::sqrt(spec.x0.variance);
    for (int j = 0; j < n; ++j) x(j) = sd * rng.normal(static_cast<std::uint64_t>(j));
  }
  return x;
}

// Generates w(k) for one loop; all zeros when the loop is noiseless.
class NoiseSource {
 public:
  NoiseSource(const LoopSpec& spec, const RunKey& key, std::size_t loop)
      : rng_(stream(key, loop, kNoiseStream)),
        sd_(std::sqrt(spec.noise_variance)),
        omega_(Vector::Zero(spec.sys.w())) {}

  const Vector& at(TimeStep k) {
    if (sd_ > 0.0) {
      const auto w = static_cast<std::uint64_t>(omega_.size());
      for (Eigen::Index j = 0; j < omega_.size(); ++j) {
        omega_(j) = sd_ * rng_.normal(static_cast<std::uint64_t>(k) * w +
                                      static_cast<std::uint64_t>(j));
      }
    }
    return omega_;
  }

 private:
  CounterRng rng_;
  double sd_;
  Vector omega_;
};

LoopTrace make_trace(const LoopSpec& spec, TimeStep T) {
  LoopTrace tr;
  tr.id = spec.id;
  tr.states = Matrix::Zero(T + 1, spec.sys.n());
  tr.inputs = Matrix::Zero(T, spec.sys.m());
  tr.stage_costs.assign(static_cast<std::size_t>(T), 0.0);
  return tr;
}

void record_step(LoopTrace& tr, const LoopSpec& spec, TimeStep k, const Vector& x,
                 const Vector& u) {
  tr.states.row(k) = x.transpose();
  tr.inputs.row(k) = u.transpose();
  tr.stage_costs[static_cast<std::size_t>(k)] =
      x.dot(spec.weights.Q() * x) + u.dot(spec.weights.R() * u);
}

std::string step_context(const std::string& loop, TimeStep k, const char* what) {
  return "loop " + loop + " at k = " + std::to_string(k) + ": " + what;
}

unsigned worker_count(unsigned requested, std::size_t jobs) {
  unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

template <typename Fn>
void parallel_for(std::size_t jobs, unsigned threads, Fn&& fn) {
  const unsigned workers = worker_count(threads, jobs);
  if (workers <= 1) {
    for (std::size_t j = 0; j < jobs; ++j) fn(j);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t j = next++; j < jobs; j = next++) fn(j);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

LoopStats summarize(std::span<const double> costs, std::span<const double> intervals) {
  LoopStats s;
  s.n_runs = static_cast<int>(costs.size());
  const double n = static_cast<double>(costs.size());
  auto mean_se = [n](std::span<const double> v, double& mean, double& se) {
    mean = pairwise_sum(v) / n;
    if (v.size() < 2) {
      se = 0.0;
      return;
    }
    std::vector<double> sq(v.size());
    std::transform(v.begin(), v.end(), sq.begin(),
                   [mean](double x) { return (x - mean) * (x - mean); });
    se = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
  };
  mean_se(costs, s.mean_cost, s.se_cost);
  mean_se(intervals, s.mean_interval, s.se_interval);
  return s;
}

// Runs n_runs simulations through `run` and aggregates per-loop statistics.
template <typename RunFn>
std::vector<LoopStats> monte_carlo(const Scenario& scn, int n_runs, unsigned threads,
                                   RunFn&& run) {
  const std::size_t s = scn.loops.size();
  const auto runs = static_cast<std::size_t>(n_runs);
  std::vector<std::vector<double>> costs(s, std::vector<double>(runs));
  std::vector<std::vector<double>> intervals(s, std::vector<double>(runs));
  parallel_for(runs, threads, [&](std::size_t r) {
    const SimTrace tr = run(static_cast<std::uint64_t>(r));
    for (std::size_t l = 0; l < s; ++l) {
      costs[l][r] = empiric_cost(tr.loops[l], scn.loops[l].weights.Q(),
                                 scn.loops[l].weights.R());
      intervals[l][r] = average_sampling_interval(tr.loops[l], scn.gamma());
    }
  });
  std::vector<LoopStats> out;
  for (std::size_t l = 0; l < s; ++l) out.push_back(summarize(costs[l], intervals[l]));
  return out;
}

}  // namespace

void Scenario::validate() const {
  if (loops.empty()) throw ConfigError("scenario has no loops");
  normalized_factor_set(I0);
  if (p < 1) throw ConfigError("p must be >= 1");
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  std::set<std::string> ids;
  for (const auto& l : loops) {
    if (l.id.empty()) throw ConfigError("loop id must be non-empty");
    if (!ids.insert(l.id).second) throw ConfigError("duplicate loop id " + l.id);
    if (!(l.noise_variance >= 0.0)) throw ConfigError("noise variance must be >= 0");
    if (!(l.x0.variance >= 0.0)) throw ConfigError("x0 variance must be >= 0");
    if (l.x0.fixed && l.x0.fixed->size() != l.sys.n()) {
      throw ConfigError("x0 of loop " + l.id + " has wrong dimension");
    }
    if (l.weights.Q().rows() != l.sys.n() || l.weights.R().rows() != l.sys.m()) {
      throw ConfigError("weights of loop " + l.id + " do not match the plant");
    }
  }
  if (mode == Mode::kPeriodic && (periodic_ts < 1 || periodic_ts > p)) {
    throw ConfigError("periodic Ts must lie in [1, p]");
  }
}

int Scenario::gamma() const { return *std::max_element(I0.begin(), I0.end()); }

std::vector<TimeStep> LoopTrace::sample_times() const {
  std::vector<TimeStep> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.k);
  return out;
}

std::vector<Transmission> SimTrace::transmissions() const {
  std::vector<Transmission> out;
  out.reserve(tx_log.size());
  for (const auto& t : tx_log) out.push_back({t.k, t.loop});
  return out;
}

Vector step_plant(const LtiSystem& sys, const Vector& x, const Vector& u,
                  const Vector& omega) {
  if (x.size() != sys.n() || u.size() != sys.m() || omega.size() != sys.w()) {
    throw ConfigError("dimension mismatch in step_plant");
  }
  return sys.A() * x + sys.B() * u + sys.E() * omega;
}

std::vector<GainTable> synthesize_tables(const Scenario& scn) {
  scn.validate();
  std::vector<GainTable> tables;
  for (const auto& l : scn.loops) {
    tables.push_back(build_gain_table(l.sys, l.weights, scn.I0, scn.p, l.id));
  }
  return tables;
}

void check_tables(const Scenario& scn, std::span<const GainTable> tables) {
  if (tables.size() != scn.loops.size()) {
    throw ConfigError("expected " + std::to_string(scn.loops.size()) +
                      " gain tables, got " + std::to_string(tables.size()));
  }
  const auto I0 = normalized_factor_set(scn.I0);
  for (std::size_t l = 0; l < tables.size(); ++l) {
    const auto& gt = tables[l];
    const auto& spec = scn.loops[l];
    const std::string who = "gain table for loop " + spec.id;
    if (gt.n != spec.sys.n() || gt.m != spec.sys.m()) {
      throw ConfigError(who + " has mismatched dimensions");
    }
    if (gt.I0 != I0) throw ConfigError(who + " has a different I0");
    if (gt.p != scn.p) throw ConfigError(who + " has a different p");
    if (gt.alpha != spec.weights.alpha()) throw ConfigError(who + " has a different alpha");
    validate_gain_table(gt);
  }
}

SimTrace run_self_triggered(const Scenario& scn, std::span<const GainTable> tables,
                            std::optional<RunKey> key_opt) {
  scn.validate();
  check_tables(scn, tables);
  const RunKey key = key_opt.value_or(RunKey{scn.seed, 0, 0});
  const std::size_t s = scn.loops.size();
  const TimeStep T = scn.horizon;

  ReservationLedger ledger(scn.p, scn.I0, s);
  SimTrace trace;
  std::vector<Vector> x(s), u(s);
  std::vector<NoiseSource> noise;
  std::vector<TimeStep> next_sample(s, 0);
  for (std::size_t l = 0; l < s; ++l) {
    trace.loops.push_back(make_trace(scn.loops[l], T));
    x[l] = initial_state(scn.loops[l], key, l);
    u[l] = Vector::Zero(scn.loops[l].sys.m());
    noise.emplace_back(scn.loops[l], key, l);
  }

  for (TimeStep k = 0; k < T; ++k) {
    for (std::size_t l = 0; l < s; ++l) {
      if (next_sample[l] != k) continue;
      const std::string& id = scn.loops[l].id;
      try {
        std::vector<int> feasible = ledger.feasible_set(l, k);
        const Decision d = decide(tables[l], x[l], feasible);
        ledger.reserve(l, k, d.i_star);
        u[l] = d.u;
        next_sample[l] = k + d.i_star;
        if (k > 0) trace.tx_log.push_back({k, l, d.i_star, feasible});
        trace.loops[l].samples.push_back({k, d.i_star, d.value, std::move(feasible)});
      } catch (const SchedulingError& e) {
        throw SchedulingError(step_context(id, k, e.what()));
      } catch (const LookupError& e) {
        throw LookupError(step_context(id, k, e.what()));
      }
    }
    for (std::size_t l = 0; l < s; ++l) {
      record_step(trace.loops[l], scn.loops[l], k, x[l], u[l]);
      x[l] = step_plant(scn.loops[l].sys, x[l], u[l], noise[l].at(k));
    }
  }
  for (std::size_t l = 0; l < s; ++l) trace.loops[l].states.row(T) = x[l].transpose();
  return trace;
}

SimTrace run_periodic(const Scenario& scn, int Ts, std::optional<RunKey> key_opt) {
  scn.validate();
  if (Ts < 1 || Ts > scn.p) throw ConfigError("periodic Ts must lie in [1, p]");
  const std::size_t s = scn.loops.size();
  if (s > static_cast<std::size_t>(Ts)) {
    throw ConfigError("periodic baseline with " + std::to_string(s) +
                      " loops needs Ts >= " + std::to_string(s));
  }
  const RunKey key = key_opt.value_or(RunKey{scn.seed, 0, 0});
  const TimeStep T = scn.horizon;

  struct LoopLaw {
    GainEntry periodic;
    GainEntry first;  // gain for the initial phase-offset wait
  };
  std::vector<LoopLaw> laws;
  for (std::size_t l = 0; l < s; ++l) {
    const auto& spec = scn.loops[l];
    const PeriodicSolution sol = solve_periodic_riccati(spec.sys, spec.weights, Ts);
    GainEntry periodic{sol.P, sol.L};
    GainEntry first = periodic;
    if (l > 0) {
      first = one_step_gain(lift(spec.sys, spec.weights, static_cast<int>(l)), sol.P);
    }
    laws.push_back({std::move(periodic), std::move(first)});
  }

  SimTrace trace;
  std::vector<Vector> x(s), u(s);
  std::vector<NoiseSource> noise;
  std::vector<TimeStep> next_sample(s, 0);
  for (std::size_t l = 0; l < s; ++l) {
    trace.loops.push_back(make_trace(scn.loops[l], T));
    x[l] = initial_state(scn.loops[l], key, l);
    u[l] = Vector::Zero(scn.loops[l].sys.m());
    noise.emplace_back(scn.loops[l], key, l);
  }

  for (TimeStep k = 0; k < T; ++k) {
    for (std::size_t l = 0; l < s; ++l) {
      if (next_sample[l] != k) continue;
      const bool offset = (k == 0 && l > 0);
      const int wait = offset ? static_cast<int>(l) : Ts;
      const GainEntry& law = offset ? laws[l].first : laws[l].periodic;
      u[l] = -law.L * x[l];
      const double value = scn.loops[l].weights.alpha() / wait + x[l].dot(law.P * x[l]);
      next_sample[l] = k + wait;
      if (k > 0) trace.tx_log.push_back({k, l, wait, {wait}});
      trace.loops[l].samples.push_back({k, wait, value, {wait}});
    }
    for (std::size_t l = 0; l < s; ++l) {
      record_step(trace.loops[l], scn.loops[l], k, x[l], u[l]);
      x[l] = step_plant(scn.loops[l].sys, x[l], u[l], noise[l].at(k));
    }
  }
  for (std::size_t l = 0; l < s; ++l) trace.loops[l].states.row(T) = x[l].transpose();
  return trace;
}

SimTrace run_scenario(const Scenario& scn, std::span<const GainTable> tables,
                      std::optional<RunKey> key) {
  if (scn.mode == Mode::kPeriodic) return run_periodic(scn, scn.periodic_ts, key);
  return run_self_triggered(scn, tables, key);
}

double empiric_cost(const LoopTrace& trace, const Matrix& Q, const Matrix& R) {
  const Eigen::Index T = trace.inputs.rows();
  if (T == 0) return 0.0;
  std::vector<double> terms(static_cast<std::size_t>(T));
  for (Eigen::Index k = 0; k < T; ++k) {
    const Vector x = trace.states.row(k).transpose();
    const Vector u = trace.inputs.row(k).transpose();
    terms[static_cast<std::size_t>(k)] = x.dot(Q * x) + u.dot(R * u);
  }
  return pairwise_sum(terms) / static_cast<double>(T);
}

double average_sampling_interval(const LoopTrace& trace, int gamma) {
  if (trace.samples.size() < 2) return static_cast<double>(gamma);
  const auto span = trace.samples.back().k - trace.samples.front().k;
  return static_cast<double>(span) / static_cast<double>(trace.samples.size() - 1);
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double acc = 0.0;
    for (const double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

SweepSummary sweep_alpha(const Scenario& tmpl, std::span<const double> alphas,
                         int n_runs, std::uint64_t seed, const SweepOptions& opts) {
  tmpl.validate();
  if (n_runs < 1) throw ConfigError("n_runs must be >= 1");
  if (alphas.empty()) throw ConfigError("alpha list is empty");
  for (std::size_t j = 0; j < alphas.size(); ++j) {
    if (!(alphas[j] >= 0.0) || !std::isfinite(alphas[j])) {
      throw ConfigError("alphas must be finite and nonnegative");
    }
    if (j > 0 && alphas[j] < alphas[j - 1]) throw ConfigError("alphas must be ascending");
  }

  SweepSummary out;
  for (const auto& l : tmpl.loops) out.loop_ids.push_back(l.id);

  for (const double alpha : alphas) {
    Scenario scn = tmpl;
    scn.mode = Mode::kSelfTriggered;
    for (auto& l : scn.loops) l.weights = l.weights.with_alpha(alpha);
    SweepPoint point;
    point.alpha = alpha;
    try {
      const std::vector<GainTable> tables = synthesize_tables(scn);
      const std::uint64_t tag = std::bit_cast<std::uint64_t>(alpha);
      point.loops = monte_carlo(scn, n_runs, opts.threads, [&](std::uint64_t r) {
        return run_self_triggered(scn, tables, RunKey{seed, tag, r});
      });
    } catch (const Error& e) {
      point.error = e.what();
    }
    out.self_triggered.push_back(std::move(point));
  }

  if (opts.include_periodic) {
    const int first_ts = static_cast<int>(tmpl.loops.size());
    for (int Ts = first_ts; Ts <= tmpl.p; ++Ts) {
      PeriodicPoint point;
      point.Ts = Ts;
      try {
        const std::uint64_t tag =
            CounterRng::derive(kPeriodicTag, static_cast<std::uint64_t>(Ts));
        point.loops = monte_carlo(tmpl, n_runs, opts.threads, [&](std::uint64_t r) {
          return run_periodic(tmpl, Ts, RunKey{seed, tag, r});
        });
      } catch (const Error& e) {
        point.error = e.what();
      }
      out.periodic.push_back(std::move(point));
    }
  }
  return out;
}

}  // namespace selftrig
