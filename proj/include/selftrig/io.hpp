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

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "selftrig/simulator.hpp"
#include "selftrig/synthesis.hpp"

namespace selftrig {

inline constexpr int kScenarioSchemaVersion = 1;
inline constexpr int kGainTableVersion = 1;
inline constexpr const char* kGainTableFormat = "selftrig-gain-table";

/// A scenario document plus the optional output locations it names.
struct ScenarioFile {
  Scenario scenario;
  /// True when the document asked for p = p* instead of a fixed value.
  bool p_auto = false;
  std::optional<std::filesystem::path> tables_dir;
  std::optional<std::filesystem::path> results_dir;
};

/// Parses a scenario document. Unknown fields, a wrong schema_version or
/// matrices whose data length disagrees with rows*cols raise ConfigError.
ScenarioFile parse_scenario(const std::string& text);
ScenarioFile load_scenario(const std::filesystem::path& path);

/// JSON document with every real written to 17 significant digits.
std::string gain_table_to_json(const GainTable& gt);
GainTable parse_gain_table(const std::string& text);

void write_gain_table(const GainTable& gt, const std::filesystem::path& path);
GainTable read_gain_table(const std::filesystem::path& path);

/// Columns: k, x_1..x_n, u_1..u_m, sampled, i_chosen, V. The last row holds
/// x(T) with blank inputs.
void write_trace_csv(std::ostream& os, const LoopTrace& trace);

/// Columns: k, loop_id, i_chosen, feasible_set (semicolon-joined).
void write_tx_log_csv(std::ostream& os, const SimTrace& trace,
                      const std::vector<std::string>& loop_ids);

/// Columns: alpha, mean_interval, mean_cost, se_cost, n_runs for one loop.
void write_sweep_csv(std::ostream& os, const SweepSummary& summary, std::size_t loop);

/// Columns: Ts, mean_interval, mean_cost, se_cost, n_runs for one loop.
void write_periodic_sweep_csv(std::ostream& os, const SweepSummary& summary,
                              std::size_t loop);

std::string join_ints(const std::vector<int>& values, char sep = ';');
std::string format_double(double v);

}  // namespace selftrig
