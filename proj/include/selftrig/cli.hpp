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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace selftrig::cli {

namespace fs = std::filesystem;

/// Each command returns a process exit code (see ExitCode) and never throws
/// library errors; diagnostics go to `err`.
int cmd_synth(const fs::path& scenario, const fs::path& out_dir, std::ostream& out,
              std::ostream& err);

int cmd_simulate(const fs::path& scenario, const std::optional<fs::path>& tables_dir,
                 const fs::path& out_dir, bool gnuplot, std::ostream& out,
                 std::ostream& err);

struct SweepRequest {
  fs::path scenario;
  std::vector<double> alphas;
  std::optional<int> runs;
  std::optional<std::uint64_t> seed;
  std::optional<long> horizon;
  fs::path out;
  unsigned threads = 0;
};

int cmd_sweep(const SweepRequest& req, std::ostream& out, std::ostream& err);

int cmd_verify(const fs::path& tables_dir, const fs::path& scenario, std::ostream& out,
               std::ostream& err);

int cmd_partition(const fs::path& table, double xmin, double xmax, int points,
                  const fs::path& out_csv, std::ostream& out, std::ostream& err);

/// True when SELFTRIG_FULL_SCALE=1 is set in the environment.
bool full_scale_requested();

/// Parses argv and dispatches to a command.
int run(int argc, char** argv);

}  // namespace selftrig::cli
