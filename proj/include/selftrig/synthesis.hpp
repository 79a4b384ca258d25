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

#include <complex>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "selftrig/model.hpp"

namespace selftrig {

/// Outcome of the controllability test for the lifted pair (A^i, B^(i)).
struct ControllabilityReport {
  bool base_pair_controllable = false;
  /// Eigenvalues lambda != 1 of A with lambda^i == 1.
  std::vector<std::complex<double>> roots_of_unity;

  bool controllable() const {
    return base_pair_controllable && roots_of_unity.empty();
  }
};

/// Rank test on [B, AB, ..., A^{n-1}B] with threshold 1e-10 * sigma_max.
bool is_controllable(const Matrix& A, const Matrix& B);

ControllabilityReport check_downsampled_controllability(const LtiSystem& sys,
                                                        int i);

inline bool downsampled_controllable(const LtiSystem& sys, int i) {
  return check_downsampled_controllability(sys, i).controllable();
}

/// Largest i in I0 such that no eigenvalue lambda != 1 of any system has
/// lambda^i == 1. Throws SynthesisError when no factor qualifies.
int select_pstar(std::span<const LtiSystem> systems, const std::vector<int>& I0);

/// True when A has no eigenvalue other than 1 on the unit circle whose
/// argument is a multiple of 2*pi/gamma. This guarantees p* = gamma.
bool unit_circle_condition(const LtiSystem& sys, int gamma);

struct PeriodicSolution {
  Matrix P;
  Matrix L;
  int iterations = 0;
  /// ||P - RHS(P)||_inf / ||P||_inf at the returned P.
  double residual = 0.0;
};

struct RiccatiOptions {
  int max_iterations = 100000;
  double tolerance = 1e-12;
};

/// Stabilizing fixed point of the lifted Riccati equation with cross term
/// over period p, by value iteration from P = Q^(p).
PeriodicSolution solve_periodic_riccati(const LtiSystem& sys,
                                        const WeightSpec& w, int p,
                                        const RiccatiOptions& opts = {});

struct GainEntry {
  Matrix P;
  Matrix L;
};

/// One step of the Riccati recursion over a lifted model seeded with the
/// terminal cost P_terminal. Returns (P^(i), L^(i)).
GainEntry one_step_gain(const LiftedModel& lm, const Matrix& P_terminal);

/// Offline lookup table of (P^(i), L^(i)) for one loop.
struct GainTable {
  std::string loop_id;
  int n = 0;
  int m = 0;
  double alpha = 0.0;
  int p = 1;
  std::vector<int> I0;  // ascending, unique
  std::map<int, GainEntry> entries;
  Matrix Pp;
  Matrix Lp;
  std::optional<double> epsilon;
  std::optional<int> pstar;

  int gamma() const { return I0.back(); }
  bool contains(int i) const { return entries.count(i) != 0; }
  /// Throws LookupError for a wait not in the table.
  const GainEntry& at(int i) const;
};

/// Normalizes a factor set: sorted, unique, all >= 1, non-empty.
std::vector<int> normalized_factor_set(std::vector<int> I0);

GainTable build_gain_table(const LtiSystem& sys, const WeightSpec& w,
                           std::vector<int> I0, int p,
                           std::string loop_id = {});

/// Checks structural invariants of a table (one entry per factor, gamma,
/// i = p row equal to the periodic pair, symmetric P). Throws ConfigError.
void validate_gain_table(const GainTable& gt);

struct StabilityCertificate {
  int pstar = 1;
  double epsilon = 1.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  /// Largest generalized eigenvalue of (F_i' P^(p*) F_i, P^(i)).
  std::map<int, double> per_i_ratio;
  /// S^(i) = P^(i) - F_i' P^(p*) F_i.
  std::map<int, Matrix> Si;
};

/// Contraction certificate for a table built with p = pstar. Throws
/// CertificateError when some ratio reaches 1 or some P^(i) is not PD.
StabilityCertificate stability_certificate(const GainTable& gt,
                                           const LtiSystem& sys, int pstar);

}  // namespace selftrig
