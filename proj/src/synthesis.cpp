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

#include "selftrig/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "selftrig/errors.hpp"

namespace selftrig {
namespace {

constexpr double kRankTol = 1e-10;
constexpr double kRootOfUnityTol = 1e-8;
// Defective eigenvalues at 1 (double integrator) come back perturbed by
// roughly sqrt(machine epsilon).
constexpr double kUnitEigenTol = 1e-6;
constexpr double kPeriodicRowTol = 1e-8;

bool is_one(std::complex<double> lambda) {
  return std::abs(lambda - 1.0) < kUnitEigenTol;
}

std::vector<std::complex<double>> eigenvalues(const Matrix& A) {
  Eigen::EigenSolver<Matrix> es(A, false);
  if (es.info() != Eigen::Success) {
    throw NumericError("eigenvalue computation failed");
  }
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

std::vector<std::complex<double>> roots_of_unity(const Matrix& A, int i) {
  std::vector<std::complex<double>> out;
  for (const auto lambda : eigenvalues(A)) {
    if (is_one(lambda)) continue;
    if (std::abs(std::pow(lambda, i) - 1.0) < kRootOfUnityTol) {
      out.push_back(lambda);
    }
  }
  return out;
}

std::string format_eigs(const std::vector<std::complex<double>>& eigs) {
  std::ostringstream os;
  for (std::size_t j = 0; j < eigs.size(); ++j) {
    if (j) os << ", ";
    os << eigs[j].real();
    if (eigs[j].imag() != 0.0) {
      os << (eigs[j].imag() < 0 ? "-" : "+") << std::abs(eigs[j].imag()) << "i";
    }
  }
  return os.str();
}

double inf_norm(const Matrix& M) { return M.cwiseAbs().rowwise().sum().maxCoeff(); }

// Right-hand side of the lifted Riccati map and its gain.
GainEntry riccati_map(const LiftedModel& lm, const Matrix& P) {
  const Matrix S = lm.Ri + lm.Bi.transpose() * P * lm.Bi;
  const Matrix G = lm.Ai.transpose() * P * lm.Bi + lm.Ni;
  Eigen::LLT<Matrix> llt(symmetrized(S));
  if (llt.info() != Eigen::Success) {
    throw NumericError("R^(i) + B^(i)'PB^(i) is singular for i = " +
                       std::to_string(lm.i));
  }
  Matrix L = llt.solve(G.transpose());
  Matrix Pn = symmetrized(lm.Qi + lm.Ai.transpose() * P * lm.Ai - G * L);
  return {std::move(Pn), std::move(L)};
}

double spectral_radius(const Matrix& M) {
  double rho = 0.0;
  for (const auto lambda : eigenvalues(M)) rho = std::max(rho, std::abs(lambda));
  return rho;
}

}  // namespace

bool is_controllable(const Matrix& A, const Matrix& B) {
  const Eigen::Index n = A.rows();
  Matrix C(n, n * B.cols());
  Matrix block = B;
  for (Eigen::Index j = 0; j < n; ++j) {
    C.middleCols(j * B.cols(), B.cols()) = block;
    block = A * block;
  }
  Eigen::JacobiSVD<Matrix> svd(C);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return false;
  const Eigen::Index rank = (sv.array() > kRankTol * sv(0)).count();
  return rank == n;
}

ControllabilityReport check_downsampled_controllability(const LtiSystem& sys,
                                                        int i) {
  if (i < 1) throw ConfigError("downsampling factor must be >= 1");
  ControllabilityReport report;
  report.base_pair_controllable = is_controllable(sys.A(), sys.B());
  report.roots_of_unity = roots_of_unity(sys.A(), i);
  return report;
}

int select_pstar(std::span<const LtiSystem> systems, const std::vector<int>& I0) {
  if (I0.empty()) throw ConfigError("I0 must be non-empty");
  std::vector<int> sorted = I0;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  std::ostringstream offenders;
  for (const int i : sorted) {
    bool ok = true;
    for (std::size_t l = 0; l < systems.size(); ++l) {
      const auto bad = roots_of_unity(systems[l].A(), i);
      if (!bad.empty()) {
        ok = false;
        offenders << " i=" << i << ": loop " << l << " eigenvalues {"
                  << format_eigs(bad) << "}";
      }
    }
    if (ok) return i;
  }
  throw SynthesisError("no admissible terminal period in I0;" + offenders.str());
}

bool unit_circle_condition(const LtiSystem& sys, int gamma) {
  for (const auto lambda : eigenvalues(sys.A())) {
    if (is_one(lambda)) continue;
    if (std::abs(std::abs(lambda) - 1.0) < kRootOfUnityTol &&
        std::abs(std::pow(lambda, gamma) - 1.0) < kRootOfUnityTol) {
      return false;
    }
  }
  return true;
}

PeriodicSolution solve_periodic_riccati(const LtiSystem& sys,
                                        const WeightSpec& w, int p,
                                        const RiccatiOptions& opts) {
  const auto report = check_downsampled_controllability(sys, p);
  if (!report.base_pair_controllable) {
    throw SynthesisError("(A, B) is not controllable");
  }
  if (!report.roots_of_unity.empty()) {
    throw SynthesisError("lifted pair is not controllable at p = " +
                         std::to_string(p) + ": eigenvalues {" +
                         format_eigs(report.roots_of_unity) +
                         "} satisfy lambda^p = 1");
  }
  const LiftedModel lm = lift(sys, w, p);

  PeriodicSolution sol;
  Matrix P = lm.Qi;
  double change = 0.0;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    GainEntry next = riccati_map(lm, P);
    change = inf_norm(next.P - P) / inf_norm(next.P);
    P = std::move(next.P);
    sol.iterations = it;
    if (!P.allFinite()) break;
    if (change <= opts.tolerance) break;
  }
  if (!P.allFinite() || change > opts.tolerance) {
    std::ostringstream os;
    os << "periodic Riccati iteration did not converge for p = " << p
       << " after " << sol.iterations << " iterations (relative change "
       << change << ")";
    throw NumericError(os.str());
  }
  GainEntry final_map = riccati_map(lm, P);
  sol.residual = inf_norm(final_map.P - P) / inf_norm(P);
  sol.P = std::move(P);
  sol.L = riccati_map(lm, sol.P).L;

  const double rho = spectral_radius(lm.Ai - lm.Bi * sol.L);
  if (!(rho < 1.0)) {
    std::ostringstream os;
    os << "periodic closed loop is not stable for p = " << p
       << " (spectral radius " << rho << ")";
    throw NumericError(os.str());
  }
  return sol;
}

GainEntry one_step_gain(const LiftedModel& lm, const Matrix& P_terminal) {
  return riccati_map(lm, P_terminal);
}

const GainEntry& GainTable::at(int i) const {
  const auto it = entries.find(i);
  if (it == entries.end()) {
    throw LookupError("wait " + std::to_string(i) + " is not in the gain table" +
                      (loop_id.empty() ? "" : " of loop " + loop_id));
  }
  return it->second;
}

std::vector<int> normalized_factor_set(std::vector<int> I0) {
  if (I0.empty()) throw ConfigError("I0 must be non-empty");
  std::sort(I0.begin(), I0.end());
  I0.erase(std::unique(I0.begin(), I0.end()), I0.end());
  if (I0.front() < 1) throw ConfigError("I0 entries must be >= 1");
  return I0;
}

GainTable build_gain_table(const LtiSystem& sys, const WeightSpec& w,
                           std::vector<int> I0, int p, std::string loop_id) {
  I0 = normalized_factor_set(std::move(I0));
  if (p < 1) throw ConfigError("terminal period p must be >= 1");

  PeriodicSolution periodic;
  try {
    periodic = solve_periodic_riccati(sys, w, p);
  } catch (const SynthesisError& e) {
    throw SynthesisError((loop_id.empty() ? "" : "loop " + loop_id + ": ") +
                         e.what());
  }

  GainTable gt;
  gt.loop_id = std::move(loop_id);
  gt.n = sys.n();
  gt.m = sys.m();
  gt.alpha = w.alpha();
  gt.p = p;
  gt.I0 = I0;
  gt.Pp = periodic.P;
  gt.Lp = periodic.L;

  const auto lifted = lift_range(sys, w, I0.back());
  for (const int i : I0) {
    GainEntry entry = one_step_gain(lifted[static_cast<std::size_t>(i - 1)], gt.Pp);
    if (i == p) {
      // At i = p the one-step recursion reproduces the fixed point; store the
      // fixed point itself so the i = p row and the periodic pair coincide.
      const double dev = inf_norm(entry.P - gt.Pp) / inf_norm(gt.Pp);
      if (dev > kPeriodicRowTol) {
        throw NumericError("i = p row deviates from the periodic solution by " +
                           std::to_string(dev));
      }
      entry = {gt.Pp, gt.Lp};
    }
    gt.entries.emplace(i, std::move(entry));
  }
  return gt;
}

void validate_gain_table(const GainTable& gt) {
  if (gt.I0.empty()) throw ConfigError("gain table has empty I0");
  if (normalized_factor_set(gt.I0) != gt.I0) {
    throw ConfigError("gain table I0 must be ascending and unique");
  }
  if (gt.entries.size() != gt.I0.size()) {
    throw ConfigError("gain table must have exactly one entry per i in I0");
  }
  auto check_pair = [&](const Matrix& P, const Matrix& L, const std::string& what) {
    if (P.rows() != gt.n || P.cols() != gt.n || L.rows() != gt.m || L.cols() != gt.n) {
      throw ConfigError("gain table " + what + " has wrong dimensions");
    }
    if (!P.allFinite() || !L.allFinite()) {
      throw ConfigError("gain table " + what + " has non-finite entries");
    }
  };
  check_pair(gt.Pp, gt.Lp, "periodic pair");
  for (const int i : gt.I0) {
    const auto& e = gt.at(i);
    check_pair(e.P, e.L, "entry i=" + std::to_string(i));
    if (i == gt.p) {
      const double scale = std::max(1.0, inf_norm(gt.Pp));
      if (inf_norm(e.P - gt.Pp) > kPeriodicRowTol * scale ||
          (e.L - gt.Lp).cwiseAbs().maxCoeff() > kPeriodicRowTol * std::max(1.0, gt.Lp.cwiseAbs().maxCoeff())) {
        throw ConfigError("gain table row i = p differs from the periodic pair");
      }
    }
  }
  if (gt.alpha < 0.0 || gt.p < 1) throw ConfigError("gain table alpha/p out of range");
}

StabilityCertificate stability_certificate(const GainTable& gt,
                                           const LtiSystem& sys, int pstar) {
  if (gt.p != pstar) {
    throw ConfigError("certificate requires a table built with p = p* = " +
                      std::to_string(pstar) + ", table has p = " +
                      std::to_string(gt.p));
  }
  if (gt.n != sys.n() || gt.m != sys.m()) {
    throw ConfigError("gain table dimensions do not match the system");
  }
  const auto lifted = [&] {
    // Only the dynamics are needed here; unit weights keep lift_range happy.
    return lift_range(sys,
                      WeightSpec(Matrix::Identity(sys.n(), sys.n()),
                                 Matrix::Identity(sys.m(), sys.m()), 0.0),
                      gt.gamma());
  }();

  StabilityCertificate cert;
  cert.pstar = pstar;
  double worst = -std::numeric_limits<double>::infinity();
  int worst_i = gt.I0.front();
  for (const int i : gt.I0) {
    const auto& lm = lifted[static_cast<std::size_t>(i - 1)];
    const auto& e = gt.at(i);
    const Matrix F = lm.Ai - lm.Bi * e.L;
    const Matrix M = symmetrized(F.transpose() * gt.Pp * F);
    Eigen::LLT<Matrix> llt(symmetrized(e.P));
    if (llt.info() != Eigen::Success || !is_symmetric_positive_definite(symmetrized(e.P))) {
      throw CertificateError("P^(" + std::to_string(i) + ") is not positive definite" +
                             (gt.loop_id.empty() ? "" : " for loop " + gt.loop_id));
    }
    // C^{-1} M C^{-T} with P^(i) = C C'.
    const Matrix CinvM = llt.matrixL().solve(M);
    const Matrix W = llt.matrixL().solve(CinvM.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(W), Eigen::EigenvaluesOnly);
    const double rho = es.eigenvalues().maxCoeff();
    cert.per_i_ratio[i] = rho;
    cert.Si[i] = symmetrized(e.P) - M;
    if (rho > worst) {
      worst = rho;
      worst_i = i;
    }
  }
  if (!(worst < 1.0)) {
    std::ostringstream os;
    os << "contraction condition fails" << (gt.loop_id.empty() ? "" : " for loop " + gt.loop_id)
       << " at i = " << worst_i << " (ratio " << worst << " >= 1)";
    throw CertificateError(os.str());
  }
  cert.epsilon = std::min(1.0, 1.0 - std::max(worst, 0.0));
  const double gamma = gt.gamma();
  cert.lower_bound = gt.alpha / gamma;
  // With p* = gamma the bound collapses to alpha / gamma algebraically; take
  // that value exactly rather than through roundoff.
  cert.upper_bound = pstar == gt.gamma()
                         ? cert.lower_bound
                         : (gt.alpha / cert.epsilon) *
                               (1.0 / pstar - (1.0 - cert.epsilon) / gamma);
  return cert;
}

}  // namespace selftrig
