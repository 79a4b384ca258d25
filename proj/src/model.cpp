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

#include "selftrig/model.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "selftrig/errors.hpp"

namespace selftrig {
namespace {

constexpr double kSymmetryTol = 1e-9;
constexpr double kPdRelTol = 1e-12;

void require_finite(const Matrix& M, const char* name) {
  if (!M.allFinite()) {
    throw ConfigError(std::string(name) + " has non-finite entries");
  }
}

std::string dims(const Matrix& M) {
  std::ostringstream os;
  os << M.rows() << "x" << M.cols();
  return os.str();
}

bool is_symmetric(const Matrix& M) {
  if (M.rows() != M.cols()) return false;
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  return (M - M.transpose()).cwiseAbs().maxCoeff() <= kSymmetryTol * scale;
}

void require_pd(const Matrix& M, const char* name) {
  if (!is_symmetric(M)) throw ConfigError(std::string(name) + " is not symmetric");
  if (!is_symmetric_positive_definite(M)) {
    throw ConfigError(std::string(name) + " is not positive definite");
  }
}

void check_index(int i) {
  if (i < 1) {
    throw ConfigError("downsampling factor must be >= 1, got " + std::to_string(i));
  }
}

}  // namespace

LtiSystem::LtiSystem(Matrix A, Matrix B, std::optional<Matrix> E)
    : A_(std::move(A)), B_(std::move(B)) {
  if (A_.rows() == 0 || A_.rows() != A_.cols()) {
    throw ConfigError("A must be square and non-empty, got " + dims(A_));
  }
  if (B_.rows() != A_.rows() || B_.cols() == 0) {
    throw ConfigError("B must have " + std::to_string(A_.rows()) +
                      " rows and at least one column, got " + dims(B_));
  }
  E_ = E ? std::move(*E) : Matrix::Zero(A_.rows(), 1);
  if (E_.rows() != A_.rows() || E_.cols() == 0) {
    throw ConfigError("E must have " + std::to_string(A_.rows()) +
                      " rows, got " + dims(E_));
  }
  require_finite(A_, "A");
  require_finite(B_, "B");
  require_finite(E_, "E");
}

WeightSpec::WeightSpec(Matrix Q, Matrix R, double alpha)
    : Q_(std::move(Q)), R_(std::move(R)), alpha_(alpha) {
  require_finite(Q_, "Q");
  require_finite(R_, "R");
  require_pd(Q_, "Q");
  require_pd(R_, "R");
  Q_ = symmetrized(Q_);
  R_ = symmetrized(R_);
  if (!(alpha_ >= 0.0) || !std::isfinite(alpha_)) {
    throw ConfigError("alpha must be finite and >= 0");
  }
}

WeightSpec WeightSpec::with_alpha(double alpha) const {
  return WeightSpec(Q_, R_, alpha);
}

std::pair<double, double> symmetric_eigen_range(const Matrix& M) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(M),
                                           Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return {ev.minCoeff(), ev.maxCoeff()};
}

bool is_symmetric_positive_definite(const Matrix& M) {
  if (M.rows() == 0 || !is_symmetric(M) || !M.allFinite()) return false;
  const auto [lo, hi] = symmetric_eigen_range(M);
  return hi > 0.0 && lo > kPdRelTol * hi;
}

LiftedDynamics lift_dynamics(const LtiSystem& sys, int i) {
  check_index(i);
  Matrix Ai = sys.A();
  Matrix Bi = sys.B();
  for (int j = 1; j < i; ++j) {
    Bi = sys.A() * Bi + sys.B();
    Ai = sys.A() * Ai;
  }
  return {std::move(Ai), std::move(Bi)};
}

std::vector<LiftedModel> lift_range(const LtiSystem& sys, const WeightSpec& w,
                                    int gamma) {
  check_index(gamma);
  if (w.Q().rows() != sys.n()) {
    throw ConfigError("Q must be " + std::to_string(sys.n()) + "x" +
                      std::to_string(sys.n()) + ", got " + dims(w.Q()));
  }
  if (w.R().rows() != sys.m()) {
    throw ConfigError("R must be " + std::to_string(sys.m()) + "x" +
                      std::to_string(sys.m()) + ", got " + dims(w.R()));
  }
  const Matrix& A = sys.A();
  const Matrix& B = sys.B();
  const Matrix& Q = w.Q();
  const Matrix& R = w.R();

  std::vector<LiftedModel> out;
  out.reserve(static_cast<std::size_t>(gamma));
  out.push_back({1, A, B, Q, R, Matrix::Zero(sys.n(), sys.m())});
  for (int i = 2; i <= gamma; ++i) {
    const LiftedModel& prev = out.back();
    LiftedModel next;
    next.i = i;
    next.Qi = symmetrized(prev.Qi + prev.Ai.transpose() * Q * prev.Ai);
    next.Ri = symmetrized(prev.Ri + prev.Bi.transpose() * Q * prev.Bi + R);
    next.Ni = prev.Ni + prev.Ai.transpose() * Q * prev.Bi;
    next.Ai = A * prev.Ai;
    next.Bi = A * prev.Bi + B;
    out.push_back(std::move(next));
  }
  return out;
}

LiftedModel lift(const LtiSystem& sys, const WeightSpec& w, int i) {
  auto range = lift_range(sys, w, i);
  return std::move(range.back());
}

LiftedWeights lift_weights(const LtiSystem& sys, const WeightSpec& w, int i) {
  LiftedModel lm = lift(sys, w, i);
  return {std::move(lm.Qi), std::move(lm.Ri), std::move(lm.Ni)};
}

double stage_cost_sum(const LtiSystem& sys, const WeightSpec& w,
                      const Vector& x, const Vector& u, int i) {
  if (x.size() != sys.n() || u.size() != sys.m()) {
    throw ConfigError("state/input dimension mismatch in stage_cost_sum");
  }
  const LiftedModel lm = lift(sys, w, i);
  return x.dot(lm.Qi * x) + u.dot(lm.Ri * u) + 2.0 * x.dot(lm.Ni * u);
}

}  // namespace selftrig
