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

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace selftrig {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/**
 * Discrete-time LTI plant x(k+1) = A x(k) + B u(k) + E w(k).
 *
 * E is the disturbance gain; when omitted it is the n x 1 zero matrix so the
 * plant is noiseless. Instances are immutable once constructed.
 */
class LtiSystem {
 public:
  LtiSystem(Matrix A, Matrix B, std::optional<Matrix> E = std::nullopt);

  const Matrix& A() const { return A_; }
  const Matrix& B() const { return B_; }
  const Matrix& E() const { return E_; }

  int n() const { return static_cast<int>(A_.rows()); }
  int m() const { return static_cast<int>(B_.cols()); }
  int w() const { return static_cast<int>(E_.cols()); }

 private:
  Matrix A_;
  Matrix B_;
  Matrix E_;
};

/// Quadratic weights Q > 0, R > 0 and the sampling cost alpha >= 0.
class WeightSpec {
 public:
  WeightSpec(Matrix Q, Matrix R, double alpha);

  const Matrix& Q() const { return Q_; }
  const Matrix& R() const { return R_; }
  double alpha() const { return alpha_; }

  /// Same Q and R with a different sampling cost.
  WeightSpec with_alpha(double alpha) const;

 private:
  Matrix Q_;
  Matrix R_;
  double alpha_;
};

struct LiftedDynamics {
  Matrix Ai;
  Matrix Bi;
};

struct LiftedWeights {
  Matrix Qi;
  Matrix Ri;
  Matrix Ni;
};

/// The i-step compressed model: dynamics and accumulated stage-cost weights
/// for an input held constant over i steps.
struct LiftedModel {
  int i = 1;
  Matrix Ai;
  Matrix Bi;
  Matrix Qi;
  Matrix Ri;
  Matrix Ni;
};

/// A^i and sum_{q<i} A^q B.
LiftedDynamics lift_dynamics(const LtiSystem& sys, int i);

LiftedWeights lift_weights(const LtiSystem& sys, const WeightSpec& w, int i);

/// Lifted models for every factor 1..gamma, built in one forward pass.
/// Element j holds factor j+1.
std::vector<LiftedModel> lift_range(const LtiSystem& sys, const WeightSpec& w,
                                    int gamma);

LiftedModel lift(const LtiSystem& sys, const WeightSpec& w, int i);

/// x'Q^(i)x + u'R^(i)u + 2x'N^(i)u: the stage cost accumulated over i steps
/// when u is held constant from state x.
double stage_cost_sum(const LtiSystem& sys, const WeightSpec& w,
                      const Vector& x, const Vector& u, int i);

/// Smallest and largest eigenvalue of the symmetric part of M.
std::pair<double, double> symmetric_eigen_range(const Matrix& M);

/// Symmetric and smallest eigenvalue above 1e-12 times the largest.
bool is_symmetric_positive_definite(const Matrix& M);

inline Matrix symmetrized(const Matrix& M) { return 0.5 * (M + M.transpose()); }

}  // namespace selftrig
