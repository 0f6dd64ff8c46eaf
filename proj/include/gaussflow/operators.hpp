/*
 * Copyright 2026 The gaussflow Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "gaussflow/hermite.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <iosfwd>
#include <vector>

namespace gaussflow {

/// Coefficients of dX = sigma dB + (alpha + C X) dt with constant sigma.
/// The scalar-drift case b(x) = alpha + beta x is C = beta * Identity.
class AffineModel {
 public:
  AffineModel(Eigen::MatrixXd sigma, Eigen::VectorXd alpha, Eigen::MatrixXd drift);

  /// sigma = Id, alpha = 0, C = 0.
  static AffineModel brownian(int dim);
  /// One-dimensional dX = sigma dB + (alpha + beta X) dt.
  static AffineModel scalar(double sigma, double alpha, double beta);

  int dim() const { return static_cast<int>(alpha_.size()); }
  const Eigen::MatrixXd& sigma() const { return sigma_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }
  const Eigen::MatrixXd& drift() const { return drift_; }
  double trace_drift() const { return trace_drift_; }
  /// sigma sigma^T
  Eigen::MatrixXd diffusion() const { return sigma_ * sigma_.transpose(); }

 private:
  Eigen::MatrixXd sigma_;
  Eigen::VectorXd alpha_;
  Eigen::MatrixXd drift_;
  double trace_drift_;
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

/// Linear map from the degree-N basis to the degree-(N + bandwidth) basis.
struct OperatorMatrix {
  Truncation trunc_in;
  Truncation trunc_out;
  int bandwidth;
  SparseMatrix matrix;

  CoeffVec apply(const CoeffVec& c) const;
  /// Rows restricted to the input truncation, i.e. the square generator.
  Eigen::MatrixXd square_dense() const;
};

/// Matrix of d/dx_axis (axis is 0-based).
OperatorMatrix build_partial(int axis, const Truncation& trunc);
/// Matrix of multiplication by x_axis.
OperatorMatrix build_multiply(int axis, const Truncation& trunc);

/// Generators and adjoints of an affine model on a truncated basis.
/// A_i and A*_i map degree N to N+1; L and L* map degree N to N+2.
struct OperatorBundle {
  AffineModel model;
  Truncation trunc;
  std::vector<OperatorMatrix> A;
  OperatorMatrix L;
  std::vector<OperatorMatrix> A_star;
  OperatorMatrix L_star;
};

OperatorBundle assemble(const AffineModel& model, const Truncation& trunc);

/// Throws GuardBandError unless theta vanishes for |n| > N - 2.
void require_guard_band(const CoeffVec& theta, const char* where);

/// 2 <theta, L* theta>_p + sum_i ||A*_i theta||_p^2.
double monotonicity_form(const CoeffVec& theta, double p, const OperatorBundle& bundle);

/// Largest value of the monotonicity form over the guard-banded subspace
/// with ||theta||_p = 1. Throws NumericalError when the eigen solve fails.
double estimate_cp(const OperatorBundle& bundle, double p);

/// CSV `row_index,col_index,value` with basis ordinals, column-major order.
void write_operator_csv(std::ostream& out, const OperatorMatrix& op);

}  // namespace gaussflow
