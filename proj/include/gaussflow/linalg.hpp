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

#include <Eigen/Dense>

namespace gaussflow {

/// e^{tM} by scaling and squaring of a truncated Taylor series. The series
/// is cut once its tail bound on the scaled matrix drops below 1e-17, which
/// keeps the max-norm remainder under 1e-13 after squaring.
/// Throws NumericalError when the result overflows.
Eigen::MatrixXd matrix_exp(const Eigen::MatrixXd& m, double t = 1.0);

/// G with G G^T = s for a symmetric positive semi-definite s. Null
/// directions produce zero columns. Throws NumericalError when s is
/// asymmetric or indefinite beyond `tol` relative to its scale.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& s, double tol = 1e-12);

}  // namespace gaussflow
