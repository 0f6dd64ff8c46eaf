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

#include "gaussflow/linalg.hpp"

#include "gaussflow/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace gaussflow {

Eigen::MatrixXd matrix_exp(const Eigen::MatrixXd& m, double t) {
  if (m.rows() != m.cols()) throw DimensionError("matrix_exp: matrix is not square");
  if (!m.allFinite() || !std::isfinite(t)) throw NumericalError("matrix_exp: non-finite input");
  const auto n = m.rows();
  Eigen::MatrixXd a = t * m;
  // Induced infinity norm bounds every power: ||A^k|| <= ||A||^k.
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  a /= std::ldexp(1.0, squarings);
  const double theta = norm / std::ldexp(1.0, squarings);

  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  double term_bound = 1.0;
  for (int k = 1; k < 64; ++k) {
    term = term * a / static_cast<double>(k);
    result += term;
    term_bound *= theta / k;
    // Tail sum_{j>k} theta^j/j! <= term_bound * theta/(k+1) / (1 - theta/(k+2)).
    const double tail = term_bound * theta / (k + 1) / (1.0 - theta / (k + 2));
    if (tail < 1e-17) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  if (!result.allFinite()) throw NumericalError("matrix_exp: overflow");
  return result;
}

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& s, double tol) {
  if (s.rows() != s.cols()) throw DimensionError("psd_factor: matrix is not square");
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > tol * scale) {
    throw NumericalError("psd_factor: matrix asymmetric beyond tolerance");
  }
  const Eigen::MatrixXd sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) throw NumericalError("psd_factor: eigen decomposition failed");
  Eigen::VectorXd lambda = eig.eigenvalues();
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda[i] < -tol * scale) throw NumericalError("psd_factor: matrix is indefinite");
    lambda[i] = lambda[i] > 0.0 ? std::sqrt(lambda[i]) : 0.0;
  }
  return eig.eigenvectors() * lambda.asDiagonal();
}

}  // namespace gaussflow
