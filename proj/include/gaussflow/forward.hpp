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

#include "gaussflow/flow.hpp"
#include "gaussflow/hermite.hpp"
#include "gaussflow/operators.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>

namespace gaussflow {

/// N(mean, cov); cov may be singular.
struct GaussianLaw {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  int dim() const { return static_cast<int>(mean.size()); }
  /// Throws DimensionError on inconsistent shapes or a covariance that is
  /// asymmetric beyond 1e-12 or has an eigenvalue below -1e-12.
  void validate() const;
  /// Density as a one-component mixture; requires a non-singular covariance.
  GaussianMixture density() const;
};

/// e^{t L*} psi with L* restricted to the degree-N rows (square generator).
/// psi must lie in the guard band |n| <= N - 2.
CoeffVec solve_forward(const CoeffVec& psi, const AffineModel& model, double t, const Truncation& trunc);

/// Law of X_t for X_0 ~ law0 independent of the driver.
GaussianLaw gaussian_oracle(const AffineModel& model, const GaussianLaw& law0, double t);

/// Hermite coefficients of a Gaussian density. Diagonal covariances use the
/// exact one-dimensional three-term recursion per axis; other covariances
/// fall back to quadrature at trunc.quad_order().
CoeffVec gaussian_coeffs(const GaussianLaw& law, const Truncation& trunc);
CoeffVec gaussian_coeffs(const GaussianMixture& mixture, const Truncation& trunc);

struct McEstimate {
  CoeffVec mean;
  Eigen::VectorXd se;
};

/// Average of pushforward coefficients over `paths` independent single-step
/// exact paths to time t, reduced in path_id order.
McEstimate mc_expectation(const ScalarField& psi, const AffineModel& model, double t, int paths,
                          std::uint64_t seed, const Truncation& trunc);

struct ForwardSettings {
  double t = 0.5;
  int paths = 10000;
  std::uint64_t seed = 0;
  double p = 0.75;
  double se_multiplier = 3.0;
  double truncation_slack = 1e-4;
  double oracle_rel_tol = 1e-3;
  double oracle_floor = 1e-3;
};

struct ForwardReport {
  ForwardSettings settings;
  CoeffVec spectral;
  CoeffVec mc_mean;
  Eigen::VectorXd mc_se;
  std::optional<CoeffVec> oracle;
  /// max_n |spectral_n - mc_n|
  double max_discrepancy = 0.0;
  /// max_n (|spectral_n - mc_n| - se_multiplier * se_n); pass needs <= slack.
  double max_excess = 0.0;
  /// max relative spectral/oracle gap over oracle coefficients above the floor.
  std::optional<double> oracle_rel_gap;
  bool mc_pass = false;
  bool oracle_pass = true;
  bool pass = false;
};

/// Runs the spectral, Monte Carlo and (for Gaussian psi) oracle routes.
/// The spectral route starts from psi projected in the guard band.
ForwardReport forward_compare(const GaussianMixture& psi, const AffineModel& model, const Truncation& trunc,
                              const ForwardSettings& settings);
/// Coefficient initial condition; no oracle route. psi must lie in the guard band.
ForwardReport forward_compare(const CoeffVec& psi, const AffineModel& model, const ForwardSettings& settings);

/// Structured document with keys config, spectral_coeffs, mc_coeffs, mc_se,
/// oracle_coeffs, max_discrepancy, pass; coefficient blocks are embedded CSV.
nlohmann::ordered_json forward_report_json(const ForwardReport& report, const nlohmann::ordered_json& config);

}  // namespace gaussflow
