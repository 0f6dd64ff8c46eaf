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
#include "gaussflow/operators.hpp"
#include "gaussflow/sde.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

namespace gaussflow {

struct GaussianComponent {
  double weight = 1.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Finite mixture of non-degenerate Gaussian densities.
class GaussianMixture {
 public:
  explicit GaussianMixture(std::vector<GaussianComponent> components);
  static GaussianMixture single(Eigen::VectorXd mean, Eigen::MatrixXd cov);

  int dim() const { return dim_; }
  const std::vector<GaussianComponent>& components() const { return components_; }
  /// Sum of weights, i.e. the integral of the density.
  double mass() const;

  double operator()(const Point& x) const;
  ScalarField field() const;

 private:
  int dim_ = 0;
  std::vector<GaussianComponent> components_;
  std::vector<Eigen::MatrixXd> precisions_;
  std::vector<double> normalizers_;
};

/// Piecewise-linear interpolant of tabulated values on increasing nodes
/// (one-dimensional), zero outside the table.
ScalarField tabulated_field(std::vector<double> nodes, std::vector<double> values);

/// y -> e^{-t tr C} psi(e^{-tC}(y - Z_t)), the law of X(t, .) pushed forward
/// from the initial density psi along one Brownian path.
class PushforwardDistribution {
 public:
  PushforwardDistribution(ScalarField psi, const AffineModel& model, double t, Point z_t);

  double time() const { return time_; }
  const Point& shift() const { return shift_; }
  const Eigen::MatrixXd& inverse_flow() const { return inverse_flow_; }
  double jacobian() const { return jacobian_; }

  double operator()(const Point& y) const;
  ScalarField field() const;

 private:
  ScalarField psi_;
  double time_;
  Point shift_;
  Eigen::MatrixXd inverse_flow_;
  double jacobian_;
};

/// Index k with grid[k] == t up to rounding; throws std::invalid_argument otherwise.
std::size_t grid_index(const TimeGrid& grid, double t);

/// Z_t is taken from simulate_exact(model, 0, path) at grid time t.
PushforwardDistribution pushforward(ScalarField psi, const AffineModel& model, const BrownianPath& path, double t);
PushforwardDistribution pushforward(const CoeffVec& psi, const AffineModel& model, const BrownianPath& path, double t);

/// One pushforward per grid time of the path.
std::vector<PushforwardDistribution> pushforward_path(const ScalarField& psi, const AffineModel& model,
                                                      const BrownianPath& path);

/// Default per-axis node count for pairings.
inline constexpr int kPairingQuadOrder = 96;

/// <Y_t(psi), phi> from the flow definition: int psi(x) phi(e^{tC} x + Z_t) dx.
double pair_integral(const ScalarField& psi, const ScalarField& phi, const AffineModel& model,
                     const BrownianPath& path, double t, int quad_order = kPairingQuadOrder);

/// Node count for integrating pf: a contracting flow narrows the density by
/// s = jacobian^(1/d) per axis, so the order grows by s^2, capped at 4x.
int pushforward_quad_order(const PushforwardDistribution& pf, int quad_order = kPairingQuadOrder);

/// <Y_t(psi), phi> from the closed form: int pf(y) phi(y) dy, on
/// pushforward_quad_order(pf, quad_order) nodes per axis.
double pair_closed_form(const PushforwardDistribution& pf, const ScalarField& phi,
                        int quad_order = kPairingQuadOrder);

CoeffVec pushforward_coeffs(const PushforwardDistribution& pf, const Truncation& trunc);

/// Norm in the (-p-1) metric of
///   Y_T - psi - sum_k sum_i A*_i(Y_{t_k}) dB^i_k - sum_k L*(Y_{t_k}) dt_k
/// with left-point sums on the path grid. Y is projected two degrees above
/// the truncation so that the degree <= N part of every operator image is exact.
double spde_residual(const CoeffVec& psi, const AffineModel& model, const BrownianPath& path, double p,
                     const Truncation& trunc);

struct ResidualRow {
  std::uint64_t path_id;
  double dt;
  double residual_norm;
  double p;
  int degree;
};

/// CSV `path_id,dt,residual_norm,p,N`.
void write_residual_csv(std::ostream& out, const std::vector<ResidualRow>& rows);

}  // namespace gaussflow
