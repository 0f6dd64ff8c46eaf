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

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

namespace gaussflow {

/// Strictly increasing times starting at 0.
using TimeGrid = std::vector<double>;

/// Uniform grid 0, dt, ..., T. T must be an integer multiple of dt up to 1e-9.
TimeGrid uniform_grid(double horizon, double dt);

/// Discretized Brownian driver. Column k of `increments` is B(t_{k+1}) - B(t_k).
struct BrownianPath {
  TimeGrid grid;
  Eigen::MatrixXd increments;
  std::uint64_t seed = 0;
  std::uint64_t path_id = 0;

  int dim() const { return static_cast<int>(increments.rows()); }
  std::size_t steps() const { return grid.size() - 1; }
  /// B(t_k) for every grid time, starting from B(0) = 0.
  Eigen::MatrixXd values() const;
  /// The same Brownian path observed on every `factor`-th grid time.
  BrownianPath coarsened(int factor) const;
};

/// Increments N(0, dt_k Id) drawn from the counter-based stream keyed by
/// (seed, path_id, step, axis). Throws std::invalid_argument on a grid that
/// does not start at 0 or is not strictly increasing.
BrownianPath sample_brownian(std::uint64_t seed, std::uint64_t path_id, const TimeGrid& grid, int dim);

/// Flow sample X(t_k, x) on a grid; column k is the state at t_k.
struct Trajectory {
  TimeGrid grid;
  Eigen::MatrixXd states;

  Point initial() const { return states.col(0); }
  Point at(std::size_t k) const { return states.col(static_cast<Eigen::Index>(k)); }
  Point terminal() const { return states.col(states.cols() - 1); }
};

/// Exact one-step transition X' = phi X + mu + chol xi of an affine model.
struct StepParams {
  Eigen::MatrixXd phi;         // e^{dt C}
  Eigen::VectorXd mu;          // int_0^dt e^{sC} alpha ds
  Eigen::MatrixXd sigma_step;  // int_0^dt e^{sC} sigma sigma^T e^{sC^T} ds
  Eigen::MatrixXd chol;        // chol chol^T = sigma_step
};

StepParams gaussian_step_params(const AffineModel& model, double dt);

/// Exact Gaussian stepping driven by the standard normals dB_k / sqrt(dt_k)
/// of `path`. Every initial point driven by the same path sees the same noise.
Trajectory simulate_exact(const AffineModel& model, const Point& x0, const BrownianPath& path);

using MatrixField = std::function<Eigen::MatrixXd(const Point&)>;
using VectorField = std::function<Eigen::VectorXd(const Point&)>;

/// Euler-Maruyama X_{k+1} = X_k + sigma(X_k) dB_k + b(X_k) dt_k.
/// Throws BlowUpError carrying the step index on a non-finite state.
Trajectory simulate_euler(const MatrixField& sigma, const VectorField& drift, const Point& x0,
                          const BrownianPath& path);

/// Produces the trajectory started from (or labelled by) x on a given path.
using FlowSimulator = std::function<Trajectory(const Point& x, const BrownianPath& path)>;

FlowSimulator exact_simulator(const AffineModel& model);
FlowSimulator euler_simulator(MatrixField sigma, VectorField drift);
/// dX = x dB + (alpha - X) dt with X_0 = x^2 / 2 (one-dimensional), where
/// the label x enters the diffusion coefficient.
FlowSimulator degenerate_example_simulator(double alpha);

/// M independent paths on a shared grid; path m uses path_id = m.
struct Ensemble {
  std::uint64_t seed = 0;
  int paths = 0;
  TimeGrid grid;
  int dim = 1;

  BrownianPath path(int m) const { return sample_brownian(seed, static_cast<std::uint64_t>(m), grid, dim); }
};

struct DeterminismReport {
  /// max over (x, t, axis, path) of |D_m - mean_m D_m|, D = X^x - X^0.
  double max_deviation = 0.0;
  /// max over (x, t, axis) of the across-path sample standard deviation of D.
  double across_path_std = 0.0;
  /// Same as across_path_std restricted to the final grid time.
  double terminal_std = 0.0;
  /// max |D_m(x, t) - e^{tC} x| when a model is supplied.
  std::optional<double> affine_residual;
  std::size_t points = 0;
  std::size_t paths = 0;
  std::size_t times = 0;
};

/// Measures how much X^x_t - X^0_t varies across paths under common random
/// numbers. Requires at least two paths and the origin among xs.
DeterminismReport determinism_statistic(const FlowSimulator& simulator, const std::vector<Point>& xs,
                                        const Ensemble& ensemble, const AffineModel* model = nullptr);

/// Mean over paths of the terminal gap between runs on the path and on its
/// factor-2 coarsening; a cheap strong-error proxy for Euler schemes.
double strong_error_estimate(const FlowSimulator& simulator, const Point& x, const Ensemble& ensemble);

/// CSV `t,x_1,...,x_d`, or `path_id,t,x_1,...,x_d` when path_id is given.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, std::optional<std::uint64_t> path_id = {},
                          bool header = true);

}  // namespace gaussflow
