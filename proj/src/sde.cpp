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

#include "gaussflow/sde.hpp"

#include "gaussflow/errors.hpp"
#include "gaussflow/linalg.hpp"
#include "gaussflow/parallel.hpp"
#include "gaussflow/rng.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>

namespace gaussflow {

namespace {

void validate_grid(const TimeGrid& grid) {
  if (grid.size() < 2) throw std::invalid_argument("time grid needs at least two points");
  if (grid.front() != 0.0) throw std::invalid_argument("time grid must start at 0");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) {
      throw std::invalid_argument("time grid is not strictly increasing at index " + std::to_string(k));
    }
  }
}

bool same_step(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

Eigen::VectorXd standard_normals(const BrownianPath& path, std::size_t k) {
  const double dt = path.grid[k + 1] - path.grid[k];
  return path.increments.col(static_cast<Eigen::Index>(k)) / std::sqrt(dt);
}

}  // namespace

TimeGrid uniform_grid(double horizon, double dt) {
  if (!(dt > 0.0) || !(horizon > 0.0)) throw std::invalid_argument("uniform_grid: horizon and dt must be positive");
  const double steps_real = horizon / dt;
  const auto steps = static_cast<std::size_t>(std::llround(steps_real));
  if (steps == 0 || std::abs(steps_real - static_cast<double>(steps)) > 1e-9 * steps_real) {
    throw std::invalid_argument("uniform_grid: horizon is not a multiple of dt");
  }
  TimeGrid grid(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) grid[k] = horizon * static_cast<double>(k) / static_cast<double>(steps);
  return grid;
}

Eigen::MatrixXd BrownianPath::values() const {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(dim(), static_cast<Eigen::Index>(grid.size()));
  for (Eigen::Index k = 0; k < increments.cols(); ++k) b.col(k + 1) = b.col(k) + increments.col(k);
  return b;
}

BrownianPath BrownianPath::coarsened(int factor) const {
  if (factor < 1 || steps() % static_cast<std::size_t>(factor) != 0) {
    throw std::invalid_argument("coarsened: factor must divide the number of steps");
  }
  const auto coarse_steps = steps() / static_cast<std::size_t>(factor);
  BrownianPath out;
  out.seed = seed;
  out.path_id = path_id;
  out.grid.resize(coarse_steps + 1);
  out.increments = Eigen::MatrixXd::Zero(dim(), static_cast<Eigen::Index>(coarse_steps));
  for (std::size_t k = 0; k <= coarse_steps; ++k) out.grid[k] = grid[k * static_cast<std::size_t>(factor)];
  for (std::size_t k = 0; k < coarse_steps; ++k) {
    for (int j = 0; j < factor; ++j) {
      out.increments.col(static_cast<Eigen::Index>(k)) +=
          increments.col(static_cast<Eigen::Index>(k * static_cast<std::size_t>(factor) + static_cast<std::size_t>(j)));
    }
  }
  return out;
}

BrownianPath sample_brownian(std::uint64_t seed, std::uint64_t path_id, const TimeGrid& grid, int dim) {
  validate_grid(grid);
  if (dim < 1) throw DimensionError("sample_brownian: dimension must be positive");
  BrownianPath path;
  path.grid = grid;
  path.seed = seed;
  path.path_id = path_id;
  path.increments.resize(dim, static_cast<Eigen::Index>(grid.size() - 1));
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double scale = std::sqrt(grid[k + 1] - grid[k]);
    for (int a = 0; a < dim; ++a) {
      path.increments(a, static_cast<Eigen::Index>(k)) =
          scale * keyed_normal(seed, path_id, static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(a));
    }
  }
  return path;
}

StepParams gaussian_step_params(const AffineModel& model, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("gaussian_step_params: dt must be positive");
  const int d = model.dim();
  // Block generator [[C, Q, alpha], [0, -C^T, 0], [0, 0, 0]]. Its exponential
  // holds e^{dt C}, the drift integral in the last column, and
  // G = int_0^dt e^{(dt-s)C} Q e^{-s C^T} ds with Sigma = G e^{dt C^T}.
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(2 * d + 1, 2 * d + 1);
  block.topLeftCorner(d, d) = model.drift();
  block.block(0, d, d, d) = model.diffusion();
  block.block(0, 2 * d, d, 1) = model.alpha();
  block.block(d, d, d, d) = -model.drift().transpose();
  const Eigen::MatrixXd e = matrix_exp(block, dt);

  StepParams params;
  params.phi = e.topLeftCorner(d, d);
  params.mu = e.block(0, 2 * d, d, 1);
  const Eigen::MatrixXd raw = e.block(0, d, d, d) * params.phi.transpose();
  // Asymmetry here is pure rounding; larger asymmetry signals a broken exponential.
  const double scale = std::max(1.0, raw.cwiseAbs().maxCoeff());
  if ((raw - raw.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw NumericalError("gaussian_step_params: step covariance asymmetric beyond 1e-12");
  }
  params.sigma_step = 0.5 * (raw + raw.transpose());
  params.chol = psd_factor(params.sigma_step);
  return params;
}

Trajectory simulate_exact(const AffineModel& model, const Point& x0, const BrownianPath& path) {
  if (x0.size() != model.dim() || path.dim() != model.dim()) {
    throw DimensionError("simulate_exact: model, initial point and path dimensions differ");
  }
  Trajectory traj;
  traj.grid = path.grid;
  traj.states.resize(model.dim(), static_cast<Eigen::Index>(path.grid.size()));
  traj.states.col(0) = x0;
  double cached_dt = -1.0;
  StepParams params;
  for (std::size_t k = 0; k < path.steps(); ++k) {
    const double dt = path.grid[k + 1] - path.grid[k];
    if (!same_step(dt, cached_dt)) {
      params = gaussian_step_params(model, dt);
      cached_dt = dt;
    }
    const auto col = static_cast<Eigen::Index>(k);
    traj.states.col(col + 1) = params.phi * traj.states.col(col) + params.mu + params.chol * standard_normals(path, k);
  }
  return traj;
}

Trajectory simulate_euler(const MatrixField& sigma, const VectorField& drift, const Point& x0,
                          const BrownianPath& path) {
  const int d = static_cast<int>(x0.size());
  if (path.dim() != d) throw DimensionError("simulate_euler: initial point and path dimensions differ");
  Trajectory traj;
  traj.grid = path.grid;
  traj.states.resize(d, static_cast<Eigen::Index>(path.grid.size()));
  traj.states.col(0) = x0;
  Point x = x0;
  for (std::size_t k = 0; k < path.steps(); ++k) {
    const double dt = path.grid[k + 1] - path.grid[k];
    const auto col = static_cast<Eigen::Index>(k);
    x = x + sigma(x) * path.increments.col(col) + drift(x) * dt;
    if (!x.allFinite()) throw BlowUpError("simulate_euler: non-finite state", k + 1);
    traj.states.col(col + 1) = x;
  }
  return traj;
}

FlowSimulator exact_simulator(const AffineModel& model) {
  return [model](const Point& x, const BrownianPath& path) { return simulate_exact(model, x, path); };
}

FlowSimulator euler_simulator(MatrixField sigma, VectorField drift) {
  return [sigma = std::move(sigma), drift = std::move(drift)](const Point& x, const BrownianPath& path) {
    return simulate_euler(sigma, drift, x, path);
  };
}

FlowSimulator degenerate_example_simulator(double alpha) {
  return [alpha](const Point& label, const BrownianPath& path) {
    if (label.size() != 1) throw DimensionError("degenerate example is one-dimensional");
    const double x = label[0];
    const MatrixField sigma = [x](const Point&) { return Eigen::MatrixXd::Constant(1, 1, x); };
    const VectorField drift = [alpha](const Point& y) { return Eigen::VectorXd::Constant(1, alpha - y[0]); };
    return simulate_euler(sigma, drift, Point::Constant(1, 0.5 * x * x), path);
  };
}

DeterminismReport determinism_statistic(const FlowSimulator& simulator, const std::vector<Point>& xs,
                                        const Ensemble& ensemble, const AffineModel* model) {
  if (ensemble.paths < 2) throw std::invalid_argument("determinism_statistic: needs at least two paths");
  const int d = ensemble.dim;
  const auto origin = std::find_if(xs.begin(), xs.end(), [](const Point& x) { return x.isZero(0.0); });
  if (origin == xs.end()) throw std::invalid_argument("determinism_statistic: xs must contain the origin");
  for (const auto& x : xs) {
    if (x.size() != d) throw DimensionError("determinism_statistic: point dimension mismatch");
  }

  const auto paths = static_cast<std::size_t>(ensemble.paths);
  const auto times = ensemble.grid.size();
  const auto rows = static_cast<Eigen::Index>(xs.size()) * d;
  // diffs[m](x * d + axis, k) = X^x - X^0 on path m.
  std::vector<Eigen::MatrixXd> diffs(paths);
  parallel_for(paths, [&](std::size_t m) {
    const auto path = ensemble.path(static_cast<int>(m));
    const Trajectory base = simulator(Point::Zero(d), path);
    Eigen::MatrixXd out(rows, static_cast<Eigen::Index>(times));
    for (std::size_t j = 0; j < xs.size(); ++j) {
      out.middleRows(static_cast<Eigen::Index>(j) * d, d) = simulator(xs[j], path).states - base.states;
    }
    diffs[m] = std::move(out);
  });

  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(times));
  for (const auto& dm : diffs) mean += dm;
  mean /= static_cast<double>(paths);
  Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(times));
  DeterminismReport report;
  for (const auto& dm : diffs) {
    const Eigen::MatrixXd dev = dm - mean;
    report.max_deviation = std::max(report.max_deviation, dev.cwiseAbs().maxCoeff());
    sq += dev.cwiseProduct(dev);
  }
  const Eigen::MatrixXd std_dev = (sq / static_cast<double>(paths - 1)).cwiseSqrt();
  report.across_path_std = std_dev.maxCoeff();
  report.terminal_std = std_dev.col(std_dev.cols() - 1).maxCoeff();

  if (model != nullptr) {
    double residual = 0.0;
    for (std::size_t k = 0; k < times; ++k) {
      const Eigen::MatrixXd flow = matrix_exp(model->drift(), ensemble.grid[k]);
      for (std::size_t j = 0; j < xs.size(); ++j) {
        const Eigen::VectorXd predicted = flow * xs[j];
        for (const auto& dm : diffs) {
          const Eigen::VectorXd got =
              dm.block(static_cast<Eigen::Index>(j) * d, static_cast<Eigen::Index>(k), d, 1);
          residual = std::max(residual, (got - predicted).cwiseAbs().maxCoeff());
        }
      }
    }
    report.affine_residual = residual;
  }
  report.points = xs.size();
  report.paths = paths;
  report.times = times;
  return report;
}

double strong_error_estimate(const FlowSimulator& simulator, const Point& x, const Ensemble& ensemble) {
  const auto paths = static_cast<std::size_t>(ensemble.paths);
  std::vector<double> gaps(paths);
  parallel_for(paths, [&](std::size_t m) {
    const auto fine = ensemble.path(static_cast<int>(m));
    const Point a = simulator(x, fine).terminal();
    const Point b = simulator(x, fine.coarsened(2)).terminal();
    gaps[m] = (a - b).cwiseAbs().maxCoeff();
  });
  double sum = 0.0;
  for (double g : gaps) sum += g;
  return sum / static_cast<double>(paths);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, std::optional<std::uint64_t> path_id,
                          bool header) {
  const auto d = traj.states.rows();
  if (header) {
    if (path_id) out << "path_id,";
    out << 't';
    for (Eigen::Index a = 1; a <= d; ++a) out << ",x_" << a;
    out << '\n';
  }
  out << std::setprecision(17);
  for (std::size_t k = 0; k < traj.grid.size(); ++k) {
    if (path_id) out << *path_id << ',';
    out << traj.grid[k];
    for (Eigen::Index a = 0; a < d; ++a) out << ',' << traj.states(a, static_cast<Eigen::Index>(k));
    out << '\n';
  }
}

}  // namespace gaussflow
