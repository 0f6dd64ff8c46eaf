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

#include "gaussflow/errors.hpp"
#include "gaussflow/linalg.hpp"
#include "gaussflow/sde.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace gaussflow;

namespace {

AffineModel rotation_model() {
  Eigen::MatrixXd c(2, 2);
  c << 0, 1, -1, 0;
  return AffineModel(Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(1.0, 0.0), c);
}

}  // namespace

TEST_CASE("brownian paths") {
  const TimeGrid grid = uniform_grid(1.0, 0.01);
  CHECK(grid.size() == 101);
  CHECK(grid.back() == 1.0);
  const BrownianPath a = sample_brownian(3, 9, grid, 2);
  const BrownianPath b = sample_brownian(3, 9, grid, 2);
  CHECK(a.increments == b.increments);
  CHECK(a.values().col(0).isZero(0.0));
  CHECK((a.values().col(100) - a.increments.rowwise().sum()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(sample_brownian(3, 10, grid, 2).increments != a.increments);

  const BrownianPath c = a.coarsened(4);
  CHECK(c.steps() == 25);
  CHECK((c.values().col(25) - a.values().col(100)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(a.coarsened(3), std::invalid_argument);

  CHECK_THROWS_AS(uniform_grid(1.0, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(sample_brownian(0, 0, TimeGrid{0.0, 0.5, 0.5}, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample_brownian(0, 0, TimeGrid{0.1, 0.5}, 1), std::invalid_argument);
}

TEST_CASE("brownian increment variance") {
  const TimeGrid grid{0.0, 0.01};
  constexpr int m = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int k = 0; k < m; ++k) {
    const double db = sample_brownian(11, static_cast<std::uint64_t>(k), grid, 1).increments(0, 0);
    sum += db;
    sum2 += db * db;
  }
  const double var = (sum2 - sum * sum / m) / (m - 1);
  CHECK(std::abs(var - 0.01) < 0.02 * 0.01);
}

TEST_CASE("gaussian step parameters") {
  const StepParams ou = gaussian_step_params(AffineModel::scalar(1.0, 0.0, -1.0), 0.5);
  CHECK(ou.sigma_step(0, 0) == doctest::Approx(0.31606027941427883).epsilon(1e-14));
  CHECK(ou.phi(0, 0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));

  Eigen::MatrixXd sigma(2, 2);
  sigma << 1.0, 0.0, 0.5, 0.7;
  const AffineModel flat(sigma, Eigen::Vector2d(0.3, -1.0), Eigen::MatrixXd::Zero(2, 2));
  const StepParams p = gaussian_step_params(flat, 0.25);
  CHECK(p.phi.isIdentity(0.0));
  CHECK((p.mu - 0.25 * flat.alpha()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((p.sigma_step - 0.25 * flat.diffusion()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((p.chol * p.chol.transpose() - p.sigma_step).cwiseAbs().maxCoeff() < 1e-15);

  for (double beta : {-2.0, 0.5}) {
    const StepParams s = gaussian_step_params(AffineModel::scalar(0.8, 1.5, beta), 0.3);
    CHECK(s.mu[0] == doctest::Approx(1.5 * (std::exp(beta * 0.3) - 1.0) / beta).epsilon(1e-14));
    CHECK(s.sigma_step(0, 0) == doctest::Approx(0.64 * (std::exp(2 * beta * 0.3) - 1.0) / (2 * beta)).epsilon(1e-13));
  }
  // Degenerate noise factors to a zero column.
  Eigen::MatrixXd rank1(2, 2);
  rank1 << 1.0, 0.0, 1.0, 0.0;
  const StepParams r = gaussian_step_params(AffineModel(rank1, Eigen::Vector2d::Zero(), Eigen::MatrixXd::Zero(2, 2)), 1.0);
  CHECK((r.chol * r.chol.transpose() - r.sigma_step).cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(gaussian_step_params(flat, 0.0), std::invalid_argument);
}

TEST_CASE("exact stepping") {
  // Zero noise reduces to the ODE x' = alpha + C x.
  Eigen::MatrixXd c(2, 2);
  c << -0.3, 1.2, -0.8, 0.1;
  const Eigen::Vector2d alpha(0.5, -0.2);
  const AffineModel ode(Eigen::MatrixXd::Zero(2, 2), alpha, c);
  const Point x0 = Eigen::Vector2d(1.0, 2.0);
  const BrownianPath path = sample_brownian(0, 0, uniform_grid(2.0, 0.05), 2);
  const Trajectory traj = simulate_exact(ode, x0, path);
  for (std::size_t k = 0; k < traj.grid.size(); k += 7) {
    const double t = traj.grid[k];
    // x(t) = e^{tC} x0 + C^{-1}(e^{tC} - I) alpha.
    const Eigen::MatrixXd e = matrix_exp(c, t);
    const Eigen::VectorXd expected = e * x0 + c.inverse() * (e - Eigen::MatrixXd::Identity(2, 2)) * alpha;
    CHECK((traj.at(k) - expected).cwiseAbs().maxCoeff() < 1e-10);
  }

  // Pathwise flow identity on a shared path.
  const AffineModel model = rotation_model();
  const BrownianPath p2 = sample_brownian(5, 1, uniform_grid(1.0, 0.01), 2);
  const Trajectory base = simulate_exact(model, Point::Zero(2), p2);
  const Trajectory moved = simulate_exact(model, x0, p2);
  for (std::size_t k = 0; k < base.grid.size(); ++k) {
    const Eigen::VectorXd expected = matrix_exp(model.drift(), base.grid[k]) * x0;
    CHECK((moved.at(k) - base.at(k) - expected).cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK_THROWS_AS(simulate_exact(model, Point::Zero(1), p2), DimensionError);
}

TEST_CASE("OU stationary variance") {
  const AffineModel ou = AffineModel::scalar(1.0, 0.0, -1.0);
  const TimeGrid grid{0.0, 10.0};
  constexpr int m = 10000;
  double sum = 0.0, sum2 = 0.0;
  for (int k = 0; k < m; ++k) {
    const double x = simulate_exact(ou, Point::Zero(1), sample_brownian(2, static_cast<std::uint64_t>(k), grid, 1)).terminal()[0];
    sum += x;
    sum2 += x * x;
  }
  const double var = (sum2 - sum * sum / m) / (m - 1);
  const double target = (1.0 - std::exp(-20.0)) / 2.0;
  CHECK(std::abs(var - target) < 3.0 * target * std::sqrt(2.0 / (m - 1)));
}

TEST_CASE("euler scheme") {
  const AffineModel model = AffineModel::scalar(0.6, 0.4, -0.8);
  const MatrixField sigma = [&](const Point&) { return model.sigma(); };
  const VectorField drift = [&](const Point& x) -> Eigen::VectorXd { return model.alpha() + model.drift() * x; };
  const Point x0 = Point::Constant(1, 1.5);
  const BrownianPath fine = sample_brownian(9, 0, uniform_grid(1.0, 1.0 / 512), 1);

  // Refinement: the gap to exact stepping shrinks roughly linearly.
  std::vector<double> gaps;
  for (int factor : {8, 4, 2, 1}) {
    const BrownianPath p = fine.coarsened(factor);
    const Trajectory e = simulate_euler(sigma, drift, x0, p);
    const Trajectory x = simulate_exact(model, x0, p);
    gaps.push_back((e.states - x.states).cwiseAbs().maxCoeff());
  }
  for (std::size_t k = 1; k < gaps.size(); ++k) {
    const double ratio = gaps[k] / gaps[k - 1];
    CHECK(ratio > 0.35);
    CHECK(ratio < 0.65);
  }

  const Trajectory frozen = simulate_euler([](const Point&) { return Eigen::MatrixXd::Zero(1, 1); },
                                           [](const Point&) { return Eigen::VectorXd::Zero(1); }, x0, fine);
  CHECK((frozen.states.array() == 1.5).all());

  const VectorField explosive = [](const Point& x) -> Eigen::VectorXd { return x.array().square().matrix() * 1e3; };
  try {
    simulate_euler(sigma, explosive, Point::Constant(1, 10.0), fine);
    FAIL("expected blow-up");
  } catch (const BlowUpError& e) {
    CHECK(e.step() > 0);
  }
}

TEST_CASE("determinism statistic") {
  const std::vector<Point> xs{Point::Zero(2), Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(-0.5, -0.5),
                              Eigen::Vector2d(1.0, 1.0), Eigen::Vector2d(-1.0, -1.0)};
  const AffineModel model = rotation_model();
  const Ensemble ens{0, 100, uniform_grid(1.0, 0.01), 2};
  const DeterminismReport affine = determinism_statistic(exact_simulator(model), xs, ens, &model);
  CHECK(affine.across_path_std < 1e-10);
  REQUIRE(affine.affine_residual.has_value());
  CHECK(*affine.affine_residual < 1e-9);

  const DeterminismReport only_origin = determinism_statistic(exact_simulator(model), {Point::Zero(2)}, ens);
  CHECK(only_origin.across_path_std == 0.0);
  CHECK(only_origin.max_deviation == 0.0);
  CHECK_THROWS_AS(determinism_statistic(exact_simulator(model), {Eigen::Vector2d(1.0, 0.0)}, ens), std::invalid_argument);

  const Ensemble ens1{0, 200, uniform_grid(1.0, 1e-3), 1};
  const FlowSimulator sin_drift = euler_simulator([](const Point&) { return Eigen::MatrixXd::Identity(1, 1); },
                                                  [](const Point& x) -> Eigen::VectorXd { return x.array().sin().matrix(); });
  const DeterminismReport nonlinear = determinism_statistic(sin_drift, {Point::Zero(1), Point::Constant(1, 1.0)}, ens1);
  CHECK(nonlinear.terminal_std > 0.01);

  const DeterminismReport degenerate =
      determinism_statistic(degenerate_example_simulator(0.5), {Point::Zero(1), Point::Constant(1, 1.0)}, ens1);
  CHECK(degenerate.terminal_std > 0.01);

  const double strong = strong_error_estimate(sin_drift, Point::Constant(1, 1.0), ens1);
  CHECK(strong > 0.0);
  CHECK(strong < 0.01);
}

TEST_CASE("trajectory csv") {
  Trajectory t{{0.0, 0.5}, Eigen::MatrixXd::Zero(2, 2)};
  t.states(1, 1) = 0.25;
  std::ostringstream a, b;
  write_trajectory_csv(a, t);
  write_trajectory_csv(b, t, 7);
  CHECK(a.str() == "t,x_1,x_2\n0,0,0\n0.5,0,0.25\n");
  CHECK(b.str() == "path_id,t,x_1,x_2\n7,0,0,0\n7,0.5,0,0.25\n");
}
