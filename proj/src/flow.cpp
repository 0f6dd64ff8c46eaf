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

#include "gaussflow/flow.hpp"

#include "gaussflow/errors.hpp"
#include "gaussflow/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace gaussflow {

GaussianMixture::GaussianMixture(std::vector<GaussianComponent> components) : components_(std::move(components)) {
  if (components_.empty()) throw DimensionError("GaussianMixture: no components");
  dim_ = static_cast<int>(components_.front().mean.size());
  for (const auto& c : components_) {
    if (c.mean.size() != dim_ || c.cov.rows() != dim_ || c.cov.cols() != dim_) {
      throw DimensionError("GaussianMixture: inconsistent component dimensions");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(c.cov);
    if (llt.info() != Eigen::Success) throw NumericalError("GaussianMixture: covariance is not positive definite");
    precisions_.push_back(llt.solve(Eigen::MatrixXd::Identity(dim_, dim_)));
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    normalizers_.push_back(c.weight * std::exp(-0.5 * (dim_ * std::log(2.0 * std::numbers::pi) + log_det)));
  }
}

GaussianMixture GaussianMixture::single(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
  return GaussianMixture({GaussianComponent{1.0, std::move(mean), std::move(cov)}});
}

double GaussianMixture::mass() const {
  double m = 0.0;
  for (const auto& c : components_) m += c.weight;
  return m;
}

double GaussianMixture::operator()(const Point& x) const {
  double value = 0.0;
  for (std::size_t j = 0; j < components_.size(); ++j) {
    const Eigen::VectorXd r = x - components_[j].mean;
    value += normalizers_[j] * std::exp(-0.5 * r.dot(precisions_[j] * r));
  }
  return value;
}

ScalarField GaussianMixture::field() const {
  return [mixture = *this](const Point& x) { return mixture(x); };
}

ScalarField tabulated_field(std::vector<double> nodes, std::vector<double> values) {
  if (nodes.size() != values.size() || nodes.size() < 2) {
    throw DimensionError("tabulated_field: need matching node and value tables of length >= 2");
  }
  if (!std::is_sorted(nodes.begin(), nodes.end())) throw DimensionError("tabulated_field: nodes must increase");
  return [nodes = std::move(nodes), values = std::move(values)](const Point& x) {
    const double t = x[0];
    if (t < nodes.front() || t > nodes.back()) return 0.0;
    auto hi = std::upper_bound(nodes.begin(), nodes.end(), t);
    if (hi == nodes.end()) return values.back();
    const auto j = static_cast<std::size_t>(hi - nodes.begin());
    const double w = (t - nodes[j - 1]) / (nodes[j] - nodes[j - 1]);
    return (1.0 - w) * values[j - 1] + w * values[j];
  };
}

PushforwardDistribution::PushforwardDistribution(ScalarField psi, const AffineModel& model, double t, Point z_t)
    : psi_(std::move(psi)),
      time_(t),
      shift_(std::move(z_t)),
      inverse_flow_(matrix_exp(model.drift(), -t)),
      jacobian_(std::exp(-t * model.trace_drift())) {
  if (shift_.size() != model.dim()) throw DimensionError("PushforwardDistribution: shift dimension mismatch");
}

double PushforwardDistribution::operator()(const Point& y) const {
  return jacobian_ * psi_(inverse_flow_ * (y - shift_));
}

ScalarField PushforwardDistribution::field() const {
  return [pf = *this](const Point& y) { return pf(y); };
}

std::size_t grid_index(const TimeGrid& grid, double t) {
  const auto it = std::find_if(grid.begin(), grid.end(), [t](double g) {
    return std::abs(g - t) <= 1e-12 * std::max(1.0, std::abs(t));
  });
  if (it == grid.end()) throw std::invalid_argument("time " + std::to_string(t) + " is not on the path grid");
  return static_cast<std::size_t>(it - grid.begin());
}

PushforwardDistribution pushforward(ScalarField psi, const AffineModel& model, const BrownianPath& path, double t) {
  const auto k = grid_index(path.grid, t);
  const Trajectory base = simulate_exact(model, Point::Zero(model.dim()), path);
  return PushforwardDistribution(std::move(psi), model, path.grid[k], base.at(k));
}

PushforwardDistribution pushforward(const CoeffVec& psi, const AffineModel& model, const BrownianPath& path, double t) {
  if (psi.trunc().dim() != model.dim()) throw DimensionError("pushforward: coefficient dimension mismatch");
  return pushforward(as_field(psi), model, path, t);
}

std::vector<PushforwardDistribution> pushforward_path(const ScalarField& psi, const AffineModel& model,
                                                      const BrownianPath& path) {
  const Trajectory base = simulate_exact(model, Point::Zero(model.dim()), path);
  std::vector<PushforwardDistribution> out;
  out.reserve(path.grid.size());
  for (std::size_t k = 0; k < path.grid.size(); ++k) out.emplace_back(psi, model, path.grid[k], base.at(k));
  return out;
}

double pair_integral(const ScalarField& psi, const ScalarField& phi, const AffineModel& model,
                     const BrownianPath& path, double t, int quad_order) {
  const auto k = grid_index(path.grid, t);
  const Point z = simulate_exact(model, Point::Zero(model.dim()), path).at(k);
  const Eigen::MatrixXd flow = matrix_exp(model.drift(), path.grid[k]);
  return integrate([&](const Point& x) { return psi(x) * phi(flow * x + z); }, model.dim(), quad_order);
}

int pushforward_quad_order(const PushforwardDistribution& pf, int quad_order) {
  const auto dim = static_cast<double>(pf.shift().size());
  const double squeeze = std::max(1.0, std::pow(std::abs(pf.jacobian()), 2.0 / dim));
  return static_cast<int>(std::ceil(std::min(4.0, squeeze) * quad_order));
}

double pair_closed_form(const PushforwardDistribution& pf, const ScalarField& phi, int quad_order) {
  return integrate([&](const Point& y) { return pf(y) * phi(y); }, static_cast<int>(pf.shift().size()),
                   pushforward_quad_order(pf, quad_order));
}

CoeffVec pushforward_coeffs(const PushforwardDistribution& pf, const Truncation& trunc) {
  if (pf.shift().size() != trunc.dim()) throw DimensionError("pushforward_coeffs: dimension mismatch");
  return project([&pf](const Point& y) { return pf(y); }, trunc);
}

double spde_residual(const CoeffVec& psi, const AffineModel& model, const BrownianPath& path, double p,
                     const Truncation& trunc) {
  if (!(psi.trunc() == trunc) || trunc.dim() != model.dim()) {
    throw DimensionError("spde_residual: psi, model and truncation must agree");
  }
  require_guard_band(psi, "spde_residual");
  const auto lifted = trunc.with_degree(trunc.max_degree() + 2);
  const OperatorBundle bundle = assemble(model, lifted);
  const auto n = static_cast<Eigen::Index>(trunc.size());

  const auto flows = pushforward_path(as_field(psi), model, path);
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(n);
  CoeffVec y = pushforward_coeffs(flows.front(), lifted);
  for (std::size_t k = 0; k < path.steps(); ++k) {
    const double dt = path.grid[k + 1] - path.grid[k];
    sums += dt * (bundle.L_star.matrix * y.values()).head(n);
    for (int i = 0; i < model.dim(); ++i) {
      const double db = path.increments(i, static_cast<Eigen::Index>(k));
      sums += db * (bundle.A_star[static_cast<std::size_t>(i)].matrix * y.values()).head(n);
    }
    y = pushforward_coeffs(flows[k + 1], lifted);
  }
  const CoeffVec residual(trunc, Eigen::VectorXd(y.values().head(n) - psi.values() - sums));
  return sobolev_norm(residual, -p - 1.0);
}

void write_residual_csv(std::ostream& out, const std::vector<ResidualRow>& rows) {
  out << "path_id,dt,residual_norm,p,N\n" << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.path_id << ',' << r.dt << ',' << r.residual_norm << ',' << r.p << ',' << r.degree << '\n';
  }
}

}  // namespace gaussflow
