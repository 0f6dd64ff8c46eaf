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
#include "gaussflow/flow.hpp"
#include "gaussflow/forward.hpp"
#include "gaussflow/harness.hpp"
#include "gaussflow/hermite.hpp"
#include "gaussflow/linalg.hpp"
#include "gaussflow/operators.hpp"
#include "gaussflow/sde.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace gaussflow;

namespace {

std::vector<std::vector<int>> basis_indices(const Truncation& t) {
  std::vector<std::vector<int>> out;
  for (const auto& n : t.basis().indices()) out.push_back(n.entries());
  return out;
}

GaussianLaw make_law(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
  GaussianLaw law{std::move(mean), std::move(cov)};
  law.validate();
  return law;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hermite-spectral tools for affine stochastic flows";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DimensionError>(m, "DimensionError", base);
  py::register_exception<GuardBandError>(m, "GuardBandError", base);
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", base);
  py::register_exception<BlowUpError>(m, "BlowUpError", numerical);
  py::register_exception<ConfigError>(m, "ConfigError", base);

  py::class_<Truncation>(m, "Truncation")
      .def(py::init(&Truncation::make), py::arg("dim"), py::arg("max_degree"), py::arg("quad_order") = 0)
      .def_property_readonly("dim", &Truncation::dim)
      .def_property_readonly("max_degree", &Truncation::max_degree)
      .def_property_readonly("quad_order", &Truncation::quad_order)
      .def("__len__", &Truncation::size)
      .def("indices", &basis_indices)
      .def("with_degree", &Truncation::with_degree)
      .def("__repr__", [](const Truncation& t) {
        return "Truncation(dim=" + std::to_string(t.dim()) + ", max_degree=" + std::to_string(t.max_degree()) + ")";
      });

  py::class_<CoeffVec>(m, "CoeffVec")
      .def(py::init<Truncation, Eigen::VectorXd>(), py::arg("trunc"), py::arg("values"))
      .def_property_readonly("trunc", &CoeffVec::trunc)
      .def_property_readonly("values", [](const CoeffVec& c) { return c.values(); })
      .def("__len__", &CoeffVec::size)
      .def("__getitem__", [](const CoeffVec& c, const std::vector<int>& n) { return c.at(MultiIndex(n)); })
      .def("resized", &CoeffVec::resized)
      .def("support_degree", &CoeffVec::support_degree, py::arg("tol") = 0.0);

  py::class_<AffineModel>(m, "AffineModel")
      .def(py::init<Eigen::MatrixXd, Eigen::VectorXd, Eigen::MatrixXd>(), py::arg("sigma"), py::arg("alpha"),
           py::arg("C"))
      .def_static("brownian", &AffineModel::brownian, py::arg("dim"))
      .def_static("scalar", &AffineModel::scalar, py::arg("sigma"), py::arg("alpha"), py::arg("beta"))
      .def_property_readonly("dim", &AffineModel::dim)
      .def_property_readonly("sigma", &AffineModel::sigma)
      .def_property_readonly("alpha", &AffineModel::alpha)
      .def_property_readonly("C", &AffineModel::drift);

  py::class_<GaussianLaw>(m, "GaussianLaw")
      .def(py::init(&make_law), py::arg("mean"), py::arg("cov"))
      .def_readonly("mean", &GaussianLaw::mean)
      .def_readonly("cov", &GaussianLaw::cov);

  py::class_<GaussianMixture>(m, "GaussianMixture")
      .def(py::init([](const std::vector<std::tuple<double, Eigen::VectorXd, Eigen::MatrixXd>>& parts) {
             std::vector<GaussianComponent> comps;
             for (const auto& [w, mean, cov] : parts) comps.push_back({w, mean, cov});
             return GaussianMixture(std::move(comps));
           }),
           py::arg("components"))
      .def_static("single", &GaussianMixture::single, py::arg("mean"), py::arg("cov"))
      .def_property_readonly("dim", &GaussianMixture::dim)
      .def_property_readonly("mass", &GaussianMixture::mass)
      .def("__call__", [](const GaussianMixture& g, const Point& x) { return g(x); });

  // Hermite basis.
  m.def("hermite_functions", &hermite_functions, py::arg("nmax"), py::arg("x"));
  m.def(
      "gauss_hermite",
      [](int order) {
        const auto& r = gauss_hermite(order);
        return py::make_tuple(r.nodes, r.weights);
      },
      py::arg("order"));
  m.def("integrate", &integrate, py::arg("f"), py::arg("dim"), py::arg("quad_order"));
  m.def("project", &project, py::arg("f"), py::arg("trunc"));
  m.def("synthesize", &synthesize, py::arg("coeffs"), py::arg("x"));
  m.def("sobolev_norm", &sobolev_norm, py::arg("coeffs"), py::arg("p"));
  m.def("sobolev_inner", &sobolev_inner, py::arg("a"), py::arg("b"), py::arg("p"));
  m.def("delta_coeffs", &delta_coeffs, py::arg("x"), py::arg("trunc"));

  // Operators.
  m.def("matrix_exp", &matrix_exp, py::arg("m"), py::arg("t") = 1.0);
  m.def(
      "monotonicity_form",
      [](const CoeffVec& theta, double p, const AffineModel& model) {
        return monotonicity_form(theta, p, assemble(model, theta.trunc()));
      },
      py::arg("theta"), py::arg("p"), py::arg("model"));
  m.def(
      "estimate_cp", [](const AffineModel& model, const Truncation& t, double p) { return estimate_cp(assemble(model, t), p); },
      py::arg("model"), py::arg("trunc"), py::arg("p"));
  m.def(
      "generator_matrix",
      [](const AffineModel& model, const Truncation& t, bool adjoint) {
        const OperatorBundle b = assemble(model, t);
        return Eigen::MatrixXd((adjoint ? b.L_star : b.L).matrix);
      },
      py::arg("model"), py::arg("trunc"), py::arg("adjoint") = true,
      "Dense L (or its adjoint) from the truncation into two degrees above it.");

  // Simulation.
  m.def(
      "brownian_increments",
      [](std::uint64_t seed, std::uint64_t path_id, double horizon, double dt, int dim) {
        return sample_brownian(seed, path_id, uniform_grid(horizon, dt), dim).increments;
      },
      py::arg("seed"), py::arg("path_id"), py::arg("horizon"), py::arg("dt"), py::arg("dim"));
  m.def(
      "simulate_exact",
      [](const AffineModel& model, const Point& x0, std::uint64_t seed, std::uint64_t path_id, double horizon, double dt) {
        const auto traj = simulate_exact(model, x0, sample_brownian(seed, path_id, uniform_grid(horizon, dt), model.dim()));
        return py::make_tuple(traj.grid, traj.states);
      },
      py::arg("model"), py::arg("x0"), py::arg("seed") = 0, py::arg("path_id") = 0, py::arg("horizon") = 1.0,
      py::arg("dt") = 1e-3, "Returns (times, states) with one state column per grid time.");

  // Forward equation.
  m.def("gaussian_coeffs", py::overload_cast<const GaussianLaw&, const Truncation&>(&gaussian_coeffs), py::arg("law"),
        py::arg("trunc"));
  m.def("gaussian_coeffs", py::overload_cast<const GaussianMixture&, const Truncation&>(&gaussian_coeffs),
        py::arg("mixture"), py::arg("trunc"));
  m.def("gaussian_oracle", &gaussian_oracle, py::arg("model"), py::arg("law0"), py::arg("t"));
  m.def("solve_forward", &solve_forward, py::arg("psi"), py::arg("model"), py::arg("t"), py::arg("trunc"));
  m.def(
      "mc_expectation",
      [](const GaussianMixture& psi, const AffineModel& model, double t, int paths, std::uint64_t seed,
         const Truncation& trunc) {
        McEstimate e = [&] {
          py::gil_scoped_release release;
          return mc_expectation(psi.field(), model, t, paths, seed, trunc);
        }();
        return py::make_tuple(e.mean, e.se);
      },
      py::arg("psi"), py::arg("model"), py::arg("t"), py::arg("paths"), py::arg("seed"), py::arg("trunc"),
      "Returns (mean coefficients, standard errors).");
  m.def(
      "forward_compare",
      [](const GaussianMixture& psi, const AffineModel& model, const Truncation& trunc, double t, int paths,
         std::uint64_t seed) {
        ForwardSettings s;
        s.t = t;
        s.paths = paths;
        s.seed = seed;
        ForwardReport r = [&] {
          py::gil_scoped_release release;
          return forward_compare(psi, model, trunc, s);
        }();
        return forward_report_json(r, nlohmann::ordered_json::object()).dump();
      },
      py::arg("psi"), py::arg("model"), py::arg("trunc"), py::arg("t") = 0.5, py::arg("paths") = 10000,
      py::arg("seed") = 0, "JSON report comparing the spectral, Monte Carlo and oracle routes.");

  // Harness.
  m.def(
      "normalize_config", [](const std::string& text) { return serialize_config(parse_config(text)); },
      py::arg("text"), "Parses, validates and re-serializes a JSON config with defaults filled in.");
  m.def(
      "run_experiment",
      [](const std::string& text) {
        const ExperimentConfig config = parse_config(text);
        RunReport r = [&] {
          py::gil_scoped_release release;
          return run_experiment(config);
        }();
        return r.to_json().dump();
      },
      py::arg("text"), "Runs the configured experiment and returns report.json as text.");
}
