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

#include "gaussflow/harness.hpp"

#include "gaussflow/errors.hpp"
#include "gaussflow/forward.hpp"
#include "gaussflow/hermite.hpp"
#include "gaussflow/linalg.hpp"
#include "gaussflow/parallel.hpp"
#include "gaussflow/rng.hpp"
#include "gaussflow/sde.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace gaussflow {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;
using json = nlohmann::json;

namespace {

const std::map<Experiment, std::string>& experiment_names() {
  static const std::map<Experiment, std::string> names{
      {Experiment::kSimulate, "simulate"},         {Experiment::kDeterminism, "determinism"},
      {Experiment::kMonotonicity, "monotonicity"}, {Experiment::kDeltaNorms, "delta-norms"},
      {Experiment::kSpdeResidual, "spde-residual"}, {Experiment::kForwardCompare, "forward-compare"}};
  return names;
}

const std::map<ModelKind, std::string>& kind_names() {
  static const std::map<ModelKind, std::string> names{
      {ModelKind::kAffine, "affine"}, {ModelKind::kSinDrift, "sin-drift"}, {ModelKind::kDegenerate, "degenerate"}};
  return names;
}

// Threshold names and defaults per experiment. A NaN default marks a value
// derived at run time.
const std::map<std::string, double>& threshold_defaults(Experiment e) {
  static const std::map<Experiment, std::map<std::string, double>> table{
      {Experiment::kSimulate, {{"moment_se_multiplier", 3.0}}},
      {Experiment::kDeterminism, {{"deterministic_std", std::nan("")}, {"affine_residual", 1e-9}}},
      {Experiment::kMonotonicity, {{"cp_stabilization", 0.05}, {"form_bound_slack", 1e-8}}},
      {Experiment::kDeltaNorms, {{"decay_ratio", 0.5}, {"monotone_from", 3.0}}},
      {Experiment::kSpdeResidual, {{"final_ratio", 0.25}}},
      {Experiment::kForwardCompare,
       {{"se_multiplier", 3.0}, {"truncation_slack", 1e-4}, {"oracle_rel_tol", 1e-3}, {"oracle_floor", 1e-3}}},
  };
  return table.at(e);
}

void reject_unknown(const json& node, const std::set<std::string>& allowed, const std::string& where) {
  if (!node.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : node.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + where + key + "'");
  }
}

double get_number(const json& node, const std::string& key, const std::string& where) {
  if (!node.is_number()) throw ConfigError("'" + where + key + "' must be a number");
  return node.get<double>();
}

Eigen::VectorXd parse_vector(const json& node, const std::string& name) {
  if (!node.is_array()) throw ConfigError("'" + name + "' must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) {
    if (!node[i].is_number()) throw ConfigError("'" + name + "' entries must be numbers");
    v[static_cast<Eigen::Index>(i)] = node[i].get<double>();
  }
  return v;
}

// Nested rows or a flat row-major list of d*d numbers.
Eigen::MatrixXd parse_matrix(const json& node, int d, const std::string& name) {
  if (!node.is_array()) throw ConfigError("'" + name + "' must be an array");
  Eigen::MatrixXd m(d, d);
  if (!node.empty() && node[0].is_array()) {
    if (static_cast<int>(node.size()) != d) throw ConfigError("'" + name + "' must have d = " + std::to_string(d) + " rows");
    for (int r = 0; r < d; ++r) {
      const Eigen::VectorXd row = parse_vector(node[static_cast<std::size_t>(r)], name);
      if (row.size() != d) throw ConfigError("'" + name + "' rows must have d = " + std::to_string(d) + " entries");
      m.row(r) = row.transpose();
    }
    return m;
  }
  const Eigen::VectorXd flat = parse_vector(node, name);
  if (flat.size() != d * d) throw ConfigError("'" + name + "' must hold d*d = " + std::to_string(d * d) + " entries");
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) m(r, c) = flat[r * d + c];
  }
  return m;
}

ojson matrix_json(const Eigen::MatrixXd& m) {
  ojson rows = ojson::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ojson row = ojson::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

ojson vector_json(const Eigen::VectorXd& v) {
  ojson out = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

bool touches_distributions(Experiment e) {
  return e == Experiment::kDeltaNorms || e == Experiment::kSpdeResidual || e == Experiment::kForwardCompare;
}

std::vector<Point> default_xs(const ExperimentConfig& c) {
  std::vector<Point> xs;
  if (c.experiment == Experiment::kDeltaNorms) {
    for (int k = 0; k <= 10; ++k) {
      Point x = Point::Zero(c.dim);
      x[0] = k;
      xs.push_back(x);
    }
    return xs;
  }
  for (double s : {0.0, 0.5, -0.5, 1.0, -1.0}) xs.push_back(Point::Constant(c.dim, s));
  return xs;
}

Criterion make_criterion(std::string name, double value, const std::string& relation, double threshold) {
  bool pass = false;
  if (relation == "<") pass = value < threshold;
  if (relation == "<=") pass = value <= threshold;
  if (relation == ">") pass = value > threshold;
  if (relation == "==") pass = value == threshold;
  return Criterion{std::move(name), value, threshold, relation, pass};
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + file.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + file.string());
}

struct Context {
  const ExperimentConfig& config;
  fs::path dir;
  RunReport& report;

  double threshold(const std::string& name) const { return config.thresholds.at(name); }
  Truncation trunc() const { return Truncation::make(config.dim, config.max_degree, config.quad_order); }
  void artifact(const std::string& name, const std::string& text) {
    write_text(dir / name, text);
    report.artifacts.push_back(name);
  }
};

GaussianMixture psi_mixture(const ExperimentConfig& c) {
  if (c.psi.mixture.empty()) {
    return GaussianMixture::single(Eigen::VectorXd::Zero(c.dim), 0.25 * Eigen::MatrixXd::Identity(c.dim, c.dim));
  }
  return GaussianMixture(c.psi.mixture);
}

// Initial condition in the guard band of trunc.
CoeffVec psi_coeffs(const ExperimentConfig& c, const Truncation& trunc) {
  if (!c.psi.coeff_file.empty()) {
    std::ifstream in(c.psi.coeff_file);
    if (!in) throw std::runtime_error("cannot read coefficient file " + c.psi.coeff_file);
    const CoeffVec raw = read_coeff_csv(in);
    if (raw.trunc().dim() != c.dim) throw ConfigError("psi.coeff_file dimension does not match trunc.d");
    const CoeffVec out = raw.resized(trunc);
    if (raw.support_degree() > trunc.max_degree() - 2) {
      throw GuardBandError("psi.coeff_file has support above degree N - 2");
    }
    return out;
  }
  return gaussian_coeffs(psi_mixture(c), trunc.with_degree(trunc.max_degree() - 2)).resized(trunc);
}

void run_simulate(Context& ctx) {
  const auto& c = ctx.config;
  if (c.kind != ModelKind::kAffine) throw ConfigError("simulate requires model.kind = affine");
  const Point x0 = c.sim.x0.value_or(Point::Zero(c.dim));
  const Ensemble ens{c.sim.seed, c.sim.paths, uniform_grid(c.sim.horizon, c.sim.dt), c.dim};
  std::vector<Trajectory> trajs(static_cast<std::size_t>(ens.paths));
  parallel_for(trajs.size(), [&](std::size_t m) { trajs[m] = simulate_exact(c.model, x0, ens.path(static_cast<int>(m))); });

  bool finite = true;
  Eigen::MatrixXd terminal(c.dim, ens.paths);
  for (std::size_t m = 0; m < trajs.size(); ++m) {
    finite = finite && trajs[m].states.allFinite();
    terminal.col(static_cast<Eigen::Index>(m)) = trajs[m].terminal();
  }
  if (c.sim.per_path_files) {
    for (std::size_t m = 0; m < trajs.size(); ++m) {
      std::ostringstream out;
      write_trajectory_csv(out, trajs[m]);
      ctx.artifact("trajectory_" + std::to_string(m) + ".csv", out.str());
    }
  } else {
    std::ostringstream out;
    for (std::size_t m = 0; m < trajs.size(); ++m) write_trajectory_csv(out, trajs[m], m, m == 0);
    ctx.artifact("trajectories.csv", out.str());
  }

  const GaussianLaw law = gaussian_oracle(c.model, GaussianLaw{x0, Eigen::MatrixXd::Zero(c.dim, c.dim)}, c.sim.horizon);
  const double m = ens.paths;
  const Eigen::VectorXd mean = terminal.rowwise().mean();
  const Eigen::MatrixXd centered = terminal.colwise() - mean;
  const Eigen::VectorXd var = centered.rowwise().squaredNorm() / (m - 1.0);
  const double k = ctx.threshold("moment_se_multiplier");
  double mean_z = 0.0;
  double var_z = 0.0;
  for (int a = 0; a < c.dim; ++a) {
    const double se_mean = std::sqrt(law.cov(a, a) / m);
    const double se_var = law.cov(a, a) * std::sqrt(2.0 / (m - 1.0));
    mean_z = std::max(mean_z, se_mean > 0 ? std::abs(mean[a] - law.mean[a]) / se_mean : std::abs(mean[a] - law.mean[a]));
    var_z = std::max(var_z, se_var > 0 ? std::abs(var[a] - law.cov(a, a)) / se_var : std::abs(var[a] - law.cov(a, a)));
  }
  ctx.report.metrics = ojson{{"paths", ens.paths},
                             {"steps", ens.grid.size() - 1},
                             {"terminal_mean", vector_json(mean)},
                             {"terminal_var", vector_json(var)},
                             {"oracle_mean", vector_json(law.mean)},
                             {"oracle_var", vector_json(law.cov.diagonal())}};
  ctx.report.criteria.push_back(make_criterion("finite_states", finite ? 1.0 : 0.0, "==", 1.0));
  ctx.report.criteria.push_back(make_criterion("terminal_mean_within_se", mean_z, "<=", k));
  ctx.report.criteria.push_back(make_criterion("terminal_var_within_se", var_z, "<=", k));
}

void run_determinism(Context& ctx) {
  const auto& c = ctx.config;
  const Ensemble ens{c.sim.seed, c.sim.paths, uniform_grid(c.sim.horizon, c.sim.dt), c.dim};
  const auto xs = c.sim.xs.empty() ? default_xs(c) : c.sim.xs;
  FlowSimulator sim;
  switch (c.kind) {
    case ModelKind::kAffine:
      sim = exact_simulator(c.model);
      break;
    case ModelKind::kSinDrift: {
      const Eigen::MatrixXd sigma = c.model.sigma();
      const Eigen::VectorXd alpha = c.model.alpha();
      sim = euler_simulator([sigma](const Point&) { return sigma; },
                            [alpha](const Point& x) -> Eigen::VectorXd { return alpha + x.array().sin().matrix(); });
      break;
    }
    case ModelKind::kDegenerate:
      sim = degenerate_example_simulator(c.model.alpha()[0]);
      break;
  }
  const bool affine = c.kind == ModelKind::kAffine;
  const DeterminismReport rep = determinism_statistic(sim, xs, ens, affine ? &c.model : nullptr);

  double threshold = ctx.threshold("deterministic_std");
  std::optional<double> strong_error;
  if (std::isnan(threshold)) {
    if (affine) {
      threshold = 1e-6;
    } else {
      const auto probe = std::find_if(xs.begin(), xs.end(), [](const Point& x) { return !x.isZero(0.0); });
      strong_error = strong_error_estimate(sim, probe == xs.end() ? xs.front() : *probe, ens);
      threshold = 10.0 * *strong_error;
    }
  }
  ojson xs_json = ojson::array();
  for (const auto& x : xs) xs_json.push_back(vector_json(x));
  ctx.report.metrics = ojson{{"scheme", affine ? "exact" : "euler"},
                             {"xs", xs_json},
                             {"paths", rep.paths},
                             {"times", rep.times},
                             {"horizon", c.sim.horizon},
                             {"dt", c.sim.dt},
                             {"max_deviation", rep.max_deviation},
                             {"across_path_std", rep.across_path_std},
                             {"terminal_std", rep.terminal_std}};
  if (strong_error) ctx.report.metrics["strong_error_estimate"] = *strong_error;
  ctx.report.criteria.push_back(make_criterion("deterministic", rep.across_path_std, "<", threshold));
  if (rep.affine_residual) {
    ctx.report.metrics["affine_residual"] = *rep.affine_residual;
    ctx.report.criteria.push_back(
        make_criterion("affine_flow_residual", *rep.affine_residual, "<", ctx.threshold("affine_residual")));
  }
  std::ostringstream csv;
  csv << "metric,value\n" << std::setprecision(17);
  csv << "max_deviation," << rep.max_deviation << "\nacross_path_std," << rep.across_path_std << "\nterminal_std,"
      << rep.terminal_std << '\n';
  if (rep.affine_residual) csv << "affine_residual," << *rep.affine_residual << '\n';
  ctx.artifact("determinism.csv", csv.str());
}

void run_monotonicity(Context& ctx) {
  const auto& c = ctx.config;
  if (c.kind != ModelKind::kAffine) throw ConfigError("monotonicity requires model.kind = affine");
  const int n = c.max_degree;
  if (n < 4) throw ConfigError("monotonicity requires trunc.N >= 4");
  const double p = c.sobolev_p;
  const int step = std::max(1, n / 4);
  std::vector<int> sweep;
  for (int deg : {n - 2 * step, n - step, n}) {
    if (deg >= 4 && (sweep.empty() || sweep.back() != deg)) sweep.push_back(deg);
  }

  std::vector<double> estimates;
  for (int deg : sweep) estimates.push_back(estimate_cp(assemble(c.model, Truncation::make(c.dim, deg)), p));
  const double cp = estimates.back();

  const auto trunc = ctx.trunc();
  const OperatorBundle bundle = assemble(c.model, trunc);
  const int guard_size = Truncation::make(c.dim, n - 2).size();
  double worst_ratio = -std::numeric_limits<double>::infinity();
  constexpr int kThetas = 100;
  for (int j = 0; j < kThetas; ++j) {
    CoeffVec theta(trunc);
    for (int k = 0; k < guard_size; ++k) {
      theta[k] = keyed_normal(c.sim.seed, static_cast<std::uint64_t>(j), static_cast<std::uint32_t>(k), 0);
    }
    const double norm2 = std::pow(sobolev_norm(theta, p), 2);
    worst_ratio = std::max(worst_ratio, monotonicity_form(theta, p, bundle) / norm2);
  }

  double drift = 0.0;
  for (std::size_t k = 1; k < estimates.size(); ++k) {
    drift = std::max(drift, std::abs(estimates[k] - estimates[k - 1]) / std::max(std::abs(estimates[k - 1]), 1e-300));
  }
  ojson sweep_json = ojson::array();
  std::ostringstream csv;
  csv << "N,cp\n" << std::setprecision(17);
  for (std::size_t k = 0; k < sweep.size(); ++k) {
    sweep_json.push_back(ojson{{"N", sweep[k]}, {"cp", estimates[k]}});
    csv << sweep[k] << ',' << estimates[k] << '\n';
  }
  ctx.artifact("cp_sweep.csv", csv.str());
  ctx.report.metrics = ojson{{"p", p}, {"cp", cp}, {"cp_sweep", sweep_json}, {"random_thetas", kThetas},
                             {"max_form_ratio", worst_ratio}};
  ctx.report.criteria.push_back(
      make_criterion("form_bounded_by_cp", worst_ratio - cp, "<=", ctx.threshold("form_bound_slack")));
  if (estimates.size() > 1) {
    ctx.report.criteria.push_back(make_criterion("cp_stabilization", drift, "<", ctx.threshold("cp_stabilization")));
  }
}

void run_delta_norms(Context& ctx) {
  const auto& c = ctx.config;
  const auto trunc = ctx.trunc();
  const auto xs = c.sim.xs.empty() ? default_xs(c) : c.sim.xs;
  std::vector<double> norms;
  std::ostringstream csv;
  csv << "x_norm,delta_norm\n" << std::setprecision(17);
  bool finite = true;
  for (const auto& x : xs) {
    norms.push_back(sobolev_norm(delta_coeffs(x, trunc), -c.sobolev_p));
    finite = finite && std::isfinite(norms.back());
    csv << x.norm() << ',' << norms.back() << '\n';
  }
  ctx.artifact("delta_norms.csv", csv.str());

  const double from = ctx.threshold("monotone_from");
  int violations = 0;
  for (std::size_t k = 1; k < xs.size(); ++k) {
    if (xs[k - 1].norm() >= from && xs[k].norm() > xs[k - 1].norm() && !(norms[k] < norms[k - 1])) ++violations;
  }
  const double ratio = norms.back() / norms.front();
  ctx.report.metrics = ojson{{"p", c.sobolev_p}, {"N", c.max_degree}, {"norms", norms}, {"last_over_first", ratio}};
  ctx.report.criteria.push_back(make_criterion("finite", finite ? 1.0 : 0.0, "==", 1.0));
  ctx.report.criteria.push_back(make_criterion("decreasing_beyond", violations, "==", 0.0));
  ctx.report.criteria.push_back(make_criterion("decay_ratio", ratio, "<", ctx.threshold("decay_ratio")));
}

void run_spde_residual(Context& ctx) {
  const auto& c = ctx.config;
  if (c.kind != ModelKind::kAffine) throw ConfigError("spde-residual requires model.kind = affine");
  const auto trunc = ctx.trunc();
  const CoeffVec psi = psi_coeffs(c, trunc);
  const double p = c.sobolev_p;
  const BrownianPath finest = sample_brownian(c.sim.seed, 0, uniform_grid(c.sim.horizon, c.sim.dt / 4.0), c.dim);
  const AffineModel frozen(Eigen::MatrixXd::Zero(c.dim, c.dim), c.model.alpha(), c.model.drift());

  std::vector<ResidualRow> rows, control;
  for (int factor : {4, 2, 1}) {
    const BrownianPath path = finest.coarsened(factor);
    const double dt = path.grid[1] - path.grid[0];
    rows.push_back({0, dt, spde_residual(psi, c.model, path, p, trunc), p, c.max_degree});
    control.push_back({0, dt, spde_residual(psi, frozen, path, p, trunc), p, c.max_degree});
  }
  std::ostringstream csv, control_csv;
  write_residual_csv(csv, rows);
  write_residual_csv(control_csv, control);
  ctx.artifact("spde_residual.csv", csv.str());
  ctx.artifact("spde_residual_control.csv", control_csv.str());

  int increases = 0;
  for (std::size_t k = 1; k < rows.size(); ++k) increases += rows[k].residual_norm < rows[k - 1].residual_norm ? 0 : 1;
  const double ratio = rows.back().residual_norm / rows.front().residual_norm;
  ojson res = ojson::array(), floor = ojson::array();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    res.push_back(ojson{{"dt", rows[k].dt}, {"residual", rows[k].residual_norm}});
    floor.push_back(ojson{{"dt", control[k].dt}, {"residual", control[k].residual_norm}});
  }
  ctx.report.metrics = ojson{{"p", p}, {"N", c.max_degree}, {"residuals", res}, {"control_floor", floor},
                             {"final_over_first", ratio}};
  ctx.report.criteria.push_back(make_criterion("strictly_decreasing", increases, "==", 0.0));
  ctx.report.criteria.push_back(make_criterion("final_ratio", ratio, "<", ctx.threshold("final_ratio")));
}

void run_forward_compare(Context& ctx) {
  const auto& c = ctx.config;
  if (c.kind != ModelKind::kAffine) throw ConfigError("forward-compare requires model.kind = affine");
  ForwardSettings settings;
  settings.t = c.sim.horizon;
  settings.paths = c.sim.paths;
  settings.seed = c.sim.seed;
  settings.p = c.sobolev_p;
  settings.se_multiplier = ctx.threshold("se_multiplier");
  settings.truncation_slack = ctx.threshold("truncation_slack");
  settings.oracle_rel_tol = ctx.threshold("oracle_rel_tol");
  settings.oracle_floor = ctx.threshold("oracle_floor");
  const auto trunc = ctx.trunc();
  const ForwardReport rep = c.psi.coeff_file.empty()
                                ? forward_compare(psi_mixture(c), c.model, trunc, settings)
                                : forward_compare(psi_coeffs(c, trunc), c.model, settings);
  ctx.artifact("forward_report.json", forward_report_json(rep, ctx.report.config).dump(2) + "\n");
  ctx.report.metrics = ojson{{"t", settings.t}, {"paths", settings.paths}, {"N", c.max_degree},
                             {"max_discrepancy", rep.max_discrepancy}, {"max_excess_over_se", rep.max_excess}};
  ctx.report.criteria.push_back(make_criterion("spectral_vs_mc", rep.max_excess, "<=", settings.truncation_slack));
  if (rep.oracle_rel_gap) {
    ctx.report.metrics["oracle_rel_gap"] = *rep.oracle_rel_gap;
    ctx.report.criteria.push_back(make_criterion("spectral_vs_oracle", *rep.oracle_rel_gap, "<=", settings.oracle_rel_tol));
  }
}

}  // namespace

std::string to_string(Experiment e) { return experiment_names().at(e); }

Experiment parse_experiment(const std::string& name) {
  for (const auto& [e, n] : experiment_names()) {
    if (n == name) return e;
  }
  throw ConfigError("unknown experiment '" + name + "'");
}

void validate_config(ExperimentConfig& c) {
  if (c.dim < 1 || c.dim > 3) throw ConfigError("trunc.d must be 1, 2 or 3");
  if (c.model.dim() != c.dim) throw ConfigError("model dimension does not match trunc.d = " + std::to_string(c.dim));
  if (c.max_degree < 0) throw ConfigError("trunc.N must be non-negative");
  const int min_quad = 2 * c.max_degree + 4;
  if (c.quad_order == 0) c.quad_order = min_quad;
  if (c.quad_order < min_quad) {
    throw ConfigError("trunc.quad_order = " + std::to_string(c.quad_order) + " violates quad_order >= 2N+4 = " +
                      std::to_string(min_quad));
  }
  if (touches_distributions(c.experiment) && !(c.sobolev_p > c.dim / 4.0)) {
    throw ConfigError("sobolev_p = " + std::to_string(c.sobolev_p) + " violates p > d/4 = " +
                      std::to_string(c.dim / 4.0));
  }
  if (!(c.sim.dt > 0.0) || !(c.sim.horizon > 0.0)) throw ConfigError("sim.dt and sim.T must be positive");
  const double steps = c.sim.horizon / c.sim.dt;
  if (std::abs(steps - std::round(steps)) > 1e-9 * steps) throw ConfigError("sim.T must be a multiple of sim.dt");
  if (c.sim.paths < 1) throw ConfigError("sim.paths must be positive");
  if (c.experiment == Experiment::kDeterminism && c.sim.paths < 2) throw ConfigError("determinism needs sim.paths >= 2");
  if (c.experiment == Experiment::kForwardCompare && c.sim.paths < 100) {
    throw ConfigError("forward-compare needs sim.paths >= 100");
  }
  if (c.kind == ModelKind::kDegenerate && c.dim != 1) throw ConfigError("model.kind = degenerate requires d = 1");
  for (const auto& x : c.sim.xs) {
    if (x.size() != c.dim) throw ConfigError("sim.xs entries must have d coordinates");
  }
  if (c.sim.x0 && c.sim.x0->size() != c.dim) throw ConfigError("sim.x0 must have d coordinates");
  for (const auto& comp : c.psi.mixture) {
    if (comp.mean.size() != c.dim || comp.cov.rows() != c.dim || comp.cov.cols() != c.dim) {
      throw ConfigError("psi.gaussian_mixture components must have dimension d");
    }
  }
  const auto& defaults = threshold_defaults(c.experiment);
  for (const auto& [name, _] : c.thresholds) {
    if (!defaults.contains(name)) throw ConfigError("unknown key 'thresholds." + name + "' for " + to_string(c.experiment));
  }
  for (const auto& [name, value] : defaults) c.thresholds.emplace(name, value);
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  reject_unknown(doc, {"experiment", "model", "trunc", "sobolev_p", "sim", "psi", "output_dir", "thresholds"}, "");
  ExperimentConfig c;
  if (!doc.contains("experiment") || !doc["experiment"].is_string()) throw ConfigError("missing string key 'experiment'");
  c.experiment = parse_experiment(doc["experiment"].get<std::string>());

  const json model = doc.value("model", json::object());
  reject_unknown(model, {"kind", "sigma", "alpha", "C"}, "model.");
  if (model.contains("kind")) {
    const auto name = model["kind"].get<std::string>();
    const auto it = std::find_if(kind_names().begin(), kind_names().end(), [&](const auto& kv) { return kv.second == name; });
    if (it == kind_names().end()) throw ConfigError("unknown model.kind '" + name + "'");
    c.kind = it->first;
  }
  const json trunc = doc.value("trunc", json::object());
  reject_unknown(trunc, {"d", "N", "quad_order"}, "trunc.");
  int d = 0;
  if (trunc.contains("d")) {
    d = trunc["d"].get<int>();
  } else if (model.contains("alpha")) {
    d = static_cast<int>(model["alpha"].size());
  } else {
    d = 1;
  }
  if (d < 1 || d > 3) throw ConfigError("trunc.d must be 1, 2 or 3");
  c.dim = d;
  c.max_degree = trunc.value("N", 20);
  c.quad_order = trunc.value("quad_order", 0);

  Eigen::MatrixXd sigma = model.contains("sigma") ? parse_matrix(model["sigma"], d, "model.sigma")
                                                  : Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd alpha = model.contains("alpha") ? parse_vector(model["alpha"], "model.alpha") : Eigen::VectorXd::Zero(d);
  if (alpha.size() != d) throw ConfigError("model.alpha must have d = " + std::to_string(d) + " entries");
  Eigen::MatrixXd drift = model.contains("C") ? parse_matrix(model["C"], d, "model.C") : Eigen::MatrixXd::Zero(d, d);
  try {
    c.model = AffineModel(std::move(sigma), std::move(alpha), std::move(drift));
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }

  c.sobolev_p = doc.contains("sobolev_p") ? get_number(doc["sobolev_p"], "sobolev_p", "") : d / 4.0 + 0.5;

  const json sim = doc.value("sim", json::object());
  reject_unknown(sim, {"dt", "T", "paths", "seed", "xs", "x0", "per_path_files"}, "sim.");
  if (sim.contains("dt")) c.sim.dt = get_number(sim["dt"], "dt", "sim.");
  if (sim.contains("T")) c.sim.horizon = get_number(sim["T"], "T", "sim.");
  if (sim.contains("paths")) c.sim.paths = sim["paths"].get<int>();
  if (sim.contains("seed")) c.sim.seed = sim["seed"].get<std::uint64_t>();
  if (sim.contains("xs")) {
    for (const auto& x : sim["xs"]) c.sim.xs.push_back(parse_vector(x, "sim.xs"));
  }
  if (sim.contains("x0")) c.sim.x0 = parse_vector(sim["x0"], "sim.x0");
  if (sim.contains("per_path_files")) c.sim.per_path_files = sim["per_path_files"].get<bool>();

  const json psi = doc.value("psi", json::object());
  reject_unknown(psi, {"gaussian_mixture", "coeff_file"}, "psi.");
  if (psi.contains("gaussian_mixture")) {
    for (const auto& comp : psi["gaussian_mixture"]) {
      reject_unknown(comp, {"weight", "mean", "cov"}, "psi.gaussian_mixture[].");
      GaussianComponent g;
      g.weight = comp.value("weight", 1.0);
      g.mean = parse_vector(comp.at("mean"), "psi.gaussian_mixture[].mean");
      g.cov = parse_matrix(comp.at("cov"), d, "psi.gaussian_mixture[].cov");
      c.psi.mixture.push_back(std::move(g));
    }
  }
  if (psi.contains("coeff_file")) c.psi.coeff_file = psi["coeff_file"].get<std::string>();
  if (!c.psi.mixture.empty() && !c.psi.coeff_file.empty()) {
    throw ConfigError("psi takes either gaussian_mixture or coeff_file, not both");
  }

  if (doc.contains("output_dir")) c.output_dir = doc["output_dir"].get<std::string>();
  const json thresholds = doc.value("thresholds", json::object());
  if (!thresholds.is_object()) throw ConfigError("thresholds must be an object");
  for (const auto& [name, value] : thresholds.items()) {
    c.thresholds[name] = get_number(value, name, "thresholds.");
  }
  try {
    validate_config(c);
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  }
  return c;
}

ojson config_json(const ExperimentConfig& c) {
  ojson doc;
  doc["experiment"] = to_string(c.experiment);
  doc["model"] = ojson{{"kind", kind_names().at(c.kind)},
                       {"sigma", matrix_json(c.model.sigma())},
                       {"alpha", vector_json(c.model.alpha())},
                       {"C", matrix_json(c.model.drift())}};
  doc["trunc"] = ojson{{"d", c.dim}, {"N", c.max_degree}, {"quad_order", c.quad_order}};
  doc["sobolev_p"] = c.sobolev_p;
  ojson sim{{"dt", c.sim.dt}, {"T", c.sim.horizon}, {"paths", c.sim.paths}, {"seed", c.sim.seed}};
  if (!c.sim.xs.empty()) {
    ojson xs = ojson::array();
    for (const auto& x : c.sim.xs) xs.push_back(vector_json(x));
    sim["xs"] = xs;
  }
  if (c.sim.x0) sim["x0"] = vector_json(*c.sim.x0);
  sim["per_path_files"] = c.sim.per_path_files;
  doc["sim"] = sim;
  ojson psi = ojson::object();
  if (!c.psi.mixture.empty()) {
    ojson comps = ojson::array();
    for (const auto& g : c.psi.mixture) {
      comps.push_back(ojson{{"weight", g.weight}, {"mean", vector_json(g.mean)}, {"cov", matrix_json(g.cov)}});
    }
    psi["gaussian_mixture"] = comps;
  }
  if (!c.psi.coeff_file.empty()) psi["coeff_file"] = c.psi.coeff_file;
  doc["psi"] = psi;
  doc["output_dir"] = c.output_dir;
  ojson thresholds = ojson::object();
  for (const auto& [name, value] : c.thresholds) {
    // Run-time derived defaults serialize as absent.
    if (!std::isnan(value)) thresholds[name] = value;
  }
  doc["thresholds"] = thresholds;
  return doc;
}

std::string serialize_config(const ExperimentConfig& config) { return config_json(config).dump(2) + "\n"; }

bool RunReport::pass() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.pass; });
}

ojson RunReport::metrics_json() const {
  ojson doc;
  doc["config"] = config;
  doc["metrics"] = metrics;
  ojson crit = ojson::array();
  for (const auto& c : criteria) {
    crit.push_back(ojson{{"name", c.name}, {"value", c.value}, {"relation", c.relation}, {"threshold", c.threshold},
                         {"pass", c.pass}});
  }
  doc["criteria"] = crit;
  doc["artifacts"] = artifacts;
  doc["pass"] = pass();
  return doc;
}

ojson RunReport::to_json() const {
  ojson doc = metrics_json();
  doc["wall_clock_s"] = wall_clock_s;
  return doc;
}

RunReport run_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.config = config_json(config);
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  Context ctx{config, dir, report};
  switch (config.experiment) {
    case Experiment::kSimulate:
      run_simulate(ctx);
      break;
    case Experiment::kDeterminism:
      run_determinism(ctx);
      break;
    case Experiment::kMonotonicity:
      run_monotonicity(ctx);
      break;
    case Experiment::kDeltaNorms:
      run_delta_norms(ctx);
      break;
    case Experiment::kSpdeResidual:
      run_spde_residual(ctx);
      break;
    case Experiment::kForwardCompare:
      run_forward_compare(ctx);
      break;
  }
  report.artifacts.push_back("metrics.json");
  write_text(dir / "metrics.json", report.metrics_json().dump(2) + "\n");
  report.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_text(dir / "report.json", report.to_json().dump(2) + "\n");
  return report;
}

}  // namespace gaussflow
