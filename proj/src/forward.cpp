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

#include "gaussflow/forward.hpp"

#include "gaussflow/errors.hpp"
#include "gaussflow/linalg.hpp"
#include "gaussflow/parallel.hpp"
#include "gaussflow/sde.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <iomanip>
#include <sstream>

namespace gaussflow {

namespace {

constexpr double kPiQuarterInv = 0.75112554446494248286;

// <N(mean, var), h_n> for n = 0..nmax. Follows from the ladder relations
// applied to g' = -(x - mean) g / var.
std::vector<double> gaussian_coeffs_1d(double mean, double var, int nmax) {
  std::vector<double> a(static_cast<std::size_t>(nmax + 1));
  a[0] = kPiQuarterInv / std::sqrt(1.0 + var) * std::exp(-mean * mean / (2.0 * (1.0 + var)));
  for (int n = 0; n < nmax; ++n) {
    const auto k = static_cast<std::size_t>(n);
    const double prev = n > 0 ? a[k - 1] : 0.0;
    a[k + 1] = (std::sqrt(n / 2.0) * (var - 1.0) * prev + mean * a[k]) / (std::sqrt((n + 1) / 2.0) * (var + 1.0));
  }
  return a;
}

std::string csv_block(const CoeffVec& c) {
  std::ostringstream out;
  write_csv(out, c);
  return out.str();
}

std::string csv_block(const Truncation& trunc, const Eigen::VectorXd& v) { return csv_block(CoeffVec(trunc, v)); }

}  // namespace

void GaussianLaw::validate() const {
  const auto d = mean.size();
  if (d < 1 || cov.rows() != d || cov.cols() != d) throw DimensionError("GaussianLaw: inconsistent shapes");
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw DimensionError("GaussianLaw: cov not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-12) throw DimensionError("GaussianLaw: cov not positive semi-definite");
}

GaussianMixture GaussianLaw::density() const { return GaussianMixture::single(mean, cov); }

CoeffVec solve_forward(const CoeffVec& psi, const AffineModel& model, double t, const Truncation& trunc) {
  if (!(psi.trunc() == trunc)) throw DimensionError("solve_forward: psi truncation mismatch");
  require_guard_band(psi, "solve_forward");
  if (t == 0.0) return psi;
  const OperatorBundle bundle = assemble(model, trunc);
  const Eigen::MatrixXd propagator = matrix_exp(bundle.L_star.square_dense(), t);
  return CoeffVec(trunc, propagator * psi.values());
}

GaussianLaw gaussian_oracle(const AffineModel& model, const GaussianLaw& law0, double t) {
  law0.validate();
  if (law0.dim() != model.dim()) throw DimensionError("gaussian_oracle: dimension mismatch");
  if (t < 0.0) throw std::invalid_argument("gaussian_oracle: t must be non-negative");
  if (t == 0.0) return law0;
  const StepParams step = gaussian_step_params(model, t);
  GaussianLaw out{step.phi * law0.mean + step.mu, step.phi * law0.cov * step.phi.transpose() + step.sigma_step};
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  return out;
}

CoeffVec gaussian_coeffs(const GaussianLaw& law, const Truncation& trunc) {
  law.validate();
  if (law.dim() != trunc.dim()) throw DimensionError("gaussian_coeffs: dimension mismatch");
  const Eigen::MatrixXd off = law.cov - Eigen::MatrixXd(law.cov.diagonal().asDiagonal());
  if (!off.isZero(0.0)) return project(law.density().field(), trunc);

  std::vector<std::vector<double>> axes;
  for (int a = 0; a < trunc.dim(); ++a) {
    axes.push_back(gaussian_coeffs_1d(law.mean[a], law.cov(a, a), trunc.max_degree()));
  }
  CoeffVec out(trunc);
  for (int k = 0; k < trunc.size(); ++k) {
    double v = 1.0;
    for (int a = 0; a < trunc.dim(); ++a) {
      v *= axes[static_cast<std::size_t>(a)][static_cast<std::size_t>(trunc.basis()[k][a])];
    }
    out[k] = v;
  }
  return out;
}

CoeffVec gaussian_coeffs(const GaussianMixture& mixture, const Truncation& trunc) {
  CoeffVec out(trunc);
  for (const auto& c : mixture.components()) out += c.weight * gaussian_coeffs(GaussianLaw{c.mean, c.cov}, trunc);
  return out;
}

McEstimate mc_expectation(const ScalarField& psi, const AffineModel& model, double t, int paths,
                          std::uint64_t seed, const Truncation& trunc) {
  if (paths < 100) throw std::invalid_argument("mc_expectation: needs at least 100 paths");
  if (t < 0.0) throw std::invalid_argument("mc_expectation: t must be non-negative");
  if (t == 0.0) return {project(psi, trunc), Eigen::VectorXd::Zero(trunc.size())};

  const TimeGrid grid{0.0, t};
  const auto count = static_cast<std::size_t>(paths);
  std::vector<Eigen::VectorXd> samples(count);
  parallel_for(count, [&](std::size_t m) {
    const auto path = sample_brownian(seed, m, grid, model.dim());
    samples[m] = pushforward_coeffs(pushforward(psi, model, path, t), trunc).values();
  });

  // Shifted sums around the first sample keep identical samples exact.
  const Eigen::VectorXd& ref = samples.front();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(trunc.size());
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(trunc.size());
  for (const auto& s : samples) {
    const Eigen::VectorXd dev = s - ref;
    sum += dev;
    sum_sq += dev.cwiseProduct(dev);
  }
  const double m = static_cast<double>(paths);
  const Eigen::VectorXd var = ((sum_sq - sum.cwiseProduct(sum) / m) / (m - 1.0)).cwiseMax(0.0);
  return {CoeffVec(trunc, ref + sum / m), (var / m).cwiseSqrt()};
}

namespace {

ForwardReport compare_routes(const CoeffVec& start, const ScalarField& field, const GaussianMixture* mixture,
                             const AffineModel& model, const ForwardSettings& settings) {
  const Truncation& trunc = start.trunc();
  // At t = 0 no operator is applied, so the start need not be guard-banded.
  CoeffVec spectral = settings.t == 0.0 ? start : solve_forward(start, model, settings.t, trunc);
  ForwardReport report{.settings = settings, .spectral = std::move(spectral), .mc_mean = CoeffVec(trunc),
                       .mc_se = Eigen::VectorXd::Zero(trunc.size()), .oracle = std::nullopt,
                       .oracle_rel_gap = std::nullopt};
  const McEstimate mc = mc_expectation(field, model, settings.t, settings.paths, settings.seed, trunc);
  report.mc_mean = mc.mean;
  report.mc_se = mc.se;

  const Eigen::VectorXd gap = (report.spectral.values() - mc.mean.values()).cwiseAbs();
  report.max_discrepancy = gap.maxCoeff();
  report.max_excess = (gap - settings.se_multiplier * mc.se).maxCoeff();
  report.mc_pass = report.max_excess <= settings.truncation_slack;

  if (mixture != nullptr && mixture->components().size() == 1) {
    const auto& c = mixture->components().front();
    const GaussianLaw law = gaussian_oracle(model, GaussianLaw{c.mean, c.cov}, settings.t);
    CoeffVec oracle = c.weight * gaussian_coeffs(law, trunc);
    double worst = 0.0;
    for (int k = 0; k < trunc.size(); ++k) {
      if (std::abs(oracle[k]) > settings.oracle_floor) {
        worst = std::max(worst, std::abs(report.spectral[k] - oracle[k]) / std::abs(oracle[k]));
      }
    }
    report.oracle_rel_gap = worst;
    report.oracle_pass = worst <= settings.oracle_rel_tol;
    report.oracle = std::move(oracle);
  }
  report.pass = report.mc_pass && report.oracle_pass;
  return report;
}

}  // namespace

ForwardReport forward_compare(const GaussianMixture& psi, const AffineModel& model, const Truncation& trunc,
                              const ForwardSettings& settings) {
  if (psi.dim() != model.dim() || model.dim() != trunc.dim()) throw DimensionError("forward_compare: dimension mismatch");
  const auto guard = trunc.with_degree(trunc.max_degree() - 2);
  const CoeffVec start = settings.t == 0.0 ? gaussian_coeffs(psi, trunc) : gaussian_coeffs(psi, guard).resized(trunc);
  return compare_routes(start, psi.field(), &psi, model, settings);
}

ForwardReport forward_compare(const CoeffVec& psi, const AffineModel& model, const ForwardSettings& settings) {
  if (psi.trunc().dim() != model.dim()) throw DimensionError("forward_compare: dimension mismatch");
  require_guard_band(psi, "forward_compare");
  return compare_routes(psi, as_field(psi), nullptr, model, settings);
}

nlohmann::ordered_json forward_report_json(const ForwardReport& report, const nlohmann::ordered_json& config) {
  nlohmann::ordered_json doc;
  doc["config"] = config;
  doc["spectral_coeffs"] = csv_block(report.spectral);
  doc["mc_coeffs"] = csv_block(report.mc_mean);
  doc["mc_se"] = csv_block(report.spectral.trunc(), report.mc_se);
  doc["oracle_coeffs"] = report.oracle ? nlohmann::ordered_json(csv_block(*report.oracle)) : nlohmann::ordered_json();
  doc["max_discrepancy"] = report.max_discrepancy;
  doc["max_excess_over_se"] = report.max_excess;
  doc["oracle_rel_gap"] = report.oracle_rel_gap ? nlohmann::ordered_json(*report.oracle_rel_gap) : nlohmann::ordered_json();
  doc["pass"] = report.pass;
  return doc;
}

}  // namespace gaussflow
