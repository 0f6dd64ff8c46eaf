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
#include "gaussflow/forward.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace gaussflow;

namespace {

AffineModel ou_model() { return AffineModel::scalar(1.0, 0.0, -1.0); }

GaussianLaw law1(double mean, double var) {
  return {Eigen::VectorXd::Constant(1, mean), Eigen::MatrixXd::Constant(1, 1, var)};
}

// Guard-banded analytic coefficients of a Gaussian law.
CoeffVec guarded(const GaussianLaw& law, const Truncation& t) {
  return gaussian_coeffs(law, t.with_degree(t.max_degree() - 2)).resized(t);
}

double median(Eigen::VectorXd v) {
  std::sort(v.data(), v.data() + v.size());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("analytic gaussian coefficients") {
  // Reference values from adaptive 40-digit quadrature of N(m, v) against h_n.
  const auto t = Truncation::make(1, 8);
  CHECK(gaussian_coeffs(law1(0.0, 1.0), t)[0] == doctest::Approx(0.53112596601359845724).epsilon(1e-14));
  CHECK(gaussian_coeffs(law1(0.3, 0.5), t)[4] == doctest::Approx(0.021835396162594281477).epsilon(1e-12));
  CHECK(gaussian_coeffs(law1(-0.7, 2.0), t)[7] == doctest::Approx(-0.0097406126485707616576).epsilon(1e-12));
  CHECK(gaussian_coeffs(law1(0.0, 0.75), t)[2] == doctest::Approx(-0.057356213098813277626).epsilon(1e-13));

  // Diagonal 2-D covariance agrees with quadrature projection.
  const auto t2 = Truncation::make(2, 10, 60);
  GaussianLaw g{Eigen::Vector2d(0.3, -0.4), Eigen::Vector2d(0.6, 1.3).asDiagonal()};
  const CoeffVec analytic = gaussian_coeffs(g, t2);
  const CoeffVec quad = project(g.density().field(), t2);
  CHECK((analytic.values() - quad.values()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gaussian oracle") {
  CHECK(gaussian_oracle(ou_model(), law1(0.2, 0.3), 0.0).cov(0, 0) == 0.3);
  for (double t : {0.1, 0.5, 2.0}) {
    const GaussianLaw l = gaussian_oracle(ou_model(), law1(0.0, 0.0), t);
    CHECK(l.cov(0, 0) == doctest::Approx((1.0 - std::exp(-2.0 * t)) / 2.0).epsilon(1e-14));
    CHECK(l.mean[0] == 0.0);
  }
  Eigen::MatrixXd sigma(2, 2);
  sigma << 1.0, 0.2, 0.0, 0.5;
  const AffineModel flat(sigma, Eigen::Vector2d(1.0, -2.0), Eigen::MatrixXd::Zero(2, 2));
  const GaussianLaw l0{Eigen::Vector2d(0.5, 0.5), Eigen::Matrix2d::Identity()};
  const GaussianLaw l = gaussian_oracle(flat, l0, 0.7);
  CHECK((l.mean - (l0.mean + 0.7 * flat.alpha())).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((l.cov - (l0.cov + 0.7 * flat.diffusion())).cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(gaussian_oracle(ou_model(), law1(0.0, 1.0), -1.0), std::invalid_argument);
  CHECK_THROWS_AS(law1(0.0, -0.1).validate(), DimensionError);
}

TEST_CASE("spectral forward solve") {
  const auto t40 = Truncation::make(1, 40);
  const CoeffVec stationary = guarded(law1(0.0, 0.5), t40);
  CHECK(solve_forward(stationary, ou_model(), 0.0, t40).values() == stationary.values());
  CHECK(sobolev_norm(solve_forward(stationary, ou_model(), 1.0, t40) - stationary, 0.0) < 1e-4);

  // Heat kernel: variances add.
  const CoeffVec heat = solve_forward(guarded(law1(0.0, 0.25), t40), AffineModel::brownian(1), 0.5, t40);
  CHECK((heat.values() - gaussian_coeffs(law1(0.0, 0.75), t40).values()).cwiseAbs().maxCoeff() < 1e-4);

  // Semigroup, chaining through a guard-banded intermediate.
  const auto t30 = Truncation::make(1, 30);
  const AffineModel model = AffineModel::scalar(0.8, 0.3, -0.6);
  const CoeffVec psi40 = guarded(law1(0.2, 0.4), t40);
  CoeffVec mid = solve_forward(psi40, model, 0.5, t40);
  for (int k = 0; k < t40.size(); ++k) {
    if (t40.basis().order(k) > 38) mid[k] = 0.0;
  }
  const CoeffVec chained = solve_forward(mid, model, 0.3, t40);
  CHECK(sobolev_norm(chained - solve_forward(psi40, model, 0.8, t40), 0.0) < 1e-9);
  const CoeffVec psi = guarded(law1(0.2, 0.4), t30);

  // Mass and Gaussian closure.
  const CoeffVec out = solve_forward(psi, model, 1.0, t30);
  const ScalarField f = as_field(out);
  CHECK(integrate(f, 1, 80) == doctest::Approx(integrate(as_field(psi), 1, 80)).epsilon(1e-5));
  const GaussianLaw law = gaussian_oracle(model, law1(0.2, 0.4), 1.0);
  const double m1 = integrate([&](const Point& x) { return x[0] * f(x); }, 1, 80);
  const double m2 = integrate([&](const Point& x) { return (x[0] - m1) * (x[0] - m1) * f(x); }, 1, 80);
  CHECK(m1 == doctest::Approx(law.mean[0]).epsilon(1e-3));
  CHECK(m2 == doctest::Approx(law.cov(0, 0)).epsilon(1e-3));

  CHECK_THROWS_AS(solve_forward(CoeffVec::unit(t30, MultiIndex{29}), model, 0.1, t30), GuardBandError);
}

TEST_CASE("two-dimensional heat oracle") {
  const auto t = Truncation::make(2, 16);
  const GaussianLaw l0{Eigen::Vector2d(0.2, -0.1), 0.5 * Eigen::Matrix2d::Identity()};
  const CoeffVec out = solve_forward(guarded(l0, t), AffineModel::brownian(2), 0.25, t);
  const GaussianLaw l1 = gaussian_oracle(AffineModel::brownian(2), l0, 0.25);
  const CoeffVec oracle = gaussian_coeffs(l1, t);
  double worst = 0.0;
  for (int k = 0; k < t.size(); ++k) {
    if (std::abs(oracle[k]) > 1e-3) worst = std::max(worst, std::abs(out[k] - oracle[k]) / std::abs(oracle[k]));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("monte carlo expectation") {
  const auto t = Truncation::make(1, 12);
  const GaussianMixture psi = GaussianMixture::single(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, 0.25));
  CHECK_THROWS_AS(mc_expectation(psi.field(), ou_model(), 0.5, 99, 0, t), std::invalid_argument);

  const McEstimate at0 = mc_expectation(psi.field(), ou_model(), 0.0, 100, 0, t);
  CHECK(at0.mean.values() == project(psi.field(), t).values());
  CHECK(at0.se.isZero(0.0));

  // No noise: every path carries the same coefficients.
  const AffineModel quiet(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Constant(1, 0.4), Eigen::MatrixXd::Constant(1, 1, -0.5));
  const McEstimate det = mc_expectation(psi.field(), quiet, 0.5, 100, 0, t);
  CHECK(det.se.isZero(0.0));
  const auto path = sample_brownian(0, 0, TimeGrid{0.0, 0.5}, 1);
  CHECK((det.mean.values() - pushforward_coeffs(pushforward(psi.field(), quiet, path, 0.5), t).values()).isZero(1e-15));

  // Against the oracle law.
  const McEstimate mc = mc_expectation(psi.field(), ou_model(), 0.5, 10000, 0, t);
  const CoeffVec oracle = gaussian_coeffs(gaussian_oracle(ou_model(), law1(0.0, 0.25), 0.5), t);
  const Eigen::VectorXd excess = (mc.mean.values() - oracle.values()).cwiseAbs() - 3.0 * mc.se;
  CHECK(excess.maxCoeff() <= 1e-4);

  // Standard error rate.
  const McEstimate mc4 = mc_expectation(psi.field(), ou_model(), 0.5, 40000, 0, t);
  const double ratio = median(mc4.se) / median(mc.se);
  CHECK(ratio == doctest::Approx(0.5).epsilon(0.2));

  // Reduction order makes the estimate reproducible.
  const McEstimate again = mc_expectation(psi.field(), ou_model(), 0.5, 10000, 0, t);
  CHECK(again.mean.values() == mc.mean.values());
  CHECK(again.se == mc.se);
}

TEST_CASE("forward comparison report") {
  const auto t = Truncation::make(1, 40);
  const GaussianMixture psi = GaussianMixture::single(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, 0.25));
  ForwardSettings s;
  s.t = 0.0;
  s.paths = 100;
  const ForwardReport zero = forward_compare(psi, ou_model(), t, s);
  CHECK(zero.max_discrepancy < 1e-12);
  CHECK((zero.spectral.values() - project(psi.field(), t).values()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((zero.oracle->values() - zero.mc_mean.values()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(zero.pass);

  s.t = 0.5;
  s.paths = 10000;
  const ForwardReport r = forward_compare(psi, ou_model(), t, s);
  CHECK(r.mc_pass);
  REQUIRE(r.oracle_rel_gap.has_value());
  CHECK(*r.oracle_rel_gap < 1e-3);
  CHECK(r.pass);

  const auto doc = forward_report_json(r, nlohmann::ordered_json{{"N", 40}});
  for (const char* key : {"config", "spectral_coeffs", "mc_coeffs", "mc_se", "oracle_coeffs", "max_discrepancy", "pass"}) {
    CHECK(doc.contains(key));
  }
  CHECK(doc["spectral_coeffs"].get<std::string>().rfind("n_1,value\n", 0) == 0);

  // Coefficient input has no oracle route.
  const ForwardReport c = forward_compare(guarded(law1(0.0, 0.25), t), ou_model(), s);
  CHECK(!c.oracle.has_value());
  CHECK(c.mc_pass);
}
