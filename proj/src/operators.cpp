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

#include "gaussflow/operators.hpp"

#include "gaussflow/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

namespace gaussflow {

namespace {

enum class Ladder { kPartial, kMultiply };

using Triplet = Eigen::Triplet<double>;

// Ladder matrix from degree `in` to degree `out` (out >= in + 1, so nothing
// is lost to truncation).
SparseMatrix ladder(Ladder kind, int axis, int dim, int in, int out) {
  const auto from_trunc = Truncation::make(dim, in);
  const auto to_trunc = Truncation::make(dim, out);
  const Basis& from = from_trunc.basis();
  const Basis& to = to_trunc.basis();
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(2 * from.size()));
  const double sign_up = kind == Ladder::kPartial ? -1.0 : 1.0;
  for (int col = 0; col < from.size(); ++col) {
    const int ni = from[col][axis];
    if (ni > 0) {
      const int row = to.ordinal(*from[col].shifted(axis, -1));
      triplets.emplace_back(row, col, std::sqrt(ni / 2.0));
    }
    const int row = to.ordinal(*from[col].shifted(axis, +1));
    triplets.emplace_back(row, col, sign_up * std::sqrt((ni + 1) / 2.0));
  }
  SparseMatrix m(to.size(), from.size());
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

// Inclusion of the degree-`in` basis as a prefix of the degree-`out` basis.
SparseMatrix embedding(int dim, int in, int out) {
  const int rows = Truncation::make(dim, out).size();
  const int cols = Truncation::make(dim, in).size();
  SparseMatrix m(rows, cols);
  std::vector<Triplet> triplets;
  for (int k = 0; k < std::min(rows, cols); ++k) triplets.emplace_back(k, k, 1.0);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

OperatorMatrix make_operator(const Truncation& trunc, int bandwidth, SparseMatrix m) {
  m.prune(0.0);
  m.makeCompressed();
  return OperatorMatrix{trunc, trunc.with_degree(trunc.max_degree() + bandwidth), bandwidth, std::move(m)};
}

void check_finite(const Eigen::MatrixXd& m, const char* name) {
  if (!m.allFinite()) throw NumericalError(std::string("AffineModel: non-finite entry in ") + name);
}

}  // namespace

AffineModel::AffineModel(Eigen::MatrixXd sigma, Eigen::VectorXd alpha, Eigen::MatrixXd drift)
    : sigma_(std::move(sigma)), alpha_(std::move(alpha)), drift_(std::move(drift)) {
  const auto d = alpha_.size();
  if (d < 1) throw DimensionError("AffineModel: dimension must be positive");
  if (sigma_.rows() != d || sigma_.cols() != d) throw DimensionError("AffineModel: sigma must be d x d");
  if (drift_.rows() != d || drift_.cols() != d) throw DimensionError("AffineModel: C must be d x d");
  check_finite(sigma_, "sigma");
  check_finite(alpha_, "alpha");
  check_finite(drift_, "C");
  trace_drift_ = drift_.trace();
}

AffineModel AffineModel::brownian(int dim) {
  return AffineModel(Eigen::MatrixXd::Identity(dim, dim), Eigen::VectorXd::Zero(dim),
                     Eigen::MatrixXd::Zero(dim, dim));
}

AffineModel AffineModel::scalar(double sigma, double alpha, double beta) {
  return AffineModel(Eigen::MatrixXd::Constant(1, 1, sigma), Eigen::VectorXd::Constant(1, alpha),
                     Eigen::MatrixXd::Constant(1, 1, beta));
}

CoeffVec OperatorMatrix::apply(const CoeffVec& c) const {
  if (!(c.trunc() == trunc_in)) throw DimensionError("OperatorMatrix::apply: input truncation mismatch");
  return CoeffVec(trunc_out, matrix * c.values());
}

Eigen::MatrixXd OperatorMatrix::square_dense() const {
  const auto n = static_cast<Eigen::Index>(trunc_in.size());
  return Eigen::MatrixXd(matrix).topRows(n);
}

OperatorMatrix build_partial(int axis, const Truncation& trunc) {
  if (axis < 0 || axis >= trunc.dim()) throw DimensionError("build_partial: axis out of range");
  const int n = trunc.max_degree();
  return make_operator(trunc, 1, ladder(Ladder::kPartial, axis, trunc.dim(), n, n + 1));
}

OperatorMatrix build_multiply(int axis, const Truncation& trunc) {
  if (axis < 0 || axis >= trunc.dim()) throw DimensionError("build_multiply: axis out of range");
  const int n = trunc.max_degree();
  return make_operator(trunc, 1, ladder(Ladder::kMultiply, axis, trunc.dim(), n, n + 1));
}

OperatorBundle assemble(const AffineModel& model, const Truncation& trunc) {
  const int d = trunc.dim();
  if (model.dim() != d) throw DimensionError("assemble: model and truncation dimensions differ");
  const int n = trunc.max_degree();

  std::vector<SparseMatrix> partial_lo, partial_hi, multiply_lo;
  for (int i = 0; i < d; ++i) {
    partial_lo.push_back(ladder(Ladder::kPartial, i, d, n, n + 1));
    partial_hi.push_back(ladder(Ladder::kPartial, i, d, n + 1, n + 2));
    multiply_lo.push_back(ladder(Ladder::kMultiply, i, d, n, n + 1));
  }
  const SparseMatrix lift = embedding(d, n + 1, n + 2);
  const Eigen::MatrixXd q = model.diffusion();
  const Eigen::MatrixXd& sigma = model.sigma();
  const Eigen::MatrixXd& c = model.drift();
  const Eigen::VectorXd& alpha = model.alpha();

  const int rows2 = Truncation::make(d, n + 2).size();
  SparseMatrix second(rows2, trunc.size());
  SparseMatrix drift_fwd(rows2, trunc.size());
  SparseMatrix drift_adj(rows2, trunc.size());
  second.setZero();
  drift_fwd.setZero();
  drift_adj.setZero();
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (q(i, j) != 0.0) second += (0.5 * q(i, j)) * SparseMatrix(partial_hi[i] * partial_lo[j]);
      if (c(i, j) != 0.0) {
        // b_i d_i = c_ij M_j d_i ;  d_i (b_i .) = c_ij d_i M_j
        const SparseMatrix mj_hi = ladder(Ladder::kMultiply, j, d, n + 1, n + 2);
        drift_fwd += c(i, j) * SparseMatrix(mj_hi * partial_lo[i]);
        drift_adj += c(i, j) * SparseMatrix(partial_hi[i] * multiply_lo[j]);
      }
    }
    if (alpha[i] != 0.0) {
      const SparseMatrix shift = alpha[i] * SparseMatrix(lift * partial_lo[i]);
      drift_fwd += shift;
      drift_adj += shift;
    }
  }

  std::vector<OperatorMatrix> a, a_star;
  for (int i = 0; i < d; ++i) {
    SparseMatrix ai(Truncation::make(d, n + 1).size(), trunc.size());
    ai.setZero();
    for (int k = 0; k < d; ++k) {
      if (sigma(k, i) != 0.0) ai += sigma(k, i) * partial_lo[k];
    }
    a.push_back(make_operator(trunc, 1, ai));
    a_star.push_back(make_operator(trunc, 1, SparseMatrix(-ai)));
  }

  return OperatorBundle{model,
                        trunc,
                        std::move(a),
                        make_operator(trunc, 2, SparseMatrix(second + drift_fwd)),
                        std::move(a_star),
                        make_operator(trunc, 2, SparseMatrix(second - drift_adj))};
}

void require_guard_band(const CoeffVec& theta, const char* where) {
  const int limit = theta.trunc().max_degree() - 2;
  const int support = theta.support_degree();
  if (support > limit) {
    throw GuardBandError(std::string(where) + ": coefficient support reaches degree " + std::to_string(support) +
                         ", guard band allows at most " + std::to_string(limit));
  }
}

double monotonicity_form(const CoeffVec& theta, double p, const OperatorBundle& bundle) {
  if (!(theta.trunc() == bundle.trunc)) throw DimensionError("monotonicity_form: truncation mismatch");
  require_guard_band(theta, "monotonicity_form");
  const CoeffVec l_theta = bundle.L_star.apply(theta);
  double value = 2.0 * sobolev_inner(theta.resized(l_theta.trunc()), l_theta, p);
  for (const auto& a : bundle.A_star) {
    const double norm = sobolev_norm(a.apply(theta), p);
    value += norm * norm;
  }
  return value;
}

double estimate_cp(const OperatorBundle& bundle, double p) {
  const int n = bundle.trunc.max_degree();
  if (n < 4) throw DimensionError("estimate_cp: requires N >= 4");
  const auto guard = Truncation::make(bundle.trunc.dim(), n - 2);
  const auto g = static_cast<Eigen::Index>(guard.size());

  const Eigen::VectorXd w2 = sobolev_weights(bundle.L_star.trunc_out, p);
  const Eigen::MatrixXd weighted_l = (w2.asDiagonal() * Eigen::MatrixXd(bundle.L_star.matrix)).topLeftCorner(g, g);
  Eigen::MatrixXd form = weighted_l + weighted_l.transpose();
  for (const auto& a : bundle.A_star) {
    const Eigen::VectorXd w1 = sobolev_weights(a.trunc_out, p);
    const Eigen::MatrixXd block = Eigen::MatrixXd(a.matrix).leftCols(g);
    form += block.transpose() * w1.asDiagonal() * block;
  }
  // Generalized problem form v = lambda W v with diagonal W.
  const Eigen::VectorXd inv_sqrt = sobolev_weights(guard, p).cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd reduced = inv_sqrt.asDiagonal() * form * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (reduced + reduced.transpose()), Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("estimate_cp: symmetric eigen solve did not converge");
  return eig.eigenvalues().maxCoeff();
}

void write_operator_csv(std::ostream& out, const OperatorMatrix& op) {
  out << "row_index,col_index,value\n" << std::setprecision(17);
  for (int col = 0; col < op.matrix.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(op.matrix, col); it; ++it) {
      out << it.row() << ',' << it.col() << ',' << it.value() << '\n';
    }
  }
}

}  // namespace gaussflow
