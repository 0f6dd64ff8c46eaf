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

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

namespace gaussflow {

/// A point of the state space R^d.
using Point = Eigen::VectorXd;

/// Real-valued function on R^d.
using ScalarField = std::function<double(const Point&)>;

/// Multi-index n = (n_1, ..., n_d) with non-negative entries.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> entries);
  MultiIndex(std::initializer_list<int> entries) : MultiIndex(std::vector<int>(entries)) {}

  int dim() const { return static_cast<int>(entries_.size()); }
  /// Total degree |n|.
  int order() const { return order_; }
  int operator[](int axis) const { return entries_[static_cast<std::size_t>(axis)]; }
  const std::vector<int>& entries() const { return entries_; }

  /// n + delta * e_axis, or nothing when an entry would become negative.
  std::optional<MultiIndex> shifted(int axis, int delta) const;

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) { return a.entries_ == b.entries_; }

 private:
  std::vector<int> entries_;
  int order_ = 0;
};

/// All multi-indices with |n| <= N in graded order. Within a grade the
/// entries are ordered descending-lexicographically, so that for d = 2 the
/// first grade reads (1,0), (0,1).
class Basis {
 public:
  Basis(int dim, int max_degree);

  int dim() const { return dim_; }
  int max_degree() const { return max_degree_; }
  int size() const { return static_cast<int>(indices_.size()); }
  const MultiIndex& operator[](int k) const { return indices_[static_cast<std::size_t>(k)]; }
  const std::vector<MultiIndex>& indices() const { return indices_; }
  int order(int k) const { return orders_[static_cast<std::size_t>(k)]; }

  /// Position of n in the ordering, or -1 when |n| > N.
  int ordinal(const MultiIndex& n) const;
  /// Position of n + delta * e_axis, or -1 if outside the basis.
  int neighbor(int k, int axis, int delta) const;

 private:
  static std::uint64_t pack(const std::vector<int>& entries);

  int dim_;
  int max_degree_;
  std::vector<MultiIndex> indices_;
  std::vector<int> orders_;
  std::unordered_map<std::uint64_t, int> lookup_;
};

/// Finite truncation of the Hermite basis by total degree together with the
/// per-axis Gauss-Hermite order used for projections.
class Truncation {
 public:
  /// quad_order = 0 selects the minimum admissible order 2N + 4.
  static Truncation make(int dim, int max_degree, int quad_order = 0);

  int dim() const { return dim_; }
  int max_degree() const { return max_degree_; }
  int quad_order() const { return quad_order_; }
  int size() const { return basis_->size(); }
  const Basis& basis() const { return *basis_; }

  /// Same dimension, different degree, default quadrature order.
  Truncation with_degree(int max_degree) const { return make(dim_, max_degree); }

  /// Coefficient layouts agree; quadrature order is not part of the layout.
  friend bool operator==(const Truncation& a, const Truncation& b) {
    return a.dim_ == b.dim_ && a.max_degree_ == b.max_degree_;
  }

 private:
  Truncation(int dim, int max_degree, int quad_order, std::shared_ptr<const Basis> basis)
      : dim_(dim), max_degree_(max_degree), quad_order_(quad_order), basis_(std::move(basis)) {}

  int dim_;
  int max_degree_;
  int quad_order_;
  std::shared_ptr<const Basis> basis_;
};

/// Truncated Hermite expansion a_n = <f, h_n>.
class CoeffVec {
 public:
  explicit CoeffVec(Truncation trunc);
  CoeffVec(Truncation trunc, Eigen::VectorXd values);

  /// Unit vector at n.
  static CoeffVec unit(const Truncation& trunc, const MultiIndex& n);

  const Truncation& trunc() const { return trunc_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }
  int size() const { return static_cast<int>(values_.size()); }

  double operator[](int k) const { return values_[k]; }
  double& operator[](int k) { return values_[k]; }
  double at(const MultiIndex& n) const;

  /// Re-expresses the vector in another truncation of the same dimension,
  /// zero-filling new indices and dropping indices above the new degree.
  CoeffVec resized(const Truncation& other) const;

  /// Largest |n| with |a_n| > tol, or -1 for the zero vector.
  int support_degree(double tol = 0.0) const;

  CoeffVec& operator+=(const CoeffVec& other);
  CoeffVec& operator-=(const CoeffVec& other);
  CoeffVec& operator*=(double s) {
    values_ *= s;
    return *this;
  }
  friend CoeffVec operator+(CoeffVec a, const CoeffVec& b) { return a += b; }
  friend CoeffVec operator-(CoeffVec a, const CoeffVec& b) { return a -= b; }
  friend CoeffVec operator*(double s, CoeffVec a) { return a *= s; }

 private:
  Truncation trunc_;
  Eigen::VectorXd values_;
};

/// Gauss-Hermite rule for the weight exp(-x^2). `compensated` holds
/// weights * exp(node^2), which integrates unweighted integrands directly.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> compensated;
};

/// Cached rule with `order` nodes.
const GaussHermiteRule& gauss_hermite(int order);

/// h_0(x), ..., h_nmax(x) for the L2-orthonormal Hermite functions.
std::vector<double> hermite_functions(int nmax, double x);
double hermite_function(int n, double x);

/// h_n(x) = prod_i h_{n_i}(x_i).
double hermite_eval(const MultiIndex& n, const Point& x);

const std::vector<MultiIndex>& enumerate_basis(const Truncation& trunc);

/// Tensor-product quadrature of the integral of f over R^d.
double integrate(const ScalarField& f, int dim, int quad_order);

/// Coefficients <f, h_n> by tensor-product quadrature at trunc.quad_order().
CoeffVec project(const ScalarField& f, const Truncation& trunc);

/// sum_n a_n h_n(x)
double synthesize(const CoeffVec& c, const Point& x);
/// Closure over a copy of c.
ScalarField as_field(const CoeffVec& c);

/// Diagonal weights (2|n| + d)^{2p}.
Eigen::VectorXd sobolev_weights(const Truncation& trunc, double p);
double sobolev_inner(const CoeffVec& a, const CoeffVec& b, double p);
double sobolev_norm(const CoeffVec& c, double p);

/// Coefficients of the Dirac distribution at x: a_n = h_n(x).
CoeffVec delta_coeffs(const Point& x, const Truncation& trunc);

/// CSV with header `n_1,...,n_d,value`, rows in basis order, 17 significant digits.
void write_csv(std::ostream& out, const CoeffVec& c);
CoeffVec read_coeff_csv(std::istream& in);

}  // namespace gaussflow
