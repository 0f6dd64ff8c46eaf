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

#include "gaussflow/hermite.hpp"

#include "gaussflow/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

namespace gaussflow {

namespace {

constexpr double kPiQuarterInv = 0.75112554446494248286;  // pi^{-1/4}

// Graded order; descending-lexicographic within a grade.
void append_grade(int dim, int grade, std::vector<int>& prefix, std::vector<MultiIndex>& out) {
  const int axis = static_cast<int>(prefix.size());
  if (axis == dim - 1) {
    prefix.push_back(grade);
    out.emplace_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int k = grade; k >= 0; --k) {
    prefix.push_back(k);
    append_grade(dim, grade - k, prefix, out);
    prefix.pop_back();
  }
}

// Visits every node of a q^d tensor grid in row-major order.
template <typename Fn>
void for_each_node(int dim, int q, Fn&& fn) {
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  while (true) {
    fn(idx);
    int axis = dim - 1;
    while (axis >= 0 && ++idx[static_cast<std::size_t>(axis)] == q) {
      idx[static_cast<std::size_t>(axis)] = 0;
      --axis;
    }
    if (axis < 0) break;
  }
}

GaussHermiteRule build_rule(int order) {
  GaussHermiteRule rule;
  const auto n = static_cast<Eigen::Index>(order);
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 1; k < n; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k) / 2.0);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("Gauss-Hermite eigen solve failed");

  rule.nodes.resize(static_cast<std::size_t>(order));
  rule.weights.resize(rule.nodes.size());
  rule.compensated.resize(rule.nodes.size());
  for (int i = 0; i < order; ++i) {
    double x = solver.eigenvalues()[i];
    // Newton polish on h_order; h_n' = sqrt(2n) h_{n-1} - x h_n.
    for (int it = 0; it < 3; ++it) {
      const auto h = hermite_functions(order, x);
      const double deriv = std::sqrt(2.0 * order) * h[static_cast<std::size_t>(order - 1)] -
                           x * h[static_cast<std::size_t>(order)];
      if (deriv == 0.0) break;
      x -= h[static_cast<std::size_t>(order)] / deriv;
    }
    const double hm1 = hermite_functions(order - 1, x).back();
    const double compensated = 1.0 / (order * hm1 * hm1);
    rule.nodes[static_cast<std::size_t>(i)] = x;
    rule.compensated[static_cast<std::size_t>(i)] = compensated;
    rule.weights[static_cast<std::size_t>(i)] = compensated * std::exp(-x * x);
  }
  // Exact symmetry.
  for (int i = 0; i < order / 2; ++i) {
    const auto j = static_cast<std::size_t>(order - 1 - i);
    const auto k = static_cast<std::size_t>(i);
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[k]);
    const double wc = 0.5 * (rule.compensated[j] + rule.compensated[k]);
    const double w = 0.5 * (rule.weights[j] + rule.weights[k]);
    rule.nodes[k] = -x;
    rule.nodes[j] = x;
    rule.compensated[k] = rule.compensated[j] = wc;
    rule.weights[k] = rule.weights[j] = w;
  }
  if (order % 2 == 1) rule.nodes[static_cast<std::size_t>(order / 2)] = 0.0;
  return rule;
}

std::shared_ptr<const Basis> cached_basis(int dim, int max_degree) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const Basis>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{dim, max_degree}];
  if (!slot) slot = std::make_shared<const Basis>(dim, max_degree);
  return slot;
}

// table[k][i] = h_k(node_i)
std::vector<std::vector<double>> hermite_table(int nmax, const std::vector<double>& nodes) {
  std::vector<std::vector<double>> table(static_cast<std::size_t>(nmax + 1),
                                         std::vector<double>(nodes.size()));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto h = hermite_functions(nmax, nodes[i]);
    for (int k = 0; k <= nmax; ++k) table[static_cast<std::size_t>(k)][i] = h[static_cast<std::size_t>(k)];
  }
  return table;
}

void require_same(const Truncation& a, const Truncation& b, const char* what) {
  if (!(a == b)) {
    throw DimensionError(std::string(what) + ": truncation mismatch (d=" + std::to_string(a.dim()) +
                         ",N=" + std::to_string(a.max_degree()) + " vs d=" + std::to_string(b.dim()) +
                         ",N=" + std::to_string(b.max_degree()) + ")");
  }
}

}  // namespace

MultiIndex::MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
  for (int e : entries_) {
    if (e < 0) throw DimensionError("multi-index entries must be non-negative");
  }
  order_ = std::accumulate(entries_.begin(), entries_.end(), 0);
}

std::optional<MultiIndex> MultiIndex::shifted(int axis, int delta) const {
  auto e = entries_;
  e[static_cast<std::size_t>(axis)] += delta;
  if (e[static_cast<std::size_t>(axis)] < 0) return std::nullopt;
  return MultiIndex(std::move(e));
}

Basis::Basis(int dim, int max_degree) : dim_(dim), max_degree_(max_degree) {
  if (dim < 1) throw DimensionError("basis dimension must be positive");
  if (max_degree < 0) throw DimensionError("basis degree must be non-negative");
  if (max_degree > 0xffff) throw DimensionError("basis degree too large");
  std::vector<int> prefix;
  for (int grade = 0; grade <= max_degree; ++grade) append_grade(dim, grade, prefix, indices_);
  orders_.reserve(indices_.size());
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    orders_.push_back(indices_[k].order());
    lookup_.emplace(pack(indices_[k].entries()), static_cast<int>(k));
  }
}

std::uint64_t Basis::pack(const std::vector<int>& entries) {
  std::uint64_t key = 0;
  for (int e : entries) key = (key << 16) | static_cast<std::uint64_t>(e);
  return key;
}

int Basis::ordinal(const MultiIndex& n) const {
  if (n.dim() != dim_) throw DimensionError("multi-index dimension does not match basis");
  if (n.order() > max_degree_) return -1;
  return lookup_.at(pack(n.entries()));
}

int Basis::neighbor(int k, int axis, int delta) const {
  const auto shifted = indices_[static_cast<std::size_t>(k)].shifted(axis, delta);
  if (!shifted) return -1;
  return ordinal(*shifted);
}

Truncation Truncation::make(int dim, int max_degree, int quad_order) {
  if (dim < 1) throw DimensionError("truncation dimension must be positive");
  if (max_degree < 0) throw DimensionError("truncation degree must be non-negative");
  const int min_order = 2 * max_degree + 4;
  if (quad_order == 0) quad_order = min_order;
  if (quad_order < min_order) {
    throw DimensionError("quad_order " + std::to_string(quad_order) + " below required 2N+4 = " +
                         std::to_string(min_order));
  }
  return Truncation(dim, max_degree, quad_order, cached_basis(dim, max_degree));
}

CoeffVec::CoeffVec(Truncation trunc) : trunc_(std::move(trunc)), values_(Eigen::VectorXd::Zero(trunc_.size())) {}

CoeffVec::CoeffVec(Truncation trunc, Eigen::VectorXd values) : trunc_(std::move(trunc)), values_(std::move(values)) {
  if (values_.size() != trunc_.size()) {
    throw DimensionError("coefficient count " + std::to_string(values_.size()) + " does not match basis size " +
                         std::to_string(trunc_.size()));
  }
}

CoeffVec CoeffVec::unit(const Truncation& trunc, const MultiIndex& n) {
  CoeffVec c(trunc);
  const int k = trunc.basis().ordinal(n);
  if (k < 0) throw DimensionError("unit index outside truncation");
  c[k] = 1.0;
  return c;
}

double CoeffVec::at(const MultiIndex& n) const {
  const int k = trunc_.basis().ordinal(n);
  return k < 0 ? 0.0 : values_[k];
}

CoeffVec CoeffVec::resized(const Truncation& other) const {
  if (other.dim() != trunc_.dim()) throw DimensionError("resize across dimensions");
  CoeffVec out(other);
  // Graded ordering makes the smaller basis a prefix of the larger one.
  const auto common = std::min(values_.size(), out.values_.size());
  out.values_.head(common) = values_.head(common);
  return out;
}

int CoeffVec::support_degree(double tol) const {
  int degree = -1;
  for (int k = 0; k < size(); ++k) {
    if (std::abs(values_[k]) > tol) degree = std::max(degree, trunc_.basis().order(k));
  }
  return degree;
}

CoeffVec& CoeffVec::operator+=(const CoeffVec& other) {
  require_same(trunc_, other.trunc_, "CoeffVec +");
  values_ += other.values_;
  return *this;
}

CoeffVec& CoeffVec::operator-=(const CoeffVec& other) {
  require_same(trunc_, other.trunc_, "CoeffVec -");
  values_ -= other.values_;
  return *this;
}

const GaussHermiteRule& gauss_hermite(int order) {
  if (order < 1) throw DimensionError("Gauss-Hermite order must be positive");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussHermiteRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[order];
  if (!slot) slot = std::make_unique<GaussHermiteRule>(build_rule(order));
  return *slot;
}

std::vector<double> hermite_functions(int nmax, double x) {
  std::vector<double> h(static_cast<std::size_t>(nmax + 1));
  h[0] = kPiQuarterInv * std::exp(-0.5 * x * x);
  if (nmax >= 1) h[1] = std::sqrt(2.0) * x * h[0];
  for (int n = 1; n < nmax; ++n) {
    const auto k = static_cast<std::size_t>(n);
    h[k + 1] = (std::sqrt(2.0) * x * h[k] - std::sqrt(static_cast<double>(n)) * h[k - 1]) /
               std::sqrt(static_cast<double>(n + 1));
  }
  return h;
}

double hermite_function(int n, double x) { return hermite_functions(n, x).back(); }

double hermite_eval(const MultiIndex& n, const Point& x) {
  if (x.size() != n.dim()) throw DimensionError("hermite_eval: point and multi-index dimensions differ");
  double value = 1.0;
  for (int i = 0; i < n.dim(); ++i) value *= hermite_function(n[i], x[i]);
  return value;
}

const std::vector<MultiIndex>& enumerate_basis(const Truncation& trunc) { return trunc.basis().indices(); }

double integrate(const ScalarField& f, int dim, int quad_order) {
  const auto& rule = gauss_hermite(quad_order);
  Point x(dim);
  double sum = 0.0;
  for_each_node(dim, quad_order, [&](const std::vector<int>& idx) {
    double w = 1.0;
    for (int a = 0; a < dim; ++a) {
      const auto i = static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
      x[a] = rule.nodes[i];
      w *= rule.compensated[i];
    }
    const double v = f(x);
    if (!std::isfinite(v)) throw NumericalError("integrate: non-finite integrand at a quadrature node");
    sum += w * v;
  });
  return sum;
}

CoeffVec project(const ScalarField& f, const Truncation& trunc) {
  const int dim = trunc.dim();
  const int q = trunc.quad_order();
  const auto& rule = gauss_hermite(q);
  const auto table = hermite_table(trunc.max_degree(), rule.nodes);
  const auto& basis = trunc.basis();

  CoeffVec out(trunc);
  Eigen::VectorXd& a = out.values();
  Point x(dim);
  for_each_node(dim, q, [&](const std::vector<int>& idx) {
    double w = 1.0;
    for (int ax = 0; ax < dim; ++ax) {
      const auto i = static_cast<std::size_t>(idx[static_cast<std::size_t>(ax)]);
      x[ax] = rule.nodes[i];
      w *= rule.compensated[i];
    }
    const double v = f(x);
    if (!std::isfinite(v)) throw NumericalError("project: non-finite function value at a quadrature node");
    const double fw = w * v;
    if (fw == 0.0) return;
    for (int k = 0; k < basis.size(); ++k) {
      const auto& n = basis[k];
      double prod = fw;
      for (int ax = 0; ax < dim; ++ax) {
        prod *= table[static_cast<std::size_t>(n[ax])][static_cast<std::size_t>(idx[static_cast<std::size_t>(ax)])];
      }
      a[k] += prod;
    }
  });
  return out;
}

double synthesize(const CoeffVec& c, const Point& x) {
  const auto& trunc = c.trunc();
  if (x.size() != trunc.dim()) throw DimensionError("synthesize: point dimension mismatch");
  std::vector<std::vector<double>> axis_values;
  axis_values.reserve(static_cast<std::size_t>(trunc.dim()));
  for (int ax = 0; ax < trunc.dim(); ++ax) axis_values.push_back(hermite_functions(trunc.max_degree(), x[ax]));
  const auto& basis = trunc.basis();
  double sum = 0.0;
  for (int k = 0; k < basis.size(); ++k) {
    if (c[k] == 0.0) continue;
    double h = 1.0;
    for (int ax = 0; ax < trunc.dim(); ++ax) {
      h *= axis_values[static_cast<std::size_t>(ax)][static_cast<std::size_t>(basis[k][ax])];
    }
    sum += c[k] * h;
  }
  return sum;
}

ScalarField as_field(const CoeffVec& c) {
  return [c](const Point& x) { return synthesize(c, x); };
}

Eigen::VectorXd sobolev_weights(const Truncation& trunc, double p) {
  Eigen::VectorXd w(trunc.size());
  for (int k = 0; k < trunc.size(); ++k) {
    w[k] = std::pow(2.0 * trunc.basis().order(k) + trunc.dim(), 2.0 * p);
  }
  return w;
}

double sobolev_inner(const CoeffVec& a, const CoeffVec& b, double p) {
  require_same(a.trunc(), b.trunc(), "sobolev_inner");
  const Eigen::VectorXd w = sobolev_weights(a.trunc(), p);
  return (w.array() * a.values().array() * b.values().array()).sum();
}

double sobolev_norm(const CoeffVec& c, double p) { return std::sqrt(sobolev_inner(c, c, p)); }

CoeffVec delta_coeffs(const Point& x, const Truncation& trunc) {
  if (x.size() != trunc.dim()) throw DimensionError("delta_coeffs: point dimension mismatch");
  std::vector<std::vector<double>> axis_values;
  for (int ax = 0; ax < trunc.dim(); ++ax) axis_values.push_back(hermite_functions(trunc.max_degree(), x[ax]));
  CoeffVec out(trunc);
  const auto& basis = trunc.basis();
  for (int k = 0; k < basis.size(); ++k) {
    double h = 1.0;
    for (int ax = 0; ax < trunc.dim(); ++ax) {
      h *= axis_values[static_cast<std::size_t>(ax)][static_cast<std::size_t>(basis[k][ax])];
    }
    out[k] = h;
  }
  return out;
}

void write_csv(std::ostream& out, const CoeffVec& c) {
  const auto& trunc = c.trunc();
  for (int ax = 1; ax <= trunc.dim(); ++ax) out << "n_" << ax << ',';
  out << "value\n" << std::setprecision(17);
  for (int k = 0; k < c.size(); ++k) {
    for (int e : trunc.basis()[k].entries()) out << e << ',';
    out << c[k] << '\n';
  }
}

CoeffVec read_coeff_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw DimensionError("coefficient CSV: missing header");
  const int columns = static_cast<int>(std::count(header.begin(), header.end(), ',')) + 1;
  const int dim = columns - 1;
  if (dim < 1) throw DimensionError("coefficient CSV: header has no index columns");

  std::vector<std::vector<int>> rows;
  std::vector<double> values;
  std::string line;
  int max_degree = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<int> entries;
    for (int ax = 0; ax < dim; ++ax) {
      if (!std::getline(ss, cell, ',')) throw DimensionError("coefficient CSV: short row");
      entries.push_back(std::stoi(cell));
    }
    if (!std::getline(ss, cell, ',')) throw DimensionError("coefficient CSV: missing value");
    values.push_back(std::stod(cell));
    max_degree = std::max(max_degree, std::accumulate(entries.begin(), entries.end(), 0));
    rows.push_back(std::move(entries));
  }
  const auto trunc = Truncation::make(dim, max_degree);
  if (static_cast<int>(rows.size()) != trunc.size()) {
    throw DimensionError("coefficient CSV: expected " + std::to_string(trunc.size()) + " rows, got " +
                         std::to_string(rows.size()));
  }
  CoeffVec c(trunc);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (trunc.basis()[static_cast<int>(r)].entries() != rows[r]) {
      throw DimensionError("coefficient CSV: rows not in graded order at row " + std::to_string(r + 1));
    }
    c[static_cast<int>(r)] = values[r];
  }
  return c;
}

}  // namespace gaussflow
