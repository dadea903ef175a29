#pragma once

// Small dense linear algebra with explicit tolerances. Everything here is a
// free function over Eigen expressions; complex vectors are handled by real
// doubling with an explicit complex structure (see complex_structure()).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "orthofold/errors.hpp"

namespace orthofold {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

/// Largest row/column count accepted by the numerics routines.
inline constexpr Index kMaxDim = 64;

struct Tolerance {
  double rank_eps = 1e-9;            // relative to the largest singular value
  double match_eps = 1e-6;           // entrywise distance for element/weight matching
  double cluster_eps_factor = 4.0;   // times the median nearest-neighbour distance

  void validate() const {
    if (!(rank_eps > 0.0 && rank_eps < 1.0))
      throw InputError("rank_eps must lie in (0, 1)");
    if (!(match_eps > 0.0)) throw InputError("match_eps must be positive");
    if (!(cluster_eps_factor > 0.0))
      throw InputError("cluster_eps_factor must be positive");
  }
};

template <typename Derived>
void check_matrix(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() > kMaxDim || m.cols() > kMaxDim)
    throw InputError("matrix exceeds " + std::to_string(kMaxDim) + " rows or columns");
  if (!m.allFinite()) throw InputError("matrix has non-finite entries");
}

namespace detail {

template <typename Derived>
Index numerical_rank(const Eigen::JacobiSVD<Derived>& svd, double rank_eps) {
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double cut = rank_eps * s(0);
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) ++r;
  return r;
}

}  // namespace detail

/// Number of singular values above rank_eps * sigma_max.
template <typename Derived>
Index rank(const Eigen::MatrixBase<Derived>& m, const Tolerance& tol) {
  check_matrix(m);
  if (m.size() == 0) return 0;
  using PlainMat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::JacobiSVD<PlainMat> svd(m.eval());
  return detail::numerical_rank(svd, tol.rank_eps);
}

/// Orthonormal basis of the numerical kernel, one vector per column.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> kernel_basis(
    const Eigen::MatrixBase<Derived>& m, const Tolerance& tol) {
  using PlainMat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  check_matrix(m);
  const Index n = m.cols();
  if (m.rows() == 0 || n == 0) return PlainMat::Identity(n, n);
  // Pad short matrices so that V is square and carries the whole kernel.
  PlainMat padded = PlainMat::Zero(std::max(m.rows(), n), n);
  padded.topRows(m.rows()) = m;
  Eigen::JacobiSVD<PlainMat> svd(padded, Eigen::ComputeFullV);
  const Index r = detail::numerical_rank(svd, tol.rank_eps);
  return svd.matrixV().rightCols(n - r);
}

/// Orthonormal basis (columns) of the span of the columns of `vectors`.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> orthonormal_span(
    const Eigen::MatrixBase<Derived>& vectors, const Tolerance& tol) {
  using PlainMat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  check_matrix(vectors);
  if (vectors.cols() == 0 || vectors.rows() == 0) return PlainMat(vectors.rows(), 0);
  Eigen::JacobiSVD<PlainMat> svd(vectors.eval(), Eigen::ComputeThinU);
  const Index r = detail::numerical_rank(svd, tol.rank_eps);
  return svd.matrixU().leftCols(r);
}

/// Orthonormal basis of the orthogonal complement of span(vectors) in R^ambient_dim.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> orthogonal_complement(
    const Eigen::MatrixBase<Derived>& vectors, Index ambient_dim, const Tolerance& tol) {
  using PlainMat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (vectors.cols() > 0 && vectors.rows() != ambient_dim)
    throw InputError("orthogonal_complement: vectors have dimension " +
                     std::to_string(vectors.rows()) + ", expected " +
                     std::to_string(ambient_dim));
  if (vectors.cols() == 0) return PlainMat::Identity(ambient_dim, ambient_dim);
  // The complement of the column space is the kernel of the transpose.
  return kernel_basis(vectors.transpose(), tol);
}

/// True when two column spans coincide (all principal angles below eps).
template <typename A, typename B>
bool same_subspace(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b,
                   const Tolerance& tol) {
  const Mat qa = orthonormal_span(a, tol);
  const Mat qb = orthonormal_span(b, tol);
  if (qa.cols() != qb.cols()) return false;
  if (qa.cols() == 0) return true;
  // Cosines of the principal angles are the singular values of qa^T qb.
  Eigen::JacobiSVD<Mat> svd(qa.transpose() * qb);
  return svd.singularValues().minCoeff() > 1.0 - tol.match_eps;
}

/// Reduced row-echelon form of the rows of `rows`; zero rows are dropped.
inline Mat reduced_row_echelon(const Mat& rows, double eps) {
  Mat m = rows;
  Index lead = 0;
  Index r = 0;
  for (; r < m.rows() && lead < m.cols(); ++lead) {
    Index pivot;
    const double best = m.col(lead).tail(m.rows() - r).cwiseAbs().maxCoeff(&pivot);
    if (best <= eps) continue;
    pivot += r;
    m.row(pivot).swap(m.row(r));
    m.row(r) /= m(r, lead);
    for (Index i = 0; i < m.rows(); ++i)
      if (i != r) m.row(i) -= m(i, lead) * m.row(r);
    ++r;
  }
  return m.topRows(r);
}

/// The standard complex structure on C^n with interleaved (re, im) coordinates.
inline Mat complex_structure(Index complex_dim) {
  Mat j = Mat::Zero(2 * complex_dim, 2 * complex_dim);
  for (Index k = 0; k < complex_dim; ++k) {
    j(2 * k + 1, 2 * k) = 1.0;
    j(2 * k, 2 * k + 1) = -1.0;
  }
  return j;
}

/// Connected components of the graph linking points at distance
/// <= eps_factor * (median nearest-neighbour distance). Components are
/// listed in order of their smallest member.
inline std::vector<std::vector<std::size_t>> epsilon_components(
    std::size_t count, const std::function<double(std::size_t, std::size_t)>& distance,
    double eps_factor) {
  if (count == 0) throw InputError("epsilon_components: empty input");
  std::vector<double> dist(count * count, 0.0);
  std::vector<double> nearest(count, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = i + 1; j < count; ++j) {
      const double d = distance(i, j);
      dist[i * count + j] = dist[j * count + i] = d;
      nearest[i] = std::min(nearest[i], d);
      nearest[j] = std::min(nearest[j], d);
    }
  double eps = 0.0;
  if (count > 1) {
    std::vector<double> sorted = nearest;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    eps = eps_factor * sorted[sorted.size() / 2];
  }

  std::vector<std::size_t> parent(count);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = i + 1; j < count; ++j)
      if (dist[i * count + j] <= eps) {
        const std::size_t a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }

  std::vector<std::vector<std::size_t>> components;
  std::vector<long> slot(count, -1);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<long>(components.size());
      components.emplace_back();
    }
    components[static_cast<std::size_t>(slot[root])].push_back(i);
  }
  return components;
}

}  // namespace orthofold
