#pragma once

// Independent reference computations for tests: exact rational elimination
// and small helpers that do not go through the library numerics.

#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using i128 = __int128;

inline i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

struct Rational {
  i128 num = 0;
  i128 den = 1;

  Rational() = default;
  Rational(i128 n, i128 d = 1) : num(n), den(d) {
    if (den == 0) throw std::domain_error("zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const i128 g = gcd128(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
  bool zero() const { return num == 0; }
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return {a.num * b.den - b.num * a.den, a.den * b.den};
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return {a.num * b.num, a.den * b.den};
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    return {a.num * b.den, a.den * b.num};
  }
};

using IntMatrix = std::vector<std::vector<std::int64_t>>;

/// Rank by fraction-free (Bareiss) elimination; exact for integer input.
inline int bareiss_rank(IntMatrix m) {
  const std::size_t rows = m.size();
  if (rows == 0) return 0;
  const std::size_t cols = m[0].size();
  std::vector<std::vector<i128>> a(rows, std::vector<i128>(cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) a[i][j] = m[i][j];
  i128 prev = 1;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && a[p][c] == 0) ++p;
    if (p == rows) continue;
    std::swap(a[p], a[r]);
    for (std::size_t i = r + 1; i < rows; ++i) {
      for (std::size_t j = c + 1; j < cols; ++j)
        a[i][j] = (a[r][c] * a[i][j] - a[i][c] * a[r][j]) / prev;
      a[i][c] = 0;
    }
    prev = a[r][c];
    ++r;
  }
  return static_cast<int>(r);
}

/// Exact reduced row-echelon form over the rationals (zero rows dropped).
inline std::vector<std::vector<Rational>> rational_rref(const IntMatrix& m,
                                                        std::vector<std::size_t>* pivots = nullptr) {
  const std::size_t rows = m.size();
  const std::size_t cols = rows ? m[0].size() : 0;
  std::vector<std::vector<Rational>> a(rows, std::vector<Rational>(cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) a[i][j] = Rational(m[i][j]);
  std::size_t r = 0;
  std::vector<std::size_t> piv;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && a[p][c].zero()) ++p;
    if (p == rows) continue;
    std::swap(a[p], a[r]);
    const Rational lead = a[r][c];
    for (auto& v : a[r]) v = v / lead;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || a[i][c].zero()) continue;
      const Rational f = a[i][c];
      for (std::size_t j = 0; j < cols; ++j) a[i][j] = a[i][j] - f * a[r][j];
    }
    piv.push_back(c);
    ++r;
  }
  a.resize(r);
  if (pivots) *pivots = piv;
  return a;
}

/// Exact kernel basis (one column per free variable) from the rational RREF.
inline Eigen::MatrixXd rational_kernel(const IntMatrix& m) {
  const std::size_t cols = m.empty() ? 0 : m[0].size();
  std::vector<std::size_t> piv;
  const auto rref = rational_rref(m, &piv);
  std::vector<bool> is_pivot(cols, false);
  for (std::size_t p : piv) is_pivot[p] = true;
  std::vector<std::size_t> free;
  for (std::size_t c = 0; c < cols; ++c)
    if (!is_pivot[c]) free.push_back(c);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cols),
                                            static_cast<Eigen::Index>(free.size()));
  for (std::size_t f = 0; f < free.size(); ++f) {
    k(static_cast<Eigen::Index>(free[f]), static_cast<Eigen::Index>(f)) = 1.0;
    for (std::size_t r = 0; r < piv.size(); ++r)
      k(static_cast<Eigen::Index>(piv[r]), static_cast<Eigen::Index>(f)) =
          -rref[r][free[f]].to_double();
  }
  return k;
}

inline Eigen::MatrixXd to_eigen(const IntMatrix& m) {
  const auto rows = static_cast<Eigen::Index>(m.size());
  const auto cols = static_cast<Eigen::Index>(rows ? m[0].size() : 0);
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      out(i, j) = static_cast<double>(m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
  return out;
}

/// Random integer matrix of size rows x cols with rank at most `target`
/// (product of two small integer factors).
inline IntMatrix random_low_rank(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                                 std::size_t target) {
  std::uniform_int_distribution<int> entry(-3, 3);
  IntMatrix b(rows, std::vector<std::int64_t>(target)), c(target, std::vector<std::int64_t>(cols));
  for (auto& row : b)
    for (auto& v : row) v = entry(rng);
  for (auto& row : c)
    for (auto& v : row) v = entry(rng);
  IntMatrix m(rows, std::vector<std::int64_t>(cols, 0));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      for (std::size_t k = 0; k < target; ++k) m[i][j] += b[i][k] * c[k][j];
  return m;
}

/// Rotation generator with weight w on the real plane (2k, 2k+1) of R^dim.
inline Eigen::MatrixXd plane_generator(Eigen::Index dim, Eigen::Index k, int w) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  m(2 * k + 1, 2 * k) = w;
  m(2 * k, 2 * k + 1) = -w;
  return m;
}

/// Haar-random orthogonal matrix via QR of a Gaussian matrix.
inline Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = gauss(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR();
  for (Eigen::Index i = 0; i < n; ++i)
    if (r(i, i) < 0) q.col(i) = -q.col(i);
  return q;
}

}  // namespace oracle
