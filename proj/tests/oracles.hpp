#pragma once

// Test-only reference computations. Everything here is written with plain
// loops and Gauss-Jordan elimination so it shares no code path with the
// Cholesky/QR routines under test.

#include "chima/types.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace chima::oracle {

// Dense inverse by Gauss-Jordan elimination with partial pivoting.
inline Matrix dense_inverse(const Matrix& a) {
  const Index n = a.rows();
  std::vector<std::vector<double>> m(static_cast<std::size_t>(n), std::vector<double>(2 * static_cast<std::size_t>(n), 0.0));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) m[i][j] = a(i, j);
    m[i][static_cast<std::size_t>(n + i)] = 1.0;
  }
  for (Index col = 0; col < n; ++col) {
    Index pivot = col;
    for (Index r = col + 1; r < n; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    }
    if (m[pivot][col] == 0.0) throw std::runtime_error("oracle: singular matrix");
    std::swap(m[col], m[pivot]);
    const double diag = m[col][col];
    for (auto& v : m[col]) v /= diag;
    for (Index r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = m[r][col];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < m[r].size(); ++c) m[r][c] -= f * m[col][c];
    }
  }
  Matrix inv(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) inv(i, j) = m[i][static_cast<std::size_t>(n + j)];
  }
  return inv;
}

inline Matrix mat_mul(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (Index j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

inline Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  }
  return t;
}

// Least-squares coefficients from the normal equations (X^T X) b = X^T y.
inline Vector normal_equations(const Matrix& x, const Vector& y) {
  const Matrix xt = transpose(x);
  const Matrix xtx = mat_mul(xt, x);
  const Matrix xty = mat_mul(xt, Matrix(y));
  return mat_mul(dense_inverse(xtx), xty).col(0);
}

// Residual mean square of y on x, denominator n - columns.
inline double residual_variance(const Matrix& x, const Vector& y) {
  const Vector b = normal_equations(x, y);
  const Matrix fitted = mat_mul(x, Matrix(b));
  double rss = 0.0;
  for (Index i = 0; i < y.size(); ++i) rss += (y(i) - fitted(i, 0)) * (y(i) - fitted(i, 0));
  return rss / static_cast<double>(x.rows() - x.cols());
}

// Z = [M X C] as an explicit matrix.
inline Matrix design_z(const Dataset& d) {
  Matrix z(d.n(), d.p() + 1 + d.q());
  for (Index i = 0; i < d.n(); ++i) {
    for (Index j = 0; j < d.p(); ++j) z(i, j) = d.mediators(i, j);
    z(i, d.p()) = d.exposure(i);
    for (Index c = 0; c < d.q(); ++c) z(i, d.p() + 1 + c) = d.covariates(i, c);
  }
  return z;
}

// Z^T (kI + Z Z^T)^{-1} Y via an explicit inverse.
inline Vector rholp_dual(const Dataset& d, double k) {
  const Matrix z = design_z(d);
  Matrix g = mat_mul(z, transpose(z));
  for (Index i = 0; i < g.rows(); ++i) g(i, i) += k;
  return mat_mul(transpose(z), mat_mul(dense_inverse(g), Matrix(d.outcome))).col(0);
}

// (kI + Z^T Z)^{-1} Z^T Y, the primal ridge solution.
inline Vector ridge_primal(const Dataset& d, double k) {
  const Matrix z = design_z(d);
  const Matrix zt = transpose(z);
  Matrix g = mat_mul(zt, z);
  for (Index i = 0; i < g.rows(); ++i) g(i, i) += k;
  return mat_mul(dense_inverse(g), mat_mul(zt, Matrix(d.outcome))).col(0);
}

// delta (W_{-j} W_{-j}^T + delta I)^{-1} M_j, forming W_{-j} explicitly.
inline Vector projection_direct(const Dataset& d, Index j, double delta) {
  const Matrix z = design_z(d);
  Matrix w(z.rows(), z.cols() - 1);
  for (Index c = 0, out = 0; c < z.cols(); ++c) {
    if (c == j) continue;
    w.col(out++) = z.col(c);
  }
  Matrix g = mat_mul(w, transpose(w));
  for (Index i = 0; i < g.rows(); ++i) g(i, i) += delta;
  return delta * mat_mul(dense_inverse(g), Matrix(d.mediators.col(j))).col(0);
}

// delta (W W^T + delta I)^{-1} M_j with W = [M_S X C] minus column j.
inline Vector projection_reduced(const Dataset& d, const std::vector<Index>& s, Index j, double delta) {
  std::vector<Vector> cols;
  for (Index c : s) {
    if (c != j) cols.push_back(d.mediators.col(c));
  }
  cols.push_back(d.exposure);
  for (Index c = 0; c < d.q(); ++c) cols.push_back(d.covariates.col(c));
  Matrix w(d.n(), static_cast<Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) w.col(static_cast<Index>(c)) = cols[c];
  Matrix g = mat_mul(w, transpose(w));
  for (Index i = 0; i < g.rows(); ++i) g(i, i) += delta;
  return delta * mat_mul(dense_inverse(g), Matrix(d.mediators.col(j))).col(0);
}

inline double max_relative_error(const Vector& got, const Vector& want) {
  const double scale = std::max(want.cwiseAbs().maxCoeff(), 1e-300);
  return (got - want).cwiseAbs().maxCoeff() / scale;
}

// Indices of the top d |scores| by a full stable sort on (-score, index).
inline std::vector<Index> full_sort_top(const Vector& scores, Index d) {
  std::vector<std::pair<double, Index>> all;
  for (Index j = 0; j < scores.size(); ++j) all.emplace_back(-std::abs(scores(j)), j);
  std::sort(all.begin(), all.end());
  std::vector<Index> out;
  for (Index i = 0; i < std::min(d, scores.size()); ++i) out.push_back(all[static_cast<std::size_t>(i)].second);
  return out;
}

// Gaussian random dataset, seeded; optional covariates.
inline Dataset random_dataset(Index n, Index p, unsigned seed, Index q = 0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Dataset d;
  d.exposure.resize(n);
  d.mediators.resize(n, p);
  d.outcome.resize(n);
  d.covariates.resize(n, q);
  for (Index i = 0; i < n; ++i) d.exposure(i) = z(rng);
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < n; ++i) d.mediators(i, j) = 0.5 * d.exposure(i) * (j % 3 == 0) + z(rng);
  }
  for (Index c = 0; c < q; ++c) {
    for (Index i = 0; i < n; ++i) d.covariates(i, c) = z(rng);
  }
  for (Index i = 0; i < n; ++i) {
    d.outcome(i) = 0.8 * d.mediators(i, 0) - 0.5 * d.mediators(i, std::min<Index>(1, p - 1)) + 0.3 * d.exposure(i) + z(rng);
  }
  for (Index j = 0; j < p; ++j) d.mediator_names.push_back("m" + std::to_string(j));
  return validate_dataset(std::move(d));
}

// One-sample Kolmogorov-Smirnov statistic against Unif(0, 1).
inline double ks_uniform_statistic(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    d = std::max(d, static_cast<double>(i + 1) / n - x[i]);
    d = std::max(d, x[i] - static_cast<double>(i) / n);
  }
  return d;
}

// Asymptotic Kolmogorov tail P(K > t) with Stephens' finite-n correction.
inline double ks_p_value(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double t = (sn + 0.12 + 0.11 / sn) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * t * t);
    p += term;
    if (std::abs(term) < 1e-16) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace chima::oracle
