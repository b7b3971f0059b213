// Copyright 2026 The identconcepts Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef IDENTCONCEPTS_NUMERICS_HPP
#define IDENTCONCEPTS_NUMERICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace identconcepts {

/// Raised by the dense kernels when a precondition on the input matrix
/// (symmetry, definiteness, rank, shape) does not hold or an iteration
/// fails to converge.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw NumericError("Matrix: data length " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(rows_) + "x" +
                         std::to_string(cols_));
    }
  }
  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw NumericError("Matrix: ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix diagonal(std::span<const double> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double> col(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double v) { return std::isfinite(v); });
  }

  Matrix& operator+=(const Matrix& o) {
    check_same_shape(o, "+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same_shape(o, "-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Matrix& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) {
      throw NumericError("Matrix product: inner dimensions " + std::to_string(a.cols_) +
                         " and " + std::to_string(b.rows_) + " differ");
    }
    Matrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      double* orow = out.data_.data() + i * out.cols_;
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        const double* brow = b.data_.data() + k * b.cols_;
        for (std::size_t j = 0; j < b.cols_; ++j) orow[j] += aik * brow[j];
      }
    }
    return out;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  void check_same_shape(const Matrix& o, const char* op) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) {
      throw NumericError(std::string("Matrix ") + op + ": shape mismatch");
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline std::vector<double> operator*(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw NumericError("Matrix-vector product: size mismatch");
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    y[i] = std::inner_product(r.begin(), r.end(), x.begin(), 0.0);
  }
  return y;
}

inline double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// a·aᵀ, exploiting symmetry.
inline Matrix gram_rows(const Matrix& a) {
  Matrix g(a.rows(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = i; j < a.rows(); ++j) {
      const double v = dot(a.row(i), a.row(j));
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

/// aᵀ·a.
inline Matrix gram_cols(const Matrix& a) {
  Matrix g(a.cols(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto row = a.row(r);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double ri = row[i];
      if (ri == 0.0) continue;
      for (std::size_t j = i; j < a.cols(); ++j) g(i, j) += ri * row[j];
    }
  }
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t j = 0; j < i; ++j) g(i, j) = g(j, i);
  return g;
}

inline double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

/// Frobenius norm of a - aᵀ relative to the norm of a.
inline double relative_asymmetry(const Matrix& a) {
  if (!a.square()) return std::numeric_limits<double>::infinity();
  double diff = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      const double d = a(i, j) - a(j, i);
      diff += 2.0 * d * d;
    }
  const double n = frobenius_norm(a);
  return n == 0.0 ? 0.0 : std::sqrt(diff) / n;
}

struct SymEig {
  std::vector<double> values;  // descending
  Matrix vectors;              // column i pairs with values[i]
};

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps until the off-diagonal Frobenius norm falls below
/// `off_tol` times the norm of the input; eigenvalues are returned in
/// descending order with matching eigenvector columns.
inline SymEig sym_eig(const Matrix& a, double off_tol = 1e-12, int max_sweeps = 100) {
  if (!a.square()) throw NumericError("sym_eig: matrix is not square");
  if (!a.all_finite()) throw NumericError("sym_eig: non-finite entry");
  if (relative_asymmetry(a) > 1e-10) {
    throw NumericError("sym_eig: matrix is not symmetric (relative asymmetry " +
                       std::to_string(relative_asymmetry(a)) + ")");
  }
  const std::size_t n = a.rows();
  Matrix w = a;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) w(i, j) = w(j, i) = 0.5 * (a(i, j) + a(j, i));
  Matrix v = Matrix::identity(n);
  const double scale = frobenius_norm(w);

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * w(i, j) * w(i, j);
    return std::sqrt(s);
  };

  int sweep = 0;
  while (scale > 0.0 && off_norm() > off_tol * scale) {
    if (sweep == max_sweeps) {
      throw NumericError("sym_eig: no convergence after " + std::to_string(sweep) +
                         " sweeps");
    }
    ++sweep;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = w(p, q);
        if (apq == 0.0) continue;
        const double theta = (w(q, q) - w(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double wkp = w(k, p);
          const double wkq = w(k, q);
          w(k, p) = c * wkp - s * wkq;
          w(k, q) = s * wkp + c * wkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double wpk = w(p, k);
          const double wqk = w(q, k);
          w(p, k) = c * wpk - s * wqk;
          w(q, k) = s * wpk + c * wqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return w(x, x) > w(y, y); });
  SymEig out{std::vector<double>(n), Matrix(n, n)};
  for (std::size_t i = 0; i < n; ++i) {
    out.values[i] = w(order[i], order[i]);
    for (std::size_t k = 0; k < n; ++k) out.vectors(k, i) = v(k, order[i]);
  }
  return out;
}

/// Lower-triangular L with L·Lᵀ = a.
inline Matrix cholesky(const Matrix& a) {
  if (!a.square()) throw NumericError("cholesky: matrix is not square");
  if (relative_asymmetry(a) > 1e-10) throw NumericError("cholesky: matrix is not symmetric");
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) {
      throw NumericError("cholesky: non-positive pivot at index " + std::to_string(j) +
                         " (value " + std::to_string(d) + ")");
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

/// Inverse of a lower-triangular matrix by forward substitution.
inline Matrix lower_triangular_inverse(const Matrix& l) {
  const std::size_t n = l.rows();
  Matrix inv(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = c; i < n; ++i) {
      double s = i == c ? 1.0 : 0.0;
      for (std::size_t k = c; k < i; ++k) s -= l(i, k) * inv(k, c);
      inv(i, c) = s / l(i, i);
    }
  }
  return inv;
}

/// General inverse via LU with partial pivoting.
inline Matrix inverse(const Matrix& a) {
  if (!a.square()) throw NumericError("inverse: matrix is not square");
  const std::size_t n = a.rows();
  Matrix lu = a;
  Matrix inv = Matrix::identity(n);
  const double scale = std::max(max_abs(a), std::numeric_limits<double>::min());
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(lu(r, c)) > std::abs(lu(piv, c))) piv = r;
    if (std::abs(lu(piv, c)) <= 1e-14 * scale) {
      throw NumericError("inverse: matrix is singular at column " + std::to_string(c));
    }
    if (piv != c) {
      std::swap_ranges(lu.row(c).begin(), lu.row(c).end(), lu.row(piv).begin());
      std::swap_ranges(inv.row(c).begin(), inv.row(c).end(), inv.row(piv).begin());
    }
    const double d = lu(c, c);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = lu(r, c) / d;
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k) {
        lu(r, k) -= f * lu(c, k);
        inv(r, k) -= f * inv(c, k);
      }
    }
  }
  for (std::size_t r = 0; r < n; ++r) {
    const double d = lu(r, r);
    for (std::size_t k = 0; k < n; ++k) inv(r, k) /= d;
  }
  return inv;
}

/// Singular values of a, descending, from the eigenvalues of aᵀa (or a·aᵀ
/// when that is smaller).
inline std::vector<double> singular_values(const Matrix& a) {
  const Matrix g = a.rows() >= a.cols() ? gram_cols(a) : gram_rows(a);
  auto values = sym_eig(g).values;
  for (double& v : values) v = std::sqrt(std::max(v, 0.0));
  return values;
}

inline double condition_number(const Matrix& a) {
  const auto sv = singular_values(a);
  if (sv.empty() || sv.back() == 0.0) return std::numeric_limits<double>::infinity();
  return sv.front() / sv.back();
}

/// Left pseudo-inverse (aᵀa)⁻¹aᵀ of a full-column-rank matrix.
inline Matrix pinv(const Matrix& a) {
  if (a.rows() < a.cols()) {
    throw NumericError("pinv: more columns than rows, cannot have full column rank");
  }
  const Matrix g = gram_cols(a);
  const auto eig = sym_eig(g);
  const double smax = std::sqrt(std::max(eig.values.front(), 0.0));
  const double smin = std::sqrt(std::max(eig.values.back(), 0.0));
  if (!(smin > 1e-10 * smax)) {
    throw NumericError("pinv: rank-deficient input (smallest singular value " +
                       std::to_string(smin) + ", largest " + std::to_string(smax) + ")");
  }
  // (aᵀa)⁻¹ from the eigendecomposition already in hand.
  const std::size_t n = g.rows();
  Matrix ginv(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double inv_l = 1.0 / eig.values[k];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        ginv(i, j) += eig.vectors(i, k) * inv_l * eig.vectors(j, k);
  }
  return ginv * a.transpose();
}

/// Greedy column-pivoted Gram-Schmidt: indices of `count` columns of a,
/// each chosen as the column with the largest residual norm after
/// projecting out the previously chosen ones.
inline std::vector<std::size_t> pivoted_columns(const Matrix& a, std::size_t count,
                                                double rank_tol = 1e-12) {
  if (count > a.cols() || count > a.rows()) {
    throw NumericError("pivoted_columns: cannot select " + std::to_string(count) +
                       " independent columns from " + std::to_string(a.rows()) + "x" +
                       std::to_string(a.cols()));
  }
  Matrix r = a.transpose();  // rows are the columns of a
  std::vector<double> norms(r.rows());
  double max_norm = 0.0;
  for (std::size_t c = 0; c < r.rows(); ++c) {
    norms[c] = norm2(r.row(c));
    max_norm = std::max(max_norm, norms[c]);
  }
  std::vector<std::size_t> picked;
  std::vector<bool> used(r.rows(), false);
  for (std::size_t step = 0; step < count; ++step) {
    std::size_t best = r.rows();
    double best_norm = -1.0;
    for (std::size_t c = 0; c < r.rows(); ++c) {
      if (used[c]) continue;
      const double nc = norm2(r.row(c));
      if (nc > best_norm) {
        best_norm = nc;
        best = c;
      }
    }
    if (best == r.rows() || !(best_norm > rank_tol * max_norm)) {
      throw NumericError("pivoted_columns: rank " + std::to_string(step) +
                         " is below the requested " + std::to_string(count));
    }
    used[best] = true;
    picked.push_back(best);
    std::vector<double> q(r.row(best).begin(), r.row(best).end());
    for (double& v : q) v /= best_norm;
    for (std::size_t c = 0; c < r.rows(); ++c) {
      if (used[c]) continue;
      auto rc = r.row(c);
      const double proj = dot(rc, q);
      for (std::size_t k = 0; k < rc.size(); ++k) rc[k] -= proj * q[k];
    }
  }
  return picked;
}

/// Permutation π (row i -> column π[i]) maximizing Σᵢ score(i, π[i]).
/// Solved exactly with the O(n³) Hungarian method on the negated scores.
inline std::vector<std::size_t> best_assignment(const Matrix& score) {
  if (!score.square()) throw NumericError("best_assignment: score matrix is not square");
  if (!score.all_finite()) throw NumericError("best_assignment: non-finite score");
  const std::size_t n = score.rows();
  if (n == 0) return {};
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials formulation; cost = -score.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -score(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

}  // namespace identconcepts

#endif  // IDENTCONCEPTS_NUMERICS_HPP
