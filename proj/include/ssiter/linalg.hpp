#pragma once

// Dense small-scale linear algebra: vectors, square matrices, induced
// infinity norms, the Jacobi split and a pivoting direct solver used as the
// exact-solution oracle.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstddef>
#include <initializer_list>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ssiter/errors.hpp"

namespace ssiter {

class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t n, double fill = 0.0) : data_(n, fill) {}
  Vector(std::initializer_list<double> values) : data_(values) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t size() const noexcept { return data_.size(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> span() noexcept { return data_; }
  std::span<const double> span() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  bool operator==(const Vector&) const = default;

 private:
  std::vector<double> data_;
};

// Square n x n matrix, row-major.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows) : n_(rows.size()) {
    data_.reserve(n_ * n_);
    for (const auto& row : rows) {
      if (row.size() != n_) throw DimensionMismatch("matrix literal is not square");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix diagonal(const Vector& d) {
    Matrix m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * n_, n_);
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

namespace detail {

inline void require_same(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionMismatch(std::string(what) + ": " + std::to_string(a) + " vs " +
                            std::to_string(b));
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Arithmetic

inline Vector operator+(const Vector& x, const Vector& y) {
  detail::require_same(x.size(), y.size(), "vector add");
  Vector r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] + y[i];
  return r;
}

inline Vector operator-(const Vector& x, const Vector& y) {
  detail::require_same(x.size(), y.size(), "vector subtract");
  Vector r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] - y[i];
  return r;
}

inline Vector operator*(double s, const Vector& x) {
  Vector r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = s * x[i];
  return r;
}

inline Vector operator*(const Matrix& m, const Vector& x) {
  detail::require_same(m.size(), x.size(), "matrix-vector product");
  const std::size_t n = m.size();
  Vector r(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += m(i, j) * x[j];
    r[i] = acc;
  }
  return r;
}

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  detail::require_same(a.size(), b.size(), "matrix product");
  const std::size_t n = a.size();
  Matrix r(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) r(i, j) += aik * b(k, j);
    }
  }
  return r;
}

inline Matrix operator+(const Matrix& a, const Matrix& b) {
  detail::require_same(a.size(), b.size(), "matrix add");
  Matrix r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) r(i, j) = a(i, j) + b(i, j);
  return r;
}

inline Matrix operator-(const Matrix& a, const Matrix& b) {
  detail::require_same(a.size(), b.size(), "matrix subtract");
  Matrix r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) r(i, j) = a(i, j) - b(i, j);
  return r;
}

inline Matrix operator*(double s, const Matrix& a) {
  Matrix r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) r(i, j) = s * a(i, j);
  return r;
}

inline Matrix transpose(const Matrix& a) {
  Matrix r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) r(j, i) = a(i, j);
  return r;
}

// (C + C^T) / 2
inline Matrix symmetrized(const Matrix& c) {
  Matrix r(c.size());
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = 0; j < c.size(); ++j) r(i, j) = 0.5 * (c(i, j) + c(j, i));
  return r;
}

inline bool all_finite(const Vector& x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

inline bool all_finite(const Matrix& m) {
  for (std::size_t i = 0; i < m.size(); ++i)
    for (double v : m.row(i))
      if (!std::isfinite(v)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Norms

/// max_i |x_i|
inline double inf_norm(const Vector& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

/// Induced infinity norm: the maximum absolute row sum.
inline double inf_norm(const Matrix& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    double row_sum = 0.0;
    for (double v : m.row(i)) row_sum += std::abs(v);
    best = std::max(best, row_sum);
  }
  return best;
}

inline double frobenius_norm(const Matrix& m) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (double v : m.row(i)) acc += v * v;
  return std::sqrt(acc);
}

// ---------------------------------------------------------------------------
// Jacobi split

/// A = diag(W)^-1 and B = I - diag(W)^-1 W, with their infinity norms.
struct JacobiSplit {
  Matrix a;
  Matrix b;
  double norm_a = 0.0;
  double norm_b = 0.0;
};

/// Entry B_ij (i != j) of the Jacobi iteration matrix. Shared with the
/// node-local weights so both agree bit for bit.
inline double jacobi_offdiag(double w_ij, double w_ii) { return -(w_ij / w_ii); }

inline JacobiSplit jacobi_split(const Matrix& w) {
  const std::size_t n = w.size();
  JacobiSplit s{Matrix(n), Matrix(n), 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const double wii = w(i, i);
    if (wii == 0.0) throw ZeroDiagonal(i);
    s.a(i, i) = 1.0 / wii;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) s.b(i, j) = jacobi_offdiag(w(i, j), wii);
    }
  }
  s.norm_a = inf_norm(s.a);
  s.norm_b = inf_norm(s.b);
  return s;
}

/// Strict row dominance |M_ii| > sum_{j!=i} |M_ij| together with |M_ii| >= 1.
inline bool is_normalized_diag_dominant(const Matrix& w) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    double off = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j)
      if (j != i) off += std::abs(w(i, j));
    const double d = std::abs(w(i, i));
    if (!(d > off) || d < 1.0) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Direct solver

/// LU factorization with partial pivoting, PA = LU stored in place.
class LuDecomposition {
 public:
  static constexpr double kPivotTolerance = 1e-12;

  explicit LuDecomposition(const Matrix& w) : lu_(w), perm_(w.size()) {
    const std::size_t n = w.size();
    const double threshold = kPivotTolerance * inf_norm(w);
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;

    for (std::size_t k = 0; k < n; ++k) {
      std::size_t p = k;
      double best = std::abs(lu_(k, k));
      for (std::size_t i = k + 1; i < n; ++i) {
        if (std::abs(lu_(i, k)) > best) {
          best = std::abs(lu_(i, k));
          p = i;
        }
      }
      if (best < threshold || best == 0.0) throw Singular(k);
      if (p != k) {
        for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
        std::swap(perm_[k], perm_[p]);
      }
      const double pivot = lu_(k, k);
      for (std::size_t i = k + 1; i < n; ++i) {
        const double f = lu_(i, k) / pivot;
        lu_(i, k) = f;
        if (f == 0.0) continue;
        for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
      }
    }
  }

  Vector solve(const Vector& v) const {
    const std::size_t n = lu_.size();
    detail::require_same(n, v.size(), "solve");
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = v[perm_[i]];
      for (std::size_t j = 0; j < i; ++j) acc -= lu_(i, j) * x[j];
      x[i] = acc;
    }
    for (std::size_t i = n; i-- > 0;) {
      double acc = x[i];
      for (std::size_t j = i + 1; j < n; ++j) acc -= lu_(i, j) * x[j];
      x[i] = acc / lu_(i, i);
    }
    return x;
  }

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
};

/// u with W u = v.
inline Vector solve_exact(const Matrix& w, const Vector& v) {
  detail::require_same(w.size(), v.size(), "solve_exact");
  return LuDecomposition(w).solve(v);
}

inline Matrix mat_inverse(const Matrix& w) {
  const std::size_t n = w.size();
  LuDecomposition lu(w);
  Matrix inv(n);
  for (std::size_t j = 0; j < n; ++j) {
    Vector e(n);
    e[j] = 1.0;
    const Vector col = lu.solve(e);
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  return inv;
}

/// Lower-triangular L with L L^T = S for a symmetric positive semidefinite S.
/// Columns whose pivot vanishes (within tolerance) are left zero, so singular
/// covariances such as S = 0 are accepted.
inline Matrix cholesky_psd(const Matrix& s, double tolerance = 1e-10) {
  const std::size_t n = s.size();
  const double scale = std::max(1.0, inf_norm(s));
  const double tol = tolerance * scale;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(s(i, j) - s(j, i)) > tol) throw BadCovariance("covariance is not symmetric");

  Matrix l(n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = s(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (d < -tol) throw BadCovariance("covariance is not positive semidefinite");
    if (d <= tol) {
      // Zero pivot: the remaining entries of this column must vanish too.
      for (std::size_t i = j + 1; i < n; ++i) {
        double r = s(i, j);
        for (std::size_t k = 0; k < j; ++k) r -= l(i, k) * l(j, k);
        if (std::abs(r) > std::sqrt(tol)) throw BadCovariance("covariance is not positive semidefinite");
      }
      continue;
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double r = s(i, j);
      for (std::size_t k = 0; k < j; ++k) r -= l(i, k) * l(j, k);
      l(i, j) = r / ljj;
    }
  }
  return l;
}

// ---------------------------------------------------------------------------
// Text format: first line n, then n lines of n whitespace-separated decimals.

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline Matrix read_matrix(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;

  auto next_content_line = [&](std::string& out) {
    while (std::getline(in, out)) {
      ++line_no;
      if (out.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };

  if (!next_content_line(line)) throw ParseError(line_no + 1, "missing dimension line");
  std::size_t n = 0;
  {
    std::istringstream ls(line);
    long long parsed = 0;
    std::string extra;
    if (!(ls >> parsed) || (ls >> extra) || parsed <= 0)
      throw ParseError(line_no, "expected a positive dimension");
    n = static_cast<std::size_t>(parsed);
  }

  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!next_content_line(line)) {
      throw DimensionMismatch("expected " + std::to_string(n) + " rows, found " + std::to_string(i));
    }
    std::istringstream ls(line);
    std::size_t j = 0;
    std::string tok;
    while (ls >> tok) {
      if (j >= n) throw DimensionMismatch("row at line " + std::to_string(line_no) + " has more than " + std::to_string(n) + " entries");
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        throw ParseError(line_no, "not a number: '" + tok + "'");
      }
      if (used != tok.size() || !std::isfinite(v)) throw ParseError(line_no, "not a finite number: '" + tok + "'");
      m(i, j++) = v;
    }
    if (j != n) {
      throw DimensionMismatch("row at line " + std::to_string(line_no) + " has " + std::to_string(j) +
                              " entries, expected " + std::to_string(n));
    }
  }
  if (next_content_line(line)) throw DimensionMismatch("trailing rows after " + std::to_string(n) + " rows");
  return m;
}

inline void write_matrix(std::ostream& out, const Matrix& m) {
  out << m.size() << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (j) out << ' ';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

}  // namespace ssiter
