#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "acm/errors.hpp"

namespace acm {

using cplx = std::complex<double>;

inline constexpr cplx I_UNIT{0.0, 1.0};

// Thresholds for density-matrix validity. Passed explicitly where a caller
// wants something looser or tighter.
struct Tolerances {
  double hermitian = 1e-10;
  double trace = 1e-10;
  double min_eigenvalue = -1e-9;
};

inline constexpr Tolerances DEFAULT_TOLERANCES{};

class CplxMatrix {
 public:
  CplxMatrix() = default;
  CplxMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  CplxMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionError("entry count " + std::to_string(data_.size()) + " does not match " +
                           std::to_string(rows_) + "x" + std::to_string(cols_));
    }
  }

  static CplxMatrix identity(std::size_t n) {
    CplxMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static CplxMatrix diagonal(const std::vector<cplx>& d) {
    CplxMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool is_square() const { return rows_ == cols_; }

  cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  cplx* data() { return data_.data(); }
  const cplx* data() const { return data_.data(); }
  const std::vector<cplx>& entries() const { return data_; }

  CplxMatrix& operator+=(const CplxMatrix& o) {
    same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  CplxMatrix& operator-=(const CplxMatrix& o) {
    same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  CplxMatrix& operator*=(cplx a) {
    for (auto& x : data_) x *= a;
    return *this;
  }

  CplxMatrix adjoint() const {
    CplxMatrix r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
    return r;
  }

  CplxMatrix transpose() const {
    CplxMatrix r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
    return r;
  }

  cplx trace() const {
    if (!is_square()) throw DimensionError("trace of non-square matrix");
    cplx t = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
    return t;
  }

  std::size_t count_nonzero() const {
    std::size_t n = 0;
    for (const auto& x : data_)
      if (x.real() != 0.0 || x.imag() != 0.0) ++n;
    return n;
  }

 private:
  void same_shape(const CplxMatrix& o) const {
    if (o.rows_ != rows_ || o.cols_ != cols_) {
      throw DimensionError("shape mismatch " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                           " vs " + std::to_string(o.rows_) + "x" + std::to_string(o.cols_));
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

inline CplxMatrix operator+(CplxMatrix a, const CplxMatrix& b) { return a += b; }
inline CplxMatrix operator-(CplxMatrix a, const CplxMatrix& b) { return a -= b; }
inline CplxMatrix operator*(cplx s, CplxMatrix a) { return a *= s; }
inline CplxMatrix operator*(CplxMatrix a, cplx s) { return a *= s; }
inline CplxMatrix operator-(CplxMatrix a) { return a *= -1.0; }

// Matrix product. The loop order is picked from the operand fill so that the
// many structurally sparse operators (ladder, V_n, U_n) cost O(nnz * n).
inline CplxMatrix mul(const CplxMatrix& a, const CplxMatrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("product of " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " and " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  const std::size_t r = a.rows(), k_n = a.cols(), m = b.cols();
  CplxMatrix c(r, m);
  const double* A = reinterpret_cast<const double*>(a.data());
  const double* B = reinterpret_cast<const double*>(b.data());
  double* C = reinterpret_cast<double*>(c.data());
  const std::size_t nnz_a = a.count_nonzero();
  const std::size_t nnz_b = b.count_nonzero();
  if (nnz_a * m <= nnz_b * r) {
    for (std::size_t i = 0; i < r; ++i) {
      double* crow = C + 2 * i * m;
      for (std::size_t k = 0; k < k_n; ++k) {
        const double ar = A[2 * (i * k_n + k)], ai = A[2 * (i * k_n + k) + 1];
        if (ar == 0.0 && ai == 0.0) continue;
        const double* brow = B + 2 * k * m;
        for (std::size_t j = 0; j < m; ++j) {
          const double br = brow[2 * j], bi = brow[2 * j + 1];
          crow[2 * j] += ar * br - ai * bi;
          crow[2 * j + 1] += ar * bi + ai * br;
        }
      }
    }
  } else {
    for (std::size_t k = 0; k < k_n; ++k) {
      for (std::size_t j = 0; j < m; ++j) {
        const double br = B[2 * (k * m + j)], bi = B[2 * (k * m + j) + 1];
        if (br == 0.0 && bi == 0.0) continue;
        for (std::size_t i = 0; i < r; ++i) {
          const double ar = A[2 * (i * k_n + k)], ai = A[2 * (i * k_n + k) + 1];
          C[2 * (i * m + j)] += ar * br - ai * bi;
          C[2 * (i * m + j) + 1] += ar * bi + ai * br;
        }
      }
    }
  }
  return c;
}

inline CplxMatrix operator*(const CplxMatrix& a, const CplxMatrix& b) { return mul(a, b); }

inline CplxMatrix commutator(const CplxMatrix& a, const CplxMatrix& b) { return mul(a, b) - mul(b, a); }

inline CplxMatrix anticommutator(const CplxMatrix& a, const CplxMatrix& b) { return mul(a, b) + mul(b, a); }

inline CplxMatrix kron(const CplxMatrix& a, const CplxMatrix& b) {
  CplxMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const cplx aij = a(i, j);
      if (aij == 0.0) continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l) r(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return r;
}

enum class Keep { A, B };

// Reduced matrix of a bipartite operator with composite index a*dB + b.
inline CplxMatrix partial_trace(const CplxMatrix& m, std::size_t dA, std::size_t dB, Keep keep) {
  if (!m.is_square() || m.rows() != dA * dB) {
    throw DimensionError("partial_trace: matrix is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected " + std::to_string(dA * dB) + " square");
  }
  if (keep == Keep::A) {
    CplxMatrix r(dA, dA);
    for (std::size_t a = 0; a < dA; ++a)
      for (std::size_t a2 = 0; a2 < dA; ++a2) {
        cplx s = 0.0;
        for (std::size_t b = 0; b < dB; ++b) s += m(a * dB + b, a2 * dB + b);
        r(a, a2) = s;
      }
    return r;
  }
  CplxMatrix r(dB, dB);
  for (std::size_t b = 0; b < dB; ++b)
    for (std::size_t b2 = 0; b2 < dB; ++b2) {
      cplx s = 0.0;
      for (std::size_t a = 0; a < dA; ++a) s += m(a * dB + b, a * dB + b2);
      r(b, b2) = s;
    }
  return r;
}

inline cplx expectation(const CplxMatrix& op, const CplxMatrix& rho) {
  if (op.cols() != rho.rows() || op.rows() != rho.cols()) {
    throw DimensionError("expectation: operator and state shapes differ");
  }
  cplx t = 0.0;
  for (std::size_t i = 0; i < op.rows(); ++i)
    for (std::size_t k = 0; k < op.cols(); ++k) t += op(i, k) * rho(k, i);
  return t;
}

inline CplxMatrix lindblad_J(const CplxMatrix& op, const CplxMatrix& rho) {
  const CplxMatrix opd = op.adjoint();
  const CplxMatrix n = mul(opd, op);
  return mul(mul(op, rho), opd) - 0.5 * anticommutator(rho, n);
}

inline double max_abs(const CplxMatrix& m) {
  double r = 0.0;
  for (const auto& x : m.entries()) r = std::max(r, std::abs(x));
  return r;
}

inline double hermiticity_error(const CplxMatrix& m) {
  double r = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i; j < m.cols(); ++j) r = std::max(r, std::abs(m(i, j) - std::conj(m(j, i))));
  return r;
}

inline double norm1(const CplxMatrix& m) {
  double best = 0.0;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) s += std::abs(m(i, j));
    best = std::max(best, s);
  }
  return best;
}

// LU with partial pivoting; solves a x = b for every column of b.
inline CplxMatrix solve(CplxMatrix a, CplxMatrix b, double singular_tol = 1e-300) {
  const std::size_t n = a.rows();
  if (!a.is_square() || b.rows() != n) throw DimensionError("solve: incompatible shapes");
  const std::size_t m = b.cols();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    double best = std::abs(a(col, col));
    for (std::size_t i = col + 1; i < n; ++i) {
      if (std::abs(a(i, col)) > best) {
        best = std::abs(a(i, col));
        piv = i;
      }
    }
    if (best <= singular_tol) throw ConditioningError("solve: singular matrix");
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
      for (std::size_t j = 0; j < m; ++j) std::swap(b(col, j), b(piv, j));
    }
    const cplx inv = 1.0 / a(col, col);
    for (std::size_t i = col + 1; i < n; ++i) {
      const cplx f = a(i, col) * inv;
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) a(i, j) -= f * a(col, j);
      for (std::size_t j = 0; j < m; ++j) b(i, j) -= f * b(col, j);
    }
  }
  CplxMatrix x(n, m);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t ii = n; ii-- > 0;) {
      cplx s = b(ii, j);
      for (std::size_t k = ii + 1; k < n; ++k) s -= a(ii, k) * x(k, j);
      x(ii, j) = s / a(ii, ii);
    }
  }
  return x;
}

inline CplxMatrix inverse(const CplxMatrix& a) { return solve(a, CplxMatrix::identity(a.rows())); }

// Scaling and squaring with the degree-13 Pade approximant.
inline CplxMatrix matexp(const CplxMatrix& m) {
  if (!m.is_square()) throw DimensionError("matexp of non-square matrix");
  const std::size_t n = m.rows();
  if (n > 1024) throw DimensionError("matexp: dimension above 1024");
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;
  const double nrm = norm1(m);
  int s = 0;
  if (nrm > theta13) s = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
  const CplxMatrix a = std::ldexp(1.0, -s) * m;
  const CplxMatrix id = CplxMatrix::identity(n);
  const CplxMatrix a2 = a * a;
  const CplxMatrix a4 = a2 * a2;
  const CplxMatrix a6 = a4 * a2;
  CplxMatrix u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
  const CplxMatrix u = a * u_inner;
  const CplxMatrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
  CplxMatrix r = solve(v - u, v + u);
  for (int k = 0; k < s; ++k) r = r * r;
  return r;
}

// Cyclic Jacobi on the real symmetric embedding [[Re, -Im], [Im, Re]].
namespace detail {

inline void jacobi_symmetric(std::vector<double>& a, std::size_t n, std::vector<double>& v) {
  v.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  double scale = 0.0;
  for (double x : a) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::abs(a[p * n + q]));
    if (off <= 1e-15 * scale) return;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p], vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }
  throw NumericalDegradation("Jacobi eigensolver did not converge");
}

struct Embedded {
  std::vector<double> values;  // 2n, unsorted
  std::vector<double> vectors; // 2n x 2n row-major, columns are eigenvectors
  std::size_t n2 = 0;
};

inline Embedded embed_and_solve(const CplxMatrix& h) {
  const std::size_t n = h.rows();
  const std::size_t n2 = 2 * n;
  std::vector<double> a(n2 * n2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      // symmetrize to absorb round-off in nominally Hermitian input
      const cplx x = 0.5 * (h(i, j) + std::conj(h(j, i)));
      a[i * n2 + j] = x.real();
      a[(i + n) * n2 + (j + n)] = x.real();
      a[(i + n) * n2 + j] = x.imag();
      a[i * n2 + (j + n)] = -x.imag();
    }
  Embedded e;
  e.n2 = n2;
  jacobi_symmetric(a, n2, e.vectors);
  e.values.resize(n2);
  for (std::size_t i = 0; i < n2; ++i) e.values[i] = a[i * n2 + i];
  return e;
}

}  // namespace detail

inline std::vector<double> eigvalsh(const CplxMatrix& h) {
  if (!h.is_square()) throw DimensionError("eigvalsh of non-square matrix");
  auto e = detail::embed_and_solve(h);
  std::sort(e.values.begin(), e.values.end());
  std::vector<double> out(h.rows());
  for (std::size_t i = 0; i < h.rows(); ++i) out[i] = 0.5 * (e.values[2 * i] + e.values[2 * i + 1]);
  return out;
}

// f(H) for Hermitian H, evaluated through the real embedding.
inline CplxMatrix apply_hermitian(const CplxMatrix& h, const std::function<double(double)>& f) {
  if (!h.is_square()) throw DimensionError("apply_hermitian of non-square matrix");
  const auto e = detail::embed_and_solve(h);
  const std::size_t n = h.rows(), n2 = e.n2;
  std::vector<double> fv(n2);
  for (std::size_t k = 0; k < n2; ++k) fv[k] = f(e.values[k]);
  CplxMatrix r(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double re = 0.0, im = 0.0;
      for (std::size_t k = 0; k < n2; ++k) {
        const double w = fv[k] * e.vectors[j * n2 + k];
        re += e.vectors[i * n2 + k] * w;
        im += e.vectors[(i + n) * n2 + k] * w;
      }
      r(i, j) = cplx(re, im);
    }
  return r;
}

inline double min_eigenvalue(const CplxMatrix& h) { return eigvalsh(h).front(); }

struct DensityReport {
  double hermiticity = 0.0;
  double trace_error = 0.0;
  double min_eigenvalue = 0.0;
  bool ok = false;
};

inline DensityReport check_density(const CplxMatrix& rho, const Tolerances& tol = DEFAULT_TOLERANCES) {
  DensityReport r;
  if (!rho.is_square()) return r;
  r.hermiticity = hermiticity_error(rho);
  r.trace_error = std::abs(rho.trace() - 1.0);
  r.min_eigenvalue = min_eigenvalue(rho);
  r.ok = r.hermiticity <= tol.hermitian && r.trace_error <= tol.trace && r.min_eigenvalue >= tol.min_eigenvalue;
  return r;
}

inline void require_density(const CplxMatrix& rho, const std::string& what,
                            const Tolerances& tol = DEFAULT_TOLERANCES) {
  const auto r = check_density(rho, tol);
  if (!r.ok) {
    throw NumericalDegradation(what + ": not a valid density matrix (hermiticity " + std::to_string(r.hermiticity) +
                               ", trace error " + std::to_string(r.trace_error) + ", min eigenvalue " +
                               std::to_string(r.min_eigenvalue) + ")");
  }
}

// Cheap structural checks used on hot paths (no eigensolve).
inline bool looks_like_density(const CplxMatrix& rho, const Tolerances& tol = DEFAULT_TOLERANCES) {
  if (!rho.is_square()) return false;
  if (hermiticity_error(rho) > tol.hermitian || std::abs(rho.trace() - 1.0) > tol.trace) return false;
  for (std::size_t i = 0; i < rho.rows(); ++i)
    if (rho(i, i).real() < tol.min_eigenvalue) return false;
  return true;
}

}  // namespace acm
