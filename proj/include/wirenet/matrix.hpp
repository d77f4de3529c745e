#pragma once

#include <cassert>
#include <complex>
#include <cstddef>
#include <vector>

namespace wirenet {

using cplx = std::complex<double>;

// Dense square complex matrix, row major. Sized for Bloch kernels (|V| x |V|)
// and magnetic Harper blocks (a few hundred at most).
class CMatrix {
 public:
  CMatrix() = default;
  explicit CMatrix(int n) : n_(n), a_(static_cast<size_t>(n) * n) {}

  static CMatrix identity(int n) {
    CMatrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int size() const { return n_; }
  cplx& operator()(int i, int j) { return a_[static_cast<size_t>(i) * n_ + j]; }
  const cplx& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }
  cplx* data() { return a_.data(); }
  const cplx* data() const { return a_.data(); }

  friend CMatrix operator+(const CMatrix& x, const CMatrix& y) {
    assert(x.n_ == y.n_);
    CMatrix z(x.n_);
    for (size_t i = 0; i < x.a_.size(); ++i) z.a_[i] = x.a_[i] + y.a_[i];
    return z;
  }
  friend CMatrix operator-(const CMatrix& x, const CMatrix& y) {
    assert(x.n_ == y.n_);
    CMatrix z(x.n_);
    for (size_t i = 0; i < x.a_.size(); ++i) z.a_[i] = x.a_[i] - y.a_[i];
    return z;
  }
  friend CMatrix operator*(cplx s, const CMatrix& x) {
    CMatrix z(x.n_);
    for (size_t i = 0; i < x.a_.size(); ++i) z.a_[i] = s * x.a_[i];
    return z;
  }
  friend CMatrix operator*(const CMatrix& x, const CMatrix& y) {
    assert(x.n_ == y.n_);
    int n = x.n_;
    CMatrix z(n);
    for (int i = 0; i < n; ++i) {
      const cplx* xi = x.a_.data() + static_cast<size_t>(i) * n;
      cplx* zi = z.a_.data() + static_cast<size_t>(i) * n;
      for (int k = 0; k < n; ++k) {
        cplx xik = xi[k];
        if (xik == cplx(0.0)) continue;
        const cplx* yk = y.a_.data() + static_cast<size_t>(k) * n;
        for (int j = 0; j < n; ++j) zi[j] += xik * yk[j];
      }
    }
    return z;
  }

  CMatrix adjoint() const {
    CMatrix z(n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) z(j, i) = std::conj((*this)(i, j));
    return z;
  }

  double herm_defect() const {
    double m = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) m = std::max(m, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    return m;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : a_) m = std::max(m, std::abs(v));
    return m;
  }

  double frob_norm() const {
    double s = 0.0;
    for (const auto& v : a_) s += std::norm(v);
    return std::sqrt(s);
  }

  // Kronecker product; used by the clock/shift tensor construction.
  friend CMatrix kron(const CMatrix& x, const CMatrix& y) {
    int nx = x.n_, ny = y.n_;
    CMatrix z(nx * ny);
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < nx; ++j) {
        cplx v = x(i, j);
        if (v == cplx(0.0)) continue;
        for (int p = 0; p < ny; ++p)
          for (int q = 0; q < ny; ++q) z(i * ny + p, j * ny + q) = v * y(p, q);
      }
    return z;
  }

 private:
  int n_ = 0;
  std::vector<cplx> a_;
};

}  // namespace wirenet
