#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "wirenet/matrix.hpp"

namespace wirenet {

// Eigendecomposition of a Hermitian matrix. Eigenvalues ascending, columns of
// `vectors` are the corresponding eigenvectors with the largest-magnitude
// component rotated to the positive real axis.
struct Spectrum {
  std::vector<double> eigenvalues;
  CMatrix vectors;
  double residual = 0.0;     // max entry of H v - lambda v over all pairs
  double unitarity = 0.0;    // max entry of V^H V - I
};

namespace detail {

// One complex Jacobi rotation zeroing A(p,q). The unitary is
// diag(e^{i th},1) * [[c,s],[-s,c]] in the (p,q) plane.
inline void jacobi_rotate(CMatrix& A, CMatrix& V, int p, int q) {
  const cplx apq = A(p, q);
  const double g = std::abs(apq);
  if (g == 0.0) return;
  const cplx eith = apq / g;
  const double alpha = A(p, p).real();
  const double beta = A(q, q).real();
  const double tau = (beta - alpha) / (2.0 * g);
  const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;

  const int n = A.size();
  for (int r = 0; r < n; ++r) {
    if (r == p || r == q) continue;
    const cplx arp = A(r, p);
    const cplx arq = A(r, q);
    A(r, p) = arp * eith * c - arq * s;
    A(r, q) = arp * eith * s + arq * c;
    A(p, r) = std::conj(A(r, p));
    A(q, r) = std::conj(A(r, q));
  }
  A(p, p) = alpha - t * g;
  A(q, q) = beta + t * g;
  A(p, q) = 0.0;
  A(q, p) = 0.0;
  for (int r = 0; r < n; ++r) {
    const cplx vrp = V(r, p);
    const cplx vrq = V(r, q);
    V(r, p) = vrp * eith * c - vrq * s;
    V(r, q) = vrp * eith * s + vrq * c;
  }
}

inline double offdiag_frob(const CMatrix& A) {
  double s = 0.0;
  const int n = A.size();
  for (int p = 0; p < n; ++p)
    for (int q = p + 1; q < n; ++q) s += std::norm(A(p, q));
  return std::sqrt(2.0 * s);
}

}  // namespace detail

// Cyclic Jacobi sweeps until the off-diagonal Frobenius norm drops below
// 1e-13 (with a relative floor for large norms). Deterministic for identical
// input.
inline Spectrum eig_hermitian(const CMatrix& H, double herm_tol = 1e-10) {
  const int n = H.size();
  if (n == 0) throw std::invalid_argument("eig_hermitian: empty matrix");
  if (H.herm_defect() > herm_tol)
    throw std::invalid_argument("eig_hermitian: input not Hermitian within tolerance");

  CMatrix A = H;
  // Symmetrize away the representable part of the defect.
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      cplx m = 0.5 * (A(i, j) + std::conj(A(j, i)));
      A(i, j) = m;
      A(j, i) = std::conj(m);
    }
    A(i, i) = A(i, i).real();
  }
  CMatrix V = CMatrix::identity(n);

  const double tol = std::max(1e-13, 1e-15 * A.frob_norm());
  for (int sweep = 0; sweep < 100; ++sweep) {
    if (detail::offdiag_frob(A) < tol) break;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q)
        if (std::abs(A(p, q)) > 1e-300) detail::jacobi_rotate(A, V, p, q);
  }

  Spectrum out;
  out.eigenvalues.resize(n);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<double> d(n);
  for (int i = 0; i < n; ++i) d[i] = A(i, i).real();
  std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) { return d[a] < d[b]; });

  out.vectors = CMatrix(n);
  for (int j = 0; j < n; ++j) {
    out.eigenvalues[j] = d[perm[j]];
    int big = 0;
    double bigmag = -1.0;
    for (int i = 0; i < n; ++i) {
      double m = std::abs(V(i, perm[j]));
      if (m > bigmag + 1e-300 && m > bigmag) { bigmag = m; big = i; }
    }
    cplx ph = V(big, perm[j]);
    ph = (std::abs(ph) > 0.0) ? std::conj(ph) / std::abs(ph) : cplx(1.0);
    for (int i = 0; i < n; ++i) out.vectors(i, j) = V(i, perm[j]) * ph;
  }

  // Certify against the original input.
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      cplx acc = 0.0;
      for (int k = 0; k < n; ++k) acc += H(i, k) * out.vectors(k, j);
      acc -= out.eigenvalues[j] * out.vectors(i, j);
      out.residual = std::max(out.residual, std::abs(acc));
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      cplx acc = 0.0;
      for (int k = 0; k < n; ++k) acc += std::conj(out.vectors(k, i)) * out.vectors(k, j);
      if (i == j) acc -= 1.0;
      out.unitarity = std::max(out.unitarity, std::abs(acc));
    }
  }
  return out;
}

// Ascending eigenvalues only (skips the certification passes).
inline std::vector<double> eigvals_hermitian(const CMatrix& H, double herm_tol = 1e-10) {
  const int n = H.size();
  if (H.herm_defect() > herm_tol)
    throw std::invalid_argument("eigvals_hermitian: input not Hermitian within tolerance");
  CMatrix A = H;
  CMatrix dummy = CMatrix::identity(n);  // keeps one rotation code path
  const double tol = std::max(1e-13, 1e-15 * A.frob_norm());
  for (int sweep = 0; sweep < 100; ++sweep) {
    if (detail::offdiag_frob(A) < tol) break;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q)
        if (std::abs(A(p, q)) > 1e-300) detail::jacobi_rotate(A, dummy, p, q);
  }
  std::vector<double> d(n);
  for (int i = 0; i < n; ++i) d[i] = A(i, i).real();
  std::sort(d.begin(), d.end());
  return d;
}

}  // namespace wirenet
