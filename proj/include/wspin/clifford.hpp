#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "wspin/errors.hpp"

namespace wspin {

using cplx = std::complex<double>;
using SpinorMatrix = Eigen::MatrixXcd;
using Spinor = Eigen::VectorXcd;
using Vec = Eigen::VectorXd;

struct CliffordRep {
  int n = 0;
  int N = 0;
  std::vector<SpinorMatrix> gammas;
  double omega = 0.0;

  SpinorMatrix identity() const { return SpinorMatrix::Identity(N, N); }
};

namespace detail {

inline SpinorMatrix kron(const SpinorMatrix& a, const SpinorMatrix& b) {
  SpinorMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

inline SpinorMatrix pauli(int which) {
  SpinorMatrix s(2, 2);
  const cplx I(0.0, 1.0);
  switch (which) {
    case 1: s << 0, 1, 1, 0; break;
    case 2: s << 0, -I, I, 0; break;
    case 3: s << 1, 0, 0, -1; break;
    default: s = SpinorMatrix::Identity(2, 2);
  }
  return s;
}

// sigma3^{(k)} (x) P (x) I^{(m-k-1)}
inline SpinorMatrix jordan_wigner(int m, int k, int which) {
  SpinorMatrix out = SpinorMatrix::Identity(1, 1);
  for (int j = 0; j < m; ++j) {
    int f = j < k ? 3 : (j == k ? which : 0);
    out = kron(out, pauli(f));
  }
  return out;
}

}  // namespace detail

// Anti-Hermitian generators with g_i g_j + g_j g_i = -2 delta_ij.
inline CliffordRep build_clifford_rep(int n) {
  if (n < 3) throw DomainError("build_clifford_rep: dimension must be at least 3");
  const int m = n / 2;
  CliffordRep rep;
  rep.n = n;
  rep.N = 1 << m;
  rep.omega = 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
  const cplx I(0.0, 1.0);
  for (int k = 0; k < m; ++k) {
    rep.gammas.push_back(I * detail::jordan_wigner(m, k, 1));
    rep.gammas.push_back(I * detail::jordan_wigner(m, k, 2));
  }
  if (n % 2 == 1) rep.gammas.push_back(I * detail::jordan_wigner(m, m, 0));
  return rep;
}

// Clifford image of a vector, sum_i v_i gamma_i.
inline SpinorMatrix clifford_vector(const CliffordRep& rep, const Vec& v) {
  if (v.size() != rep.n) throw ShapeError("clifford_vector: vector length does not match n");
  SpinorMatrix out = SpinorMatrix::Zero(rep.N, rep.N);
  for (int i = 0; i < rep.n; ++i)
    if (v[i] != 0.0) out += v[i] * rep.gammas[i];
  return out;
}

inline SpinorMatrix clifford_mul(const CliffordRep& rep, const Vec& v, const SpinorMatrix& m) {
  if (m.rows() != rep.N || m.cols() != rep.N)
    throw ShapeError("clifford_mul: matrix is not N x N");
  return clifford_vector(rep, v) * m;
}

inline cplx trace(const SpinorMatrix& m) {
  if (m.rows() != m.cols()) throw ShapeError("trace: matrix is not square");
  return m.trace();
}

// Orthonormal constant spinors, the canonical basis of C^N.
inline std::vector<Spinor> canonical_basis(const CliffordRep& rep) {
  std::vector<Spinor> b;
  for (int i = 0; i < rep.N; ++i) b.push_back(Spinor::Unit(rep.N, i));
  return b;
}

}  // namespace wspin
