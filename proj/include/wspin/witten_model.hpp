#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "wspin/clifford.hpp"
#include "wspin/errors.hpp"
#include "wspin/quadrature.hpp"
#include "wspin/radial_geometry.hpp"

namespace wspin {

// Flat-harmonic partial wave attached to basis spinor `spinor`.
// l = 1: (x . c)/|x|^n ; l = 2: derivative of the l = 1 wave along `direction`.
struct Mode {
  int spinor = 0;
  int l = 1;
  Vec direction;
  Spinor coefficient;
};

struct WittenFamily {
  ModelManifold model;
  CliffordRep rep;
  std::vector<Spinor> basis;
  std::vector<Mode> modes;

  bool mode_free() const { return modes.empty(); }
};

inline WittenFamily make_witten_family(const ModelManifold& model, std::vector<Mode> modes = {},
                                       std::vector<Spinor> basis = {}) {
  WittenFamily f;
  f.model = model;
  f.rep = build_clifford_rep(model.n);
  f.basis = basis.empty() ? canonical_basis(f.rep) : std::move(basis);
  if (static_cast<int>(f.basis.size()) != f.rep.N)
    throw ShapeError("make_witten_family: basis must contain N spinors");
  for (int i = 0; i < f.rep.N; ++i)
    for (int j = 0; j < f.rep.N; ++j) {
      cplx ip = f.basis[i].dot(f.basis[j]);
      if (std::abs(ip - (i == j ? 1.0 : 0.0)) > 1e-14)
        throw NormalizationError("make_witten_family: basis is not orthonormal");
    }
  for (auto& m : modes) {
    if (m.spinor < 0 || m.spinor >= f.rep.N) throw DomainError("mode spinor index out of range");
    if (m.l != 1 && m.l != 2) throw DomainError("only l = 1 and l = 2 modes are supported");
    if (m.coefficient.size() != f.rep.N) throw ShapeError("mode coefficient must have N entries");
    if (m.l == 2 && m.direction.size() != f.rep.n)
      throw ShapeError("l = 2 mode needs a direction of length n");
  }
  f.modes = std::move(modes);
  return f;
}

// Sum of the partial waves attached to spinor i at x.
inline Spinor mode_sum(const WittenFamily& f, int i, const Vec& x) {
  const int n = f.rep.n;
  Spinor out = Spinor::Zero(f.rep.N);
  if (f.modes.empty()) return out;
  double r = x.norm();
  if (r < 1e-8) throw PoleError("partial waves are singular at the origin");
  for (auto& m : f.modes) {
    if (m.spinor != i) continue;
    Spinor xc = clifford_vector(f.rep, x) * m.coefficient;
    if (m.l == 1) {
      out += std::pow(r, -n) * xc;
    } else {
      Spinor dc = clifford_vector(f.rep, m.direction) * m.coefficient;
      out += std::pow(r, -n) * dc - (n * m.direction.dot(x) * std::pow(r, -n - 2)) * xc;
    }
  }
  return out;
}

inline Spinor witten_spinor(const WittenFamily& f, int i, const Vec& x) {
  if (i < 0 || i >= f.rep.N) throw DomainError("witten_spinor: index out of range");
  if (x.size() != f.rep.n) throw ShapeError("witten_spinor: point dimension");
  double r = x.norm();
  if (f.model.origin_excluded && r == 0.0)
    throw DomainError("witten_spinor: the model excludes the origin");
  double W = f.model.W.eval(r);
  return std::pow(W, -0.5 * (f.rep.n - 1)) * (f.basis[i] + mode_sum(f, i, x));
}

inline SpinorMatrix spinor_operator(const WittenFamily& f, const Vec& x) {
  SpinorMatrix P = SpinorMatrix::Zero(f.rep.N, f.rep.N);
  for (int i = 0; i < f.rep.N; ++i) {
    Spinor p = witten_spinor(f, i, x);
    P += p * p.adjoint();
  }
  return P;
}

// Conformally transformed operator on the diagonal, lambda^{1-n} Pi.
inline SpinorMatrix spinor_operator_tilde(const WittenFamily& f, const Vec& x, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("spinor_operator_tilde: lambda must be positive");
  return std::pow(lambda, 1 - f.rep.n) * spinor_operator(f, x);
}

// Schwarzschild weight: 0 on K, (1 + r^{2-n})^{-2(n-1)/(n-2)} on the end.
inline double schwarzschild_weight(int n, double rho, double r) {
  if (r < rho) return 0.0;
  return std::pow(1.0 + std::pow(r, 2.0 - n), -2.0 * (n - 1) / (n - 2));
}

inline std::vector<Spinor> deviation_spinors(const WittenFamily& f, const Vec& x) {
  const int n = f.rep.n;
  double r = x.norm();
  if (r < f.model.rho) throw DomainError("deviation_operator: point lies inside K");
  double ws = std::pow(1.0 + std::pow(r, 2.0 - n), -(n - 1.0) / (n - 2.0));
  double wm = std::pow(f.model.W.eval(r), -0.5 * (n - 1));
  // Equal factors cancel exactly rather than leaving rounding residue.
  double diff = wm - ws;
  if (std::abs(diff) <= 8.0 * std::numeric_limits<double>::epsilon() * ws) diff = 0.0;
  std::vector<Spinor> out;
  for (int i = 0; i < f.rep.N; ++i) out.push_back(diff * f.basis[i] + wm * mode_sum(f, i, x));
  return out;
}

inline SpinorMatrix deviation_operator(const WittenFamily& f, const Vec& x) {
  SpinorMatrix P = SpinorMatrix::Zero(f.rep.N, f.rep.N);
  for (auto& d : deviation_spinors(f, x)) P += d * d.adjoint();
  return P;
}

// Evaluators for Pi, Pi tilde, delta Pi and the weight.
struct OperatorField {
  const WittenFamily* family = nullptr;

  SpinorMatrix pi(const Vec& x) const { return spinor_operator(*family, x); }
  SpinorMatrix pi_tilde(const Vec& x, double lambda) const {
    return spinor_operator_tilde(*family, x, lambda);
  }
  SpinorMatrix delta_pi(const Vec& x) const { return deviation_operator(*family, x); }
  double weight(double r) const {
    return schwarzschild_weight(family->rep.n, family->model.rho, r);
  }
};

inline SphereGrid default_sphere_grid(int n) {
  return n == 3 ? sphere_grid(3, 16, 32) : sphere_grid(n, 12, 24);
}

struct PartialWaveResult {
  double pi_minus_weight = 0.0;
  double deviation = 0.0;
  double difference() const { return std::abs(pi_minus_weight - deviation); }
};

// Angular integrals of Tr(Pi - w I) and Tr(delta Pi) over the sphere of radius r.
inline PartialWaveResult partial_wave_check(const WittenFamily& f, double r,
                                            const SphereGrid* grid = nullptr) {
  if (!(r >= f.model.rho)) throw DomainError("partial_wave_check: radius inside K");
  SphereGrid local;
  if (!grid) {
    local = default_sphere_grid(f.rep.n);
    grid = &local;
  }
  const double w = schwarzschild_weight(f.rep.n, f.model.rho, r);
  CompensatedSum a, b;
  for (std::size_t k = 0; k < grid->points.size(); ++k) {
    Vec x = r * grid->points[k];
    a.add(grid->weights[k] * (trace(spinor_operator(f, x)).real() - f.rep.N * w));
    b.add(grid->weights[k] * trace(deviation_operator(f, x)).real());
  }
  return {a.value(), b.value()};
}

}  // namespace wspin
