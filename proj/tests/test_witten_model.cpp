#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "helpers.hpp"

using namespace wspin;
using wspin::test::max_abs;

namespace {

ModelManifold flat_model(int n) {
  ModelManifold m;
  m.n = n;
  m.rho = 1.0;
  m.W = RadialProfile::constant(1.0);
  m.label = "flat";
  return m;
}

Spinor spinor(std::initializer_list<cplx> v) {
  Spinor s(static_cast<int>(v.size()));
  int i = 0;
  for (cplx c : v) s[i++] = c;
  return s;
}

std::vector<Mode> sample_modes(int n) {
  CliffordRep rep = build_clifford_rep(n);
  Spinor c1 = Spinor::Zero(rep.N), c2 = Spinor::Zero(rep.N);
  c1[0] = cplx(0.3, 0.0);
  c1[1] = cplx(0.0, 0.1);
  c2[0] = cplx(0.2, 0.0);
  c2[rep.N - 1] = cplx(-0.4, 0.0);
  Vec d = Vec::Zero(n);
  d[1] = 0.6;
  d[2] = 0.8;
  return {Mode{0, 1, Vec(), c1}, Mode{1, 2, d, c2}};
}

// Flat Dirac operator sum_i gamma_i d_i applied to x -> mode_sum(f, i, x).
Spinor flat_dirac_of_modes(const WittenFamily& f, int i, const Vec& x, double h) {
  Spinor acc = Spinor::Zero(f.rep.N);
  for (int k = 0; k < f.rep.n; ++k) {
    Vec dx = Vec::Zero(f.rep.n);
    dx[k] = h;
    acc += f.rep.gammas[k] * (mode_sum(f, i, x + dx) - mode_sum(f, i, x - dx)) / (2.0 * h);
  }
  return acc;
}

}  // namespace

TEST(WittenSpinor, FlatModeFreeIsTheBasis) {
  WittenFamily f = make_witten_family(flat_model(3));
  Vec x(3);
  x << 0.3, -1.2, 2.0;
  for (int i = 0; i < 2; ++i) EXPECT_LE((witten_spinor(f, i, x) - f.basis[i]).norm(), 1e-15);
  EXPECT_LE(max_abs(spinor_operator(f, x) - f.rep.identity()), 1e-15);
}

TEST(WittenSpinor, CappedModelAtRadiusOne) {
  WittenFamily f = make_witten_family(test::capped_model(3, 1.0));
  Vec x = Vec::Zero(3);
  x[2] = 1.0;
  for (int i = 0; i < 2; ++i)
    EXPECT_LE((witten_spinor(f, i, x) - 0.25 * f.basis[i]).norm(), 1e-15);
  EXPECT_LE(max_abs(spinor_operator(f, x) - f.rep.identity() / 16.0), 1e-15);
  EXPECT_NEAR(schwarzschild_weight(3, 1.0, 1.0), 1.0 / 16.0, 1e-16);
  EXPECT_EQ(schwarzschild_weight(3, 1.0, 0.99), 0.0);
}

TEST(WittenSpinor, ModesAreHarmonicForTheFlatDirac) {
  for (int n : {3, 4}) {
    WittenFamily f = make_witten_family(flat_model(n), sample_modes(n));
    std::mt19937_64 g(n);
    for (int trial = 0; trial < 10; ++trial) {
      Vec x = test::random_vec(g, n);
      x *= 1.5 / x.norm();
      for (int i = 0; i < 2; ++i) {
        double scale = mode_sum(f, i, x).norm() / x.norm();
        EXPECT_LE(flat_dirac_of_modes(f, i, x, 1e-4).norm(), 1e-6 * scale) << n << " " << i;
      }
    }
  }
}

TEST(WittenSpinor, ModesDecay) {
  for (int n : {3, 4}) {
    WittenFamily f = make_witten_family(flat_model(n), sample_modes(n));
    Vec u = Vec::Ones(n).normalized();
    for (double r : {2.0, 10.0, 100.0}) {
      double bound0 = 0.0, bound1 = 0.0;
      for (auto& m : f.modes) (m.spinor == 0 ? bound0 : bound1) += m.coefficient.norm();
      EXPECT_LE(mode_sum(f, 0, r * u).norm(), bound0 * std::pow(r, 1 - n) * (1 + 1e-12));
      EXPECT_LE(mode_sum(f, 1, r * u).norm(), (1 + n) * bound1 * std::pow(r, -n) * (1 + 1e-12));
    }
  }
}

TEST(SpinorOperator, PositiveSemidefinite) {
  for (int n : {3, 4}) {
    WittenFamily f = make_witten_family(test::capped_model(n, 1.0), sample_modes(n));
    std::mt19937_64 g(7);
    for (int trial = 0; trial < 30; ++trial) {
      Vec x = test::random_vec(g, n);
      SpinorMatrix P = spinor_operator(f, x);
      EXPECT_LE(max_abs(P - P.adjoint()), 1e-15);
      Eigen::SelfAdjointEigenSolver<SpinorMatrix> es(P);
      EXPECT_GE(es.eigenvalues().minCoeff(), -1e-14);
      SpinorMatrix D = deviation_operator(f, 2.0 * x / x.norm());
      EXPECT_GE(Eigen::SelfAdjointEigenSolver<SpinorMatrix>(D).eigenvalues().minCoeff(), -1e-14);
    }
  }
}

TEST(SpinorOperator, BasisRotationLeavesModeFreeOperatorUnchanged) {
  ModelManifold m = test::capped_model(4, 1.0);
  std::mt19937_64 g(4);
  SpinorMatrix A = test::random_matrix(g, 4);
  Eigen::HouseholderQR<SpinorMatrix> qr(A);
  SpinorMatrix Q = qr.householderQ();
  std::vector<Spinor> basis;
  for (int i = 0; i < 4; ++i) basis.push_back(Q.col(i));
  WittenFamily a = make_witten_family(m), b = make_witten_family(m, {}, basis);
  Vec x = Vec::Ones(4) * 0.4;
  EXPECT_LE(max_abs(spinor_operator(a, x) - spinor_operator(b, x)), 1e-14);
}

TEST(SpinorOperator, ConformalTilde) {
  WittenFamily f = make_witten_family(test::capped_model(3, 1.0));
  Vec x = Vec::Ones(3);
  EXPECT_LE(max_abs(spinor_operator_tilde(f, x, 2.0) - spinor_operator(f, x) / 4.0), 1e-16);
  EXPECT_THROW(spinor_operator_tilde(f, x, 0.0), DomainError);
  OperatorField op{&f};
  EXPECT_LE(max_abs(op.pi_tilde(x, 1.0) - op.pi(x)), 0.0);
  EXPECT_EQ(op.weight(0.5), 0.0);
}

TEST(Deviation, VanishesOnTheEndWithoutModes) {
  for (int n : {3, 4}) {
    WittenFamily f = make_witten_family(test::capped_model(n, 1.0, 0.5));
    for (double r : {1.0, 1.3, 4.0, 50.0}) {
      Vec x = Vec::Zero(n);
      x[0] = r;
      EXPECT_EQ(max_abs(deviation_operator(f, x)), 0.0);
      double w = schwarzschild_weight(n, 1.0, r);
      EXPECT_NEAR(trace(spinor_operator(f, x)).real(), f.rep.N * w, 1e-14 * f.rep.N * w);
    }
    EXPECT_THROW(deviation_operator(f, Vec::Zero(n)), DomainError);
  }
}

TEST(PartialWaves, AngularIntegralsAgree) {
  for (int n : {3, 4}) {
    std::vector<Mode> all = sample_modes(n);
    for (auto modes : {std::vector<Mode>{all[0]}, all}) {
      WittenFamily f = make_witten_family(test::capped_model(n, 1.0), modes);
      for (double r : {1.25, 2.0, 10.0}) {
        PartialWaveResult p = partial_wave_check(f, r);
        EXPECT_LE(p.difference(), 1e-10 * std::max(1.0, std::abs(p.deviation)))
            << "n = " << n << " r = " << r;
        EXPECT_GT(p.deviation, 0.0);
      }
      EXPECT_THROW(partial_wave_check(f, 0.5), DomainError);
    }
  }
}

TEST(WittenFamily, ValidatesInputs) {
  ModelManifold m = test::capped_model(3, 1.0);
  EXPECT_THROW(make_witten_family(m, {}, {spinor({1.0, 0.0}), spinor({1.0, 0.0})}),
               NormalizationError);
  EXPECT_THROW(make_witten_family(m, {}, {spinor({2.0, 0.0}), spinor({0.0, 1.0})}),
               NormalizationError);
  EXPECT_THROW(make_witten_family(m, {}, {spinor({1.0, 0.0})}), ShapeError);
  EXPECT_THROW(make_witten_family(m, {Mode{0, 3, Vec(), spinor({1.0, 0.0})}}), DomainError);
  EXPECT_THROW(make_witten_family(m, {Mode{2, 1, Vec(), spinor({1.0, 0.0})}}), DomainError);
  EXPECT_THROW(make_witten_family(m, {Mode{0, 1, Vec(), spinor({1.0, 0.0, 0.0})}}), ShapeError);
  EXPECT_THROW(make_witten_family(m, {Mode{0, 2, Vec::Zero(2), spinor({1.0, 0.0})}}), ShapeError);
  WittenFamily f = make_witten_family(m, {Mode{0, 1, Vec(), spinor({1.0, 0.0})}});
  EXPECT_THROW(witten_spinor(f, 0, Vec::Zero(3)), PoleError);
  EXPECT_THROW(witten_spinor(f, 2, Vec::Ones(3)), DomainError);
  EXPECT_THROW(witten_spinor(f, 0, Vec::Ones(4)), ShapeError);
  InteriorSpec exact;
  exact.kind = InteriorSpec::Kind::Exact;
  WittenFamily e = make_witten_family(build_model_manifold(3, 1.0, exact));
  EXPECT_THROW(witten_spinor(e, 0, Vec::Zero(3)), DomainError);
}
