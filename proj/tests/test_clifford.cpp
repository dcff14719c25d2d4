#include <gtest/gtest.h>

#include <numbers>

#include "helpers.hpp"

using namespace wspin;
using wspin::test::max_abs;

TEST(CliffordRep, DimensionThreeHasRankTwoAndSphereArea) {
  CliffordRep rep = build_clifford_rep(3);
  EXPECT_EQ(rep.N, 2);
  EXPECT_EQ(rep.gammas.size(), 3u);
  EXPECT_NEAR(rep.omega, 4.0 * std::numbers::pi, 1e-14);
}

TEST(CliffordRep, DimensionFourHasRankFour) {
  EXPECT_EQ(build_clifford_rep(4).N, 4);
}

TEST(CliffordRep, RejectsLowDimension) {
  EXPECT_THROW(build_clifford_rep(2), DomainError);
  EXPECT_THROW(build_clifford_rep(0), DomainError);
}

TEST(CliffordRep, OffDiagonalAnticommutatorIsExactlyZero) {
  CliffordRep rep = build_clifford_rep(3);
  SpinorMatrix a = rep.gammas[0] * rep.gammas[1] + rep.gammas[1] * rep.gammas[0];
  EXPECT_EQ(max_abs(a), 0.0);
}

class CliffordRelations : public ::testing::TestWithParam<int> {};

TEST_P(CliffordRelations, AnticommuteAntiHermitianAndOmega) {
  const int n = GetParam();
  CliffordRep rep = build_clifford_rep(n);
  EXPECT_EQ(rep.N, 1 << (n / 2));
  for (int i = 0; i < n; ++i) {
    EXPECT_LE(max_abs(rep.gammas[i].adjoint() + rep.gammas[i]), 1e-14);
    for (int j = 0; j < n; ++j) {
      SpinorMatrix ac = rep.gammas[i] * rep.gammas[j] + rep.gammas[j] * rep.gammas[i];
      SpinorMatrix expect = (i == j ? -2.0 : 0.0) * rep.identity();
      EXPECT_LE(max_abs(ac - expect), 1e-14) << i << "," << j;
    }
  }
  EXPECT_NEAR(rep.omega, 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n), 1e-14);
}

TEST_P(CliffordRelations, ReproducibleBitForBit) {
  CliffordRep a = build_clifford_rep(GetParam()), b = build_clifford_rep(GetParam());
  for (std::size_t i = 0; i < a.gammas.size(); ++i) EXPECT_TRUE(a.gammas[i] == b.gammas[i]);
  EXPECT_EQ(a.omega, b.omega);
}

TEST_P(CliffordRelations, UnitVectorSquaresToMinusOne) {
  const int n = GetParam();
  CliffordRep rep = build_clifford_rep(n);
  std::mt19937_64 g(17 + n);
  for (int trial = 0; trial < 50; ++trial) {
    Vec v = wspin::test::random_vec(g, n);
    v.normalize();
    SpinorMatrix m = wspin::test::random_matrix(g, rep.N);
    EXPECT_LE(max_abs(clifford_mul(rep, v, clifford_mul(rep, v, m)) + m), 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(Dimensions, CliffordRelations, ::testing::Values(3, 4, 5, 6, 7, 8));

TEST(CliffordMul, ZeroVectorGivesZero) {
  CliffordRep rep = build_clifford_rep(3);
  EXPECT_EQ(max_abs(clifford_mul(rep, Vec::Zero(3), rep.identity())), 0.0);
}

TEST(CliffordMul, BasisVectorActsAsGenerator) {
  CliffordRep rep = build_clifford_rep(3);
  EXPECT_EQ(max_abs(clifford_mul(rep, Vec::Unit(3, 0), rep.identity()) - rep.gammas[0]), 0.0);
}

TEST(CliffordMul, VectorOneTwoTwoSquaresToMinusNine) {
  CliffordRep rep = build_clifford_rep(3);
  Vec v(3);
  v << 1, 2, 2;
  SpinorMatrix m = clifford_mul(rep, v, clifford_mul(rep, v, rep.identity()));
  EXPECT_LE(max_abs(m + 9.0 * rep.identity()), 1e-14);
}

TEST(CliffordMul, LinearInVectorAndMatrix) {
  CliffordRep rep = build_clifford_rep(5);
  std::mt19937_64 g(5);
  Vec v = wspin::test::random_vec(g, 5), w = wspin::test::random_vec(g, 5);
  SpinorMatrix a = wspin::test::random_matrix(g, rep.N), b = wspin::test::random_matrix(g, rep.N);
  EXPECT_LE(max_abs(clifford_mul(rep, 2.0 * v + w, a) -
                    2.0 * clifford_mul(rep, v, a) - clifford_mul(rep, w, a)), 1e-12);
  EXPECT_LE(max_abs(clifford_mul(rep, v, a + b) - clifford_mul(rep, v, a) - clifford_mul(rep, v, b)),
            1e-12);
}

TEST(CliffordMul, ShapeMismatchThrows) {
  CliffordRep rep = build_clifford_rep(3);
  EXPECT_THROW(clifford_mul(rep, Vec::Zero(4), rep.identity()), ShapeError);
  EXPECT_THROW(clifford_mul(rep, Vec::Zero(3), SpinorMatrix::Identity(3, 3)), ShapeError);
}

TEST(Trace, IdentityAndGenerators) {
  CliffordRep rep = build_clifford_rep(3);
  EXPECT_EQ(trace(rep.identity()), cplx(2.0, 0.0));
  for (auto& gm : rep.gammas) EXPECT_LE(std::abs(trace(gm)), 1e-15);
}

TEST(Trace, Cyclic) {
  std::mt19937_64 g(3);
  for (int N : {2, 4, 8}) {
    for (int trial = 0; trial < 20; ++trial) {
      SpinorMatrix a = wspin::test::random_matrix(g, N), b = wspin::test::random_matrix(g, N);
      EXPECT_LE(std::abs(trace(a * b) - trace(b * a)), 1e-12);
    }
  }
}

TEST(Trace, NonSquareThrows) {
  EXPECT_THROW(trace(SpinorMatrix::Zero(2, 3)), ShapeError);
}

TEST(Taylor, ElementaryJetsMatchDerivatives) {
  Taylor x = Taylor::variable(0.7, 4);
  Taylor e = exp(x), l = log(x), p = pow(x, 2.5), a = atan(x), t = tan(x);
  EXPECT_NEAR(e.derivative(3), std::exp(0.7), 1e-13);
  EXPECT_NEAR(l.derivative(2), -1.0 / (0.7 * 0.7), 1e-13);
  EXPECT_NEAR(p.derivative(2), 2.5 * 1.5 * std::pow(0.7, 0.5), 1e-13);
  EXPECT_NEAR(a.derivative(1), 1.0 / (1.0 + 0.49), 1e-14);
  double c = std::cos(0.7);
  EXPECT_NEAR(t.derivative(1), 1.0 / (c * c), 1e-13);
  EXPECT_THROW(x.derivative(5), DomainError);
}

TEST(Quadrature, GaussKronrodWithInfiniteRange) {
  QuadResult q = integrate([](double x) { return std::exp(-x); }, 0.0,
                           std::numeric_limits<double>::infinity(), {});
  EXPECT_NEAR(q.value, 1.0, 1e-13);
  Rule r = gauss_legendre(10, 0.0, 1.0);
  double s = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], 19);
  EXPECT_NEAR(s, 1.0 / 20.0, 1e-15);
}

TEST(Quadrature, SphereGridIntegratesPolynomials) {
  for (int n : {3, 4, 5}) {
    SphereGrid g = sphere_grid(n, 32, 8);
    double area = 0.0, second = 0.0;
    for (std::size_t i = 0; i < g.points.size(); ++i) {
      area += g.weights[i];
      second += g.weights[i] * g.points[i][0] * g.points[i][0];
    }
    EXPECT_NEAR(area, sphere_area(n), 1e-10);
    EXPECT_NEAR(second, sphere_area(n) / n, 1e-10);
  }
}
