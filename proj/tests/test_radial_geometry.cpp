#include <gtest/gtest.h>

#include <numbers>

#include "helpers.hpp"

using namespace wspin;

namespace {

// Jets on either side of a knot extrapolated to the knot: value and slope mismatch.
std::pair<double, double> knot_mismatch(const RadialProfile& p, double k) {
  double h = 1e-5 * k;
  Taylor a = p.jet(k - h, 2), b = p.jet(k + h, 2);
  double va = a[0] + a[1] * h + a[2] * h * h, vb = b[0] - b[1] * h + b[2] * h * h;
  double da = a[1] + 2.0 * a[2] * h, db = b[1] - 2.0 * b[2] * h;
  return {std::abs(va - vb), std::abs(da - db)};
}

}  // namespace

TEST(SchwarzschildFactor, KnownValues) {
  EXPECT_NEAR(schwarzschild_factor(3, 1.0).value(), 4.0, 1e-15);
  EXPECT_NEAR(schwarzschild_factor(4, 1.0).value(), 2.0, 1e-15);
  EXPECT_NEAR(schwarzschild_factor(3, 1e12).value(), 1.0, 1e-11);
  // W_s^2 = (1 + 1/r)^4 with its derivatives, n = 3.
  Taylor w = schwarzschild_factor(3, 2.0);
  EXPECT_NEAR(w.derivative(1), -2.0 * 1.5 / 4.0, 1e-14);
  EXPECT_NEAR(w.derivative(2), 2.0 / 16.0 + 2.0 * 1.5 * 2.0 / 8.0, 1e-14);
}

TEST(SchwarzschildFactor, RejectsNonPositiveRadius) {
  EXPECT_THROW(schwarzschild_factor(3, 0.0), DomainError);
  EXPECT_THROW(schwarzschild_factor(3, -1.0), DomainError);
}

TEST(Compactification, ReferenceValues) {
  Compactification c = build_compactification(test::capped_model(3, 1.0), 3.0);
  EXPECT_DOUBLE_EQ(c.r_star, 4.0);
  EXPECT_NEAR(c.sigma, 4.0 / std::sqrt(0.28), 1e-12);
  EXPECT_NEAR(c.sigma, 7.5593, 1e-4);
  EXPECT_NEAR(c.R, c.sigma + 1.0, 1e-15);
  EXPECT_NEAR(c.delta, 10.938, 1e-3);
  EXPECT_NEAR(c.delta, 2.0 * c.sigma * std::atan(c.sigma / c.R), 1e-14);
  EXPECT_LE(c.rho, c.sigma);
  EXPECT_LE(c.sigma, c.R);
}

TEST(Compactification, LambdaIsOneOnTheInterior) {
  Compactification c = build_compactification(test::capped_model(3, 1.0), 3.0);
  for (int i = 0; i <= 100; ++i) EXPECT_EQ(c.lambda.eval(1.0 * i / 100.0), 1.0);
  EXPECT_EQ(c.lambda.eval(c.r_left), 1.0);
}

class CompactificationModels : public ::testing::TestWithParam<std::tuple<int, double, double>> {};

TEST_P(CompactificationModels, Invariants) {
  auto [n, rho, cap] = GetParam();
  ModelManifold m = test::capped_model(n, rho, cap);
  Compactification c = build_compactification(m, 3.0);
  EXPECT_LE(rho, c.sigma);
  EXPECT_LE(c.sigma, c.R);
  EXPECT_LT(c.derivative_jump, 0.0);
  EXPECT_GE(c.min_curvature, -1e-10);
  for (auto& [r, s] : curvature_grid(m, c)) EXPECT_GE(s, -1e-10) << "r = " << r;
  // Cap branch: lambda W_s is the round factor for r >= R.
  for (double r : {c.R, 1.3 * c.R, 5.0 * c.R, 100.0 * c.R}) {
    double ws = schwarzschild_factor(n, r).value();
    EXPECT_NEAR(c.lambda.eval(r) * ws, sphere_factor(c.sigma, r), 1e-12 * sphere_factor(c.sigma, r));
  }
  // Value and first derivative continuous across the window and R*.
  for (double k : {c.r_left, c.r_star, c.r_right}) {
    auto [dv, dd] = knot_mismatch(c.mu_conf, k);
    EXPECT_LE(dv, 1e-10) << k;
    EXPECT_LE(dd, 1e-6) << k;
    EXPECT_GT(c.mu_conf.eval(k), 0.0);
  }
  EXPECT_LE(c.lambda.eval(c.rho), 1.0);
}

INSTANTIATE_TEST_SUITE_P(Models, CompactificationModels,
                         ::testing::Values(std::make_tuple(3, 1.0, 1.0), std::make_tuple(3, 1.0, 0.5),
                                           std::make_tuple(3, 1.5, 0.75), std::make_tuple(3, 2.0, 1.0),
                                           std::make_tuple(4, 1.0, 1.0), std::make_tuple(4, 0.5, 1.0),
                                           std::make_tuple(5, 1.0, 1.0)));

TEST(Compactification, InfeasibleTransition) {
  // n = 3: the bracket vanishes for R* <= 1 + sqrt(2).
  EXPECT_THROW(build_compactification(test::capped_model(3, 0.5), 1.0),
               InfeasibleCompactificationError);
  EXPECT_THROW(compactification_sigma(3, 2.4), InfeasibleCompactificationError);
  EXPECT_NO_THROW(compactification_sigma(3, 2.5));
}

TEST(Compactification, SmallTransitionRadiusHasNoNegativeJump) {
  // For n = 3 and R* below about 3.85 the sphere branch meets W_s with the wrong slope.
  EXPECT_THROW(build_compactification(test::capped_model(3, 0.5), 3.0), MollifierFailureError);
}

TEST(Compactification, WidthIsConfigurable) {
  ModelManifold m = test::capped_model(3, 1.0);
  Compactification a = build_compactification(m, 3.0, 0.05);
  Compactification b = build_compactification(m, 3.0, 0.4);
  EXPECT_DOUBLE_EQ(a.mollifier_width, 0.05);
  EXPECT_LT(a.r_right - a.r_left, b.r_right - b.r_left + 1e-15);
  EXPECT_GE(a.min_curvature, -1e-10);
  EXPECT_THROW(build_compactification(m, 3.0, -1.0), DomainError);
  EXPECT_THROW(build_compactification(m, -3.0), DomainError);
}

TEST(Compactification, SerializesProfiles) {
  Compactification c = build_compactification(test::capped_model(3, 1.0), 3.0);
  json j = c.to_json();
  EXPECT_NEAR(j["sigma"].get<double>(), c.sigma, 0.0);
  EXPECT_TRUE(j.contains("mollifier_width"));
  EXPECT_EQ(j["lambda"]["knots"].size(), 3u);
}

TEST(ScalarCurvature, SchwarzschildIsScalarFlat) {
  RadialProfile ws = schwarzschild_profile(3);
  for (double r : {0.1, 0.5, 1.0, 3.0, 40.0}) EXPECT_NEAR(scalar_curvature_radial(ws, 3, r), 0.0, 1e-10);
  RadialProfile w4 = schwarzschild_profile(4);
  for (double r : {0.3, 1.0, 7.0}) EXPECT_NEAR(scalar_curvature_radial(w4, 4, r), 0.0, 1e-10);
}

TEST(ScalarCurvature, RoundSphere) {
  RadialProfile s = sphere_profile(1.0);
  EXPECT_NEAR(scalar_curvature_radial(s, 3, 0.7), 6.0, 1e-12);
  for (int n : {3, 4, 5})
    for (double sigma : {0.5, 2.0}) {
      RadialProfile p = sphere_profile(sigma);
      double ref = n * (n - 1) / (sigma * sigma);
      for (int i = 0; i <= 50; ++i) {
        double r = 0.2 * i * sigma;
        EXPECT_NEAR(scalar_curvature_radial(p, n, r), ref, 1e-8 * ref);
      }
    }
}

TEST(ScalarCurvature, OutsideDomainThrows) {
  EXPECT_THROW(scalar_curvature_radial(schwarzschild_profile(3), 3, 0.0), DomainError);
  EXPECT_THROW(scalar_curvature_radial(sphere_profile(1.0), 3, -1.0), DomainError);
}

TEST(ModelManifold, ExactInteriorExcludesOrigin) {
  InteriorSpec in;
  in.kind = InteriorSpec::Kind::Exact;
  ModelManifold m = build_model_manifold(3, 1.0, in);
  EXPECT_TRUE(m.origin_excluded);
  EXPECT_THROW(m.W.eval(0.0), DomainError);
  EXPECT_THROW(make_compactified_model(m), DomainError);
}

TEST(ModelManifold, CappedEndIsExactlySchwarzschild) {
  for (int n : {3, 4}) {
    for (double cap : {1.0, 0.5}) {
      ModelManifold m = test::capped_model(n, 1.0, cap);
      for (double r : {cap, 1.0, 1.5, 10.0, 1e3}) {
        double ws = schwarzschild_factor(n, r).value();
        EXPECT_NEAR(m.W.eval(r), ws, 1e-12 * ws);
      }
      for (int i = 0; i <= 300; ++i) {
        double r = 1.5 * i / 300.0;
        EXPECT_GE(scalar_curvature_radial(m.W, n, r), -1e-10);
      }
      EXPECT_GT(m.W.eval(0.0), 0.0);
    }
  }
  EXPECT_NEAR(test::capped_model(3, 1.0).W.eval(1.0), 4.0, 1e-14);
}

TEST(ModelManifold, CappedFactorIsSmoothAcrossTheCap) {
  ModelManifold m = test::capped_model(3, 1.0, 0.5);
  auto [dv, dd] = knot_mismatch(m.W, 0.5);
  EXPECT_LE(dv, 1e-10);
  EXPECT_LE(dd, 1e-6);
  // Non-increasing.
  for (int i = 1; i <= 100; ++i) EXPECT_LE(m.W.deriv1(0.01 * i), 1e-12);
}

TEST(ModelManifold, RejectsBadInteriors) {
  InteriorSpec in;
  in.cap_radius = 2.0;
  EXPECT_THROW(build_model_manifold(3, 1.0, in), InvalidInteriorError);
  InteriorSpec poly;
  poly.kind = InteriorSpec::Kind::Polynomial;
  poly.coefficients = {4.0, 0.0};
  EXPECT_THROW(build_model_manifold(3, 1.0, poly), GluingError);
  poly.coefficients = {};
  EXPECT_THROW(build_model_manifold(3, 1.0, poly), InvalidInteriorError);
  EXPECT_THROW(build_model_manifold(3, 0.0, InteriorSpec{}), DomainError);
  EXPECT_THROW(build_model_manifold(2, 1.0, InteriorSpec{}), DomainError);
}

TEST(ModelManifold, PolynomialInteriorGluedToThirdOrder) {
  // n = 4: W_s = 1 + r^{-2}; match value, slope and curvature at rho = 1 with a0 + a1 r^2 + a2 r^4.
  // W = 2, W' = -2, W'' = 6 at r = 1.
  double a2 = (6.0 + 2.0) / 8.0;  // W'' - W'/1 = 8 a2 at r = 1
  double a1 = (-2.0 - 4.0 * a2) / 2.0;
  double a0 = 2.0 - a1 - a2;
  InteriorSpec poly;
  poly.kind = InteriorSpec::Kind::Polynomial;
  poly.coefficients = {a0, a1, a2};
  try {
    ModelManifold m = build_model_manifold(4, 1.0, poly);
    EXPECT_NEAR(m.W.eval(1.0), 2.0, 1e-12);
  } catch (const InvalidInteriorError&) {
    SUCCEED() << "glued polynomial rejected by the curvature check";
  }
}

TEST(ChartFromSouth, ValuesAndInvolution) {
  EXPECT_DOUBLE_EQ(chart_from_south(1.0, 1.0), 1.0);
  Compactification c = build_compactification(test::capped_model(3, 1.0), 3.0);
  EXPECT_NEAR(chart_from_south(c.sigma, c.R), c.R_prime(), 1e-15);
  EXPECT_NEAR(c.R_prime(), 6.6761, 1e-4);
  std::mt19937_64 g(9);
  std::uniform_real_distribution<double> u(0.01, 100.0);
  for (int i = 0; i < 100; ++i) {
    double r = u(g), s = u(g);
    EXPECT_NEAR(chart_from_south(s, chart_from_south(s, r)), r, 1e-12 * r);
  }
  EXPECT_THROW(chart_from_south(1.0, 0.0), DomainError);
}

TEST(SphereBranch, ScaleCovariant) {
  for (double s : {0.5, 2.0, 3.0})
    for (double r : {0.1, 1.0, 5.0, 20.0})
      EXPECT_NEAR(sphere_jet(s * 7.0, Taylor(s * r, 0)).value(), sphere_jet(7.0, Taylor(r, 0)).value(),
                  1e-14);
}

TEST(MassScale, NormalizesToMassTwo) {
  EXPECT_DOUBLE_EQ(mass_length_scale(3, 2.0), 1.0);
  EXPECT_NEAR(mass_length_scale(3, 4.0), 2.0, 1e-15);
  EXPECT_NEAR(mass_length_scale(4, 8.0), 2.0, 1e-15);
  EXPECT_THROW(mass_length_scale(3, 0.0), DomainError);
}

TEST(SmoothRamp, LimitsAndSlope) {
  const double eps = 0.3;
  EXPECT_EQ(smooth_ramp(Taylor(-0.5, 1), eps).value(), 0.0);
  EXPECT_EQ(smooth_ramp(Taylor(0.5, 1), eps).value(), 0.5);
  // Continuous at the upper edge: the integral of the step over [-eps, eps] is eps.
  EXPECT_NEAR(smooth_ramp(Taylor(eps - 1e-12, 0), eps).value(), eps, 1e-11);
  // ramp(x) - ramp(-x) = x and ramp' = step.
  for (double x : {0.05, 0.1, 0.2})
    EXPECT_NEAR(smooth_ramp(Taylor(x, 0), eps).value() - smooth_ramp(Taylor(-x, 0), eps).value(), x, 1e-14);
  EXPECT_NEAR(smooth_ramp(Taylor::variable(0.0, 1), eps)[1], 0.5, 1e-14);
}
