#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "wspin/clifford.hpp"
#include "wspin/errors.hpp"
#include "wspin/greens_kernels.hpp"
#include "wspin/quadrature.hpp"
#include "wspin/radial_geometry.hpp"
#include "wspin/witten_model.hpp"

namespace wspin {

struct CompactifiedModel {
  ModelManifold model;
  Compactification comp;
  RadialProfile Omega;  // total factor relative to the round sphere, north chart
  double scale = 1.0;   // r -> scale * r applied to comp and Omega

  int n() const { return comp.n; }
  double sigma() const { return comp.sigma; }
  double R() const { return comp.R; }

  // Radii in the north chart where Omega is only finitely smooth.
  std::vector<double> knots() const {
    std::vector<double> k;
    for (double b : comp.knots()) k.push_back(b);
    for (double b : model.knots()) k.push_back(scale * b);
    k.push_back(scale * model.rho);
    std::sort(k.begin(), k.end());
    return k;
  }

  // Same geometry after x -> s x with sigma -> s sigma.
  CompactifiedModel rescaled(double s) const {
    if (!(s > 0.0)) throw DomainError("rescaled: factor must be positive");
    CompactifiedModel c = *this;
    c.scale = scale * s;
    c.comp.sigma *= s;
    c.comp.R *= s;
    c.comp.delta *= s;
    c.comp.r_star *= s;
    c.comp.r_left *= s;
    c.comp.r_right *= s;
    RadialProfile base = Omega;
    c.Omega = RadialProfile([base, s](const Taylor& r) { return base(r / s); }, base.domain(), {},
                            json{{"kind", "Omega"}, {"rescaled_by", s}});
    return c;
  }
};

inline CompactifiedModel make_compactified_model(const ModelManifold& model,
                                                 const Compactification& comp) {
  if (model.origin_excluded)
    throw DomainError("a model with the origin excluded cannot be compactified to a closed manifold");
  CompactifiedModel cm;
  cm.model = model;
  cm.comp = comp;
  const RadialProfile mu = comp.mu_conf;
  const double sigma = comp.sigma, R = comp.R;
  cm.Omega = RadialProfile(
      [mu, sigma, R](const Taylor& r) {
        if (r.value() >= R) return Taylor(1.0, r.order());
        return mu(r) / sphere_jet(sigma, r);
      },
      mu.domain(), comp.knots(), json{{"kind", "Omega"}});
  return cm;
}

inline CompactifiedModel make_compactified_model(const ModelManifold& model, double C_n = 3.0,
                                                 std::optional<double> mollifier_width = {}) {
  return make_compactified_model(model, build_compactification(model, C_n, mollifier_width));
}

struct QuadTolerances {
  double quadrature_rel = 1e-12;
  double identity_rel = 1e-6;
};

struct LhsResult {
  double lhs_K = 0.0;
  double lhs_end = 0.0;
  double lhs_K_closed = 0.0;  // N omega int_0^rho W r^{n-1} dr
  double error_K = 0.0;
  double error_end = 0.0;
};

inline LhsResult lhs_weighted_integral(const CompactifiedModel& cm, const WittenFamily& family,
                                       const QuadTolerances& tol = {}) {
  const int n = cm.n();
  const double rho = cm.model.rho;
  if (family.rep.n != n) throw ShapeError("lhs_weighted_integral: family dimension mismatch");
  if (!family.mode_free())
    throw DomainError("lhs_weighted_integral: partial waves are singular inside K");
  const RadialProfile W = cm.model.W;
  // Mode-free operators are isotropic, so a coarse grid integrates them exactly.
  SphereGrid grid = family.mode_free() ? sphere_grid(n, 16, 2) : default_sphere_grid(n);
  QuadOptions opt{tol.quadrature_rel, 15};
  std::vector<double> kb = cm.model.knots();
  LhsResult out;
  auto trace_integrand = [&](double r) {
    double w = W.eval(r);
    CompensatedSum acc;
    for (std::size_t a = 0; a < grid.points.size(); ++a)
      acc.add(grid.weights[a] * trace(spinor_operator(family, r * grid.points[a])).real());
    return std::pow(w, n) * std::pow(r, n - 1) * acc.value();
  };
  QuadResult k = integrate(trace_integrand, 0.0, rho, kb, opt);
  out.lhs_K = k.value;
  out.error_K = k.error;
  QuadResult kc = integrate(
      [&](double r) { return family.rep.N * family.rep.omega * W.eval(r) * std::pow(r, n - 1); }, 0.0,
      rho, kb, opt);
  out.lhs_K_closed = kc.value;

  const RadialProfile lam = cm.comp.lambda;
  auto end_integrand = [&](double r) {
    CompensatedSum acc;
    for (std::size_t a = 0; a < grid.points.size(); ++a)
      acc.add(grid.weights[a] * trace(deviation_operator(family, r * grid.points[a])).real());
    return std::pow(W.eval(r), n) * lam.eval(r) * std::pow(r, n - 1) * acc.value();
  };
  QuadResult e = integrate(end_integrand, rho, std::numeric_limits<double>::infinity(),
                           {cm.comp.r_left / cm.scale, cm.comp.r_star / cm.scale,
                            cm.comp.r_right / cm.scale, cm.comp.R / cm.scale},
                           opt);
  out.lhs_end = e.value;
  out.error_end = e.error;
  // x -> s x: the volume integrals pick up s^n.
  const double sn = std::pow(cm.scale, n);
  out.lhs_K *= sn;
  out.lhs_end *= sn;
  out.lhs_K_closed *= sn;
  out.error_K *= sn;
  out.error_end *= sn;
  return out;
}

inline QuadResult sphere_ball_integral(int n, double sigma, double R, double rel_tol = 1e-13) {
  double om = sphere_area(n);
  QuadResult q = integrate(
      [&](double r) { return om * sphere_factor(sigma, r) * std::pow(r, n - 1); }, 0.0, R, {sigma},
      QuadOptions{rel_tol, 15});
  return q;
}

struct AlphaResult {
  double alpha = 0.0;
  double sphere_part = 0.0;
  double end_part = 0.0;
  double error = 0.0;
};

// alpha over B_R, optionally with a larger outer radius.
inline AlphaResult alpha_integral(const CompactifiedModel& cm, std::optional<double> R_outer = {},
                                  const QuadTolerances& tol = {}) {
  const int n = cm.n();
  const double s = cm.scale;
  const double R = R_outer.value_or(cm.R()) / s;
  if (R * s < cm.R()) throw DomainError("alpha_integral: outer radius below the cap radius");
  const double om = sphere_area(n), rho = cm.model.rho, Rb = cm.R() / s;
  QuadResult a = sphere_ball_integral(n, cm.sigma() / s, R, tol.quadrature_rel);
  const RadialProfile lam = cm.comp.lambda;
  QuadResult b = integrate(
      [&](double r) {
        return om * schwarzschild_jet(n, Taylor(r, 0)).value() * lam.eval(r) * std::pow(r, n - 1);
      },
      rho, R, {cm.comp.r_left / s, cm.comp.r_star / s, cm.comp.r_right / s, Rb},
      QuadOptions{tol.quadrature_rel, 15});
  const double sn = std::pow(s, n);
  return {sn * (a.value - b.value), sn * a.value, sn * b.value, sn * (a.error + b.error)};
}

struct GammaResult {
  double cap_product_integral = 0.0;
  double h_delta_at_pole = 0.0;  // trace, N h_delta(0)
  double gamma_limit = 0.0;
  double error = 0.0;
};

// Trace integral of S~(n,x)S~(x,n) - S_d(n,x)S_d(x,n) for a radial Omega, in the south chart.
inline QuadResult cap_product_integral(const RadialProfile& Omega, int n, double sigma, double R,
                                    const std::vector<double>& north_knots = {},
                                    double rel_tol = 1e-12) {
  CliffordRep rep = build_clifford_rep(n);
  KernelClosedForms k = counter_terms(rep, sigma, R);
  const double Rp = k.R_prime, s2 = sigma * sigma, om = rep.omega;
  std::vector<double> br;
  for (double b : north_knots)
    if (b > 0.0 && b < R) br.push_back(s2 / b);
  auto f = [&](double rp) {
    double r = s2 / rp;
    double O = Omega.eval(r);
    return om * O * k.s_product_trace(rp) * std::pow(sphere_factor(sigma, rp), n) *
           std::pow(rp, n - 1);
  };
  return integrate(f, Rp, std::numeric_limits<double>::infinity(), br, QuadOptions{rel_tol, 15});
}

inline QuadResult cap_product_integral(const CompactifiedModel& cm, const QuadTolerances& tol = {}) {
  for (double r : {cm.R(), 1.5 * cm.R(), 4.0 * cm.R()})
    if (std::abs(cm.Omega.eval(r) - 1.0) > 1e-12)
      throw DomainError("cap_product_integral: Omega is not 1 on the cap");
  return cap_product_integral(cm.Omega, cm.n(), cm.sigma(), cm.R(), cm.knots(), tol.quadrature_rel);
}

inline GammaResult gamma_limit(const RadialProfile& Omega, int n, double sigma, double R,
                               const std::vector<double>& knots = {}, double rel_tol = 1e-12) {
  CliffordRep rep = build_clifford_rep(n);
  KernelClosedForms k = counter_terms(rep, sigma, R);
  QuadResult t = cap_product_integral(Omega, n, sigma, R, knots, rel_tol);
  QuadResult h = tau_integral(n, sigma, k.R_prime, std::numeric_limits<double>::infinity());
  GammaResult g;
  g.cap_product_integral = t.value;
  g.h_delta_at_pole = rep.N * k.prefactor(0.0) * h.value;
  g.gamma_limit = g.cap_product_integral - g.h_delta_at_pole;
  g.error = t.error + rep.N * k.prefactor(0.0) * h.error;
  return g;
}

inline GammaResult gamma_limit(const CompactifiedModel& cm, const QuadTolerances& tol = {}) {
  cap_product_integral(cm, tol);  // validates Omega on the cap
  return gamma_limit(cm.Omega, cm.n(), cm.sigma(), cm.R(), cm.knots(), tol.quadrature_rel);
}

inline double identity_prefactor(int n, double sigma) {
  double om = sphere_area(n);
  return om * om * std::pow(2.0 * sigma * sigma, n - 1);
}

struct IdentityReport {
  std::string label;
  int n = 0;
  double rho = 0.0;
  double sigma = 0.0;
  double lhs_K = 0.0;
  double lhs_end = 0.0;
  double lhs_K_closed = 0.0;
  double alpha = 0.0;
  double cap_product_integral = 0.0;
  double h_delta_at_pole = 0.0;
  double gamma_limit = 0.0;
  double prefactor = 0.0;
  double rhs = 0.0;
  double residual_abs = 0.0;
  double residual_rel = 0.0;
  double quadrature_error_estimate = 0.0;
  double error_lhs = 0.0;
  double error_alpha = 0.0;
  double error_gamma = 0.0;
  std::uint64_t seed = 0;
  QuadTolerances tolerances;
  bool passed = false;

  double lhs() const { return lhs_K + lhs_end; }

  json to_json() const {
    return {{"label", label},
            {"n", n},
            {"rho", rho},
            {"sigma", sigma},
            {"lhs", lhs()},
            {"lhs_K", lhs_K},
            {"lhs_end", lhs_end},
            {"lhs_K_closed_form", lhs_K_closed},
            {"alpha", alpha},
            {"cap_product_integral", cap_product_integral},
            {"h_delta_at_pole", h_delta_at_pole},
            {"gamma_limit", gamma_limit},
            {"prefactor", prefactor},
            {"rhs", rhs},
            {"residual_abs", residual_abs},
            {"residual_rel", residual_rel},
            {"quadrature_error_estimate", quadrature_error_estimate},
            {"error_estimates",
             {{"lhs", error_lhs}, {"alpha", error_alpha}, {"gamma_limit", error_gamma}}},
            {"seeds", {seed}},
            {"tolerances",
             {{"quadrature_rel", tolerances.quadrature_rel},
              {"identity_rel", tolerances.identity_rel}}},
            {"passed", passed}};
  }
};

inline IdentityReport verify_identity(const CompactifiedModel& cm, const WittenFamily& family,
                                      const QuadTolerances& tol = {}, std::uint64_t seed = 0) {
  if (!family.mode_free())
    throw DomainError("verify_identity: the identity concerns the mode-free Witten family");
  IdentityReport rep;
  rep.label = cm.model.label;
  rep.n = cm.n();
  rep.rho = cm.model.rho;
  rep.sigma = cm.sigma();
  rep.seed = seed;
  rep.tolerances = tol;
  LhsResult l = lhs_weighted_integral(cm, family, tol);
  rep.lhs_K = l.lhs_K;
  rep.lhs_end = l.lhs_end;
  rep.lhs_K_closed = l.lhs_K_closed;
  rep.error_lhs = l.error_K + l.error_end;
  AlphaResult a = alpha_integral(cm, {}, tol);
  rep.alpha = a.alpha;
  rep.error_alpha = a.error;
  GammaResult g = gamma_limit(cm, tol);
  rep.cap_product_integral = g.cap_product_integral;
  rep.h_delta_at_pole = g.h_delta_at_pole;
  rep.gamma_limit = g.gamma_limit;
  rep.error_gamma = g.error;
  rep.prefactor = identity_prefactor(rep.n, rep.sigma);
  const int N = family.rep.N;
  rep.rhs = rep.prefactor * rep.gamma_limit + N * rep.alpha;
  rep.residual_abs = std::abs(rep.lhs() - rep.rhs);
  rep.residual_rel = rep.residual_abs / std::abs(rep.lhs());
  rep.quadrature_error_estimate = rep.error_lhs + rep.prefactor * rep.error_gamma + N * rep.error_alpha;
  rep.passed = rep.residual_abs <=
               std::max(tol.identity_rel * std::abs(rep.lhs()), 10.0 * rep.quadrature_error_estimate);
  return rep;
}

struct BoundRatios {
  double ratio1 = 0.0;
  double ratio2 = 0.0;
  double inf_spec_sq = 0.0;
};

inline BoundRatios bound_report(const CompactifiedModel& cm, const IdentityReport& report,
                                double infspec) {
  if (!(infspec > 0.0)) throw DomainError("bound_report: spectrum bound must be positive");
  BoundRatios b;
  b.inf_spec_sq = infspec;
  const int n = cm.n();
  const double s = cm.sigma();
  b.ratio1 = report.lhs() * s * s * infspec / std::pow(cm.model.rho + 1.0, n);
  b.ratio2 = report.gamma_limit * std::pow(s, n) * infspec;
  return b;
}

inline BoundRatios bound_report(const CompactifiedModel& cm, const WittenFamily& family,
                                double infspec) {
  return bound_report(cm, verify_identity(cm, family), infspec);
}

inline std::string csv_header() {
  return "label,n,rho,sigma,lhs,rhs,residual_rel,ratio1,ratio2,inf_spec_sq";
}

inline std::string csv_row(const IdentityReport& r, const BoundRatios& b) {
  std::ostringstream os;
  os.precision(17);
  os << r.label << ',' << r.n << ',' << r.rho << ',' << r.sigma << ',' << r.lhs() << ',' << r.rhs
     << ',' << r.residual_rel << ',' << b.ratio1 << ',' << b.ratio2 << ',' << b.inf_spec_sq;
  return os.str();
}

}  // namespace wspin
