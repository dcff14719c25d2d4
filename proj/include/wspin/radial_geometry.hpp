#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wspin/errors.hpp"
#include "wspin/quadrature.hpp"
#include "wspin/taylor.hpp"

namespace wspin {

using json = nlohmann::json;

struct Interval {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  bool lo_open = false;

  bool contains(double r) const { return (lo_open ? r > lo : r >= lo) && r <= hi; }
};

// Radial function r -> f(r) evaluated through Taylor jets.
class RadialProfile {
 public:
  using Fn = std::function<Taylor(const Taylor&)>;

  RadialProfile() = default;
  RadialProfile(Fn fn, Interval domain, std::vector<double> knots = {}, json description = {})
      : fn_(std::make_shared<Fn>(std::move(fn))),
        domain_(domain),
        knots_(std::move(knots)),
        description_(std::move(description)) {}

  static RadialProfile constant(double c) {
    return RadialProfile([c](const Taylor& r) { return Taylor(c, r.order()); }, Interval{},
                         {}, json{{"kind", "constant"}, {"value", c}});
  }

  Taylor jet(double r, int order = 2) const {
    if (!domain_.contains(r))
      throw DomainError("RadialProfile: radius " + std::to_string(r) + " outside domain");
    return (*fn_)(Taylor::variable(r, order));
  }
  Taylor operator()(const Taylor& r) const {
    if (!domain_.contains(r.value()))
      throw DomainError("RadialProfile: radius " + std::to_string(r.value()) + " outside domain");
    return (*fn_)(r);
  }
  double eval(double r) const { return jet(r, 0).value(); }
  double deriv1(double r) const { return jet(r, 1).derivative(1); }
  double deriv2(double r) const { return jet(r, 2).derivative(2); }

  const Interval& domain() const { return domain_; }
  const std::vector<double>& knots() const { return knots_; }
  json to_json() const {
    json j = description_;
    j["knots"] = knots_;
    j["domain"] = {domain_.lo, std::isfinite(domain_.hi) ? json(domain_.hi) : json("inf")};
    return j;
  }

 private:
  std::shared_ptr<const Fn> fn_;
  Interval domain_;
  std::vector<double> knots_;
  json description_;
};

// C-infinity step: 0 for t <= 0, 1 for t >= 1.
inline Taylor smooth_step(const Taylor& t) {
  double t0 = t.value();
  if (t0 <= 0.0) return Taylor(0.0, t.order());
  if (t0 >= 1.0) return Taylor(1.0, t.order());
  double u0 = 1.0 / t0 - 1.0 / (1.0 - t0);
  if (u0 > 700.0) return Taylor(0.0, t.order());
  if (u0 < -700.0) return Taylor(1.0, t.order());
  Taylor u = 1.0 / t - 1.0 / (1.0 - t);
  return 1.0 / (1.0 + exp(u));
}

inline double smooth_step(double t) { return smooth_step(Taylor(t, 0)).value(); }

// Bump equal to 1 on [0, 1/2], 0 for t >= 1.
inline Taylor bump(const Taylor& t) { return 1.0 - smooth_step(2.0 * t - 1.0); }

// Smoothed positive part: 0 for x <= -eps, x for x >= eps, convex, with ramp' = step.
inline Taylor smooth_ramp(const Taylor& x, double eps) {
  double x0 = x.value();
  if (x0 <= -eps) return Taylor(0.0, x.order());
  if (x0 >= eps) return x;
  double t0 = (x0 + eps) / (2.0 * eps);
  static const Rule gl = gauss_legendre(64, 0.0, 1.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i)
    acc += gl.weights[i] * smooth_step(t0 * gl.nodes[i]);
  double v0 = 2.0 * eps * t0 * acc;
  return compose_integral(x, v0, [eps](const Taylor& y) {
    return smooth_step((y + eps) / (2.0 * eps));
  });
}

inline Taylor schwarzschild_jet(int n, const Taylor& r) {
  return pow(1.0 + pow(r, 2.0 - n), 2.0 / (n - 2));
}

// W_s(r) = (1 + r^{2-n})^{2/(n-2)} with two derivatives.
inline Taylor schwarzschild_factor(int n, double r) {
  if (n < 3) throw DomainError("schwarzschild_factor: dimension must be at least 3");
  if (!(r > 0.0)) throw DomainError("schwarzschild_factor: radius must be positive");
  return schwarzschild_jet(n, Taylor::variable(r, 2));
}

// Round-sphere factor 2 sigma^2 / (sigma^2 + r^2).
inline Taylor sphere_jet(double sigma, const Taylor& r) {
  double s2 = sigma * sigma;
  return 2.0 * s2 / (s2 + r * r);
}

inline RadialProfile sphere_profile(double sigma) {
  return RadialProfile([sigma](const Taylor& r) { return sphere_jet(sigma, r); }, Interval{}, {},
                       json{{"kind", "sphere"}, {"sigma", sigma}});
}

inline RadialProfile schwarzschild_profile(int n) {
  return RadialProfile([n](const Taylor& r) { return schwarzschild_jet(n, r); },
                       Interval{0.0, std::numeric_limits<double>::infinity(), true}, {},
                       json{{"kind", "schwarzschild"}, {"n", n}});
}

// Scalar curvature of mu^2 g_0 for a radial factor mu.
inline double scalar_curvature_radial(const RadialProfile& mu, int n, double r) {
  if (n < 3) throw DomainError("scalar_curvature_radial: dimension must be at least 3");
  if (!mu.domain().contains(r) || r < 0.0)
    throw DomainError("scalar_curvature_radial: radius outside domain");
  Taylor m = mu.jet(r, 2);
  Taylor h = pow(m, 0.5 * (n - 2));
  double h1 = h.derivative(1), h2 = h.derivative(2);
  double lap;
  if (r < 1e-12)
    lap = -n * h2;
  else
    lap = -(h2 + (n - 1) / r * h1);
  return 4.0 * (n - 1) / (n - 2) * std::pow(m.value(), -0.5 * (n + 2)) * lap;
}

inline double chart_from_south(double sigma, double r) {
  if (!(r > 0.0)) throw DomainError("chart_from_south: radius must be positive");
  return sigma * sigma / r;
}

// Length scale a with x = a x_hat mapping mass m to the normalized mass 2.
inline double mass_length_scale(int n, double m) {
  if (!(m > 0.0)) throw DomainError("mass_length_scale: mass must be positive");
  return std::pow(0.5 * m, 1.0 / (n - 2));
}

struct InteriorSpec {
  enum class Kind { Exact, Capped, Polynomial };
  Kind kind = Kind::Capped;
  double cap_radius = 0.0;           // capped: radius r0 <= rho, 0 selects rho
  std::vector<double> coefficients;  // polynomial: W = sum a_k r^{2k} on [0, rho]

  json to_json() const {
    switch (kind) {
      case Kind::Exact: return {{"kind", "exact"}};
      case Kind::Capped: return {{"kind", "capped"}, {"cap_radius", cap_radius}};
      default: return {{"kind", "polynomial"}, {"coefficients", coefficients}};
    }
  }
};

struct ModelManifold {
  int n = 3;
  double rho = 1.0;
  RadialProfile W;
  std::string label;
  InteriorSpec interior;
  bool origin_excluded = false;

  // Radii where W is only finitely smooth.
  std::vector<double> knots() const { return W.knots(); }
};

namespace detail {

// Superharmonic cap f(r) for r < r0 with f = 1 + r^{2-n} outside, matched to third order.
inline Taylor capped_f(int n, double r0, const Taylor& r) {
  if (r.value() >= r0) return 1.0 + pow(r, 2.0 - n);
  const double c = n * (n + 1.0) * (n + 2.0) * (n + 3.0) / 6.0;
  const double binom[4] = {1, 3, 3, 1};
  auto F = [&](const Taylor& t) {
    Taylor acc(0.0, t.order());
    Taylor tp = t * t;
    for (int k = 0; k < 4; ++k) {
      acc += ((k % 2 ? -1.0 : 1.0) * binom[k] / ((n + k) * (k + 2.0))) * tp;
      tp = tp * t;
    }
    return c * acc;
  };
  Taylor one = Taylor::constant(1.0, r.order());
  double scale = std::pow(r0, 2.0 - n);
  return 1.0 + scale - (2.0 - n) * scale * (F(one) - F(r / r0));
}

inline void check_interior_curvature(const ModelManifold& m) {
  const int grid = 1000;
  double lo = m.origin_excluded ? 1e-3 * m.rho : 0.0;
  double hi = 1.5 * m.rho;
  for (int i = 0; i <= grid; ++i) {
    double r = lo + (hi - lo) * i / grid;
    double s = scalar_curvature_radial(m.W, m.n, r);
    if (!(s >= -1e-10))
      throw InvalidInteriorError("interior scalar curvature " + std::to_string(s) +
                                 " below zero at r = " + std::to_string(r));
  }
}

}  // namespace detail

inline ModelManifold build_model_manifold(int n, double rho, const InteriorSpec& interior,
                                          std::string label = "model") {
  if (n < 3) throw DomainError("build_model_manifold: dimension must be at least 3");
  if (!(rho > 0.0)) throw DomainError("build_model_manifold: rho must be positive");
  ModelManifold m;
  m.n = n;
  m.rho = rho;
  m.label = std::move(label);
  m.interior = interior;
  const double inf = std::numeric_limits<double>::infinity();
  switch (interior.kind) {
    case InteriorSpec::Kind::Exact:
      m.origin_excluded = true;
      m.W = schwarzschild_profile(n);
      break;
    case InteriorSpec::Kind::Capped: {
      double r0 = interior.cap_radius > 0.0 ? interior.cap_radius : rho;
      if (r0 > rho * (1.0 + 1e-15))
        throw InvalidInteriorError("cap radius exceeds rho");
      m.interior.cap_radius = r0;
      m.W = RadialProfile(
          [n, r0](const Taylor& r) { return pow(detail::capped_f(n, r0, r), 2.0 / (n - 2)); },
          Interval{0.0, inf, false}, {r0}, json{{"kind", "capped"}, {"n", n}, {"cap_radius", r0}});
      break;
    }
    case InteriorSpec::Kind::Polynomial: {
      auto a = interior.coefficients;
      if (a.empty()) throw InvalidInteriorError("polynomial interior needs coefficients");
      auto poly = [a](const Taylor& r) {
        Taylor r2 = r * r, p(0.0, r.order()), rk(1.0, r.order());
        for (double ak : a) {
          p += ak * rk;
          rk = rk * r2;
        }
        return p;
      };
      Taylor in = poly(Taylor::variable(rho, 2));
      Taylor out = schwarzschild_jet(n, Taylor::variable(rho, 2));
      for (int k = 0; k <= 2; ++k) {
        double d = std::abs(in.derivative(k) - out.derivative(k));
        if (d > 1e-10 * std::max(1.0, std::abs(out.derivative(k))))
          throw GluingError("polynomial interior does not match the Schwarzschild end in derivative " +
                            std::to_string(k) + " at rho (mismatch " + std::to_string(d) + ")");
      }
      m.W = RadialProfile(
          [n, rho, poly](const Taylor& r) {
            return r.value() < rho ? poly(r) : schwarzschild_jet(n, r);
          },
          Interval{0.0, inf, false}, {rho},
          json{{"kind", "polynomial"}, {"n", n}, {"coefficients", a}});
      break;
    }
  }
  if (interior.kind != InteriorSpec::Kind::Exact) {
    for (int i = 0; i <= 200; ++i) {
      double r = rho * i / 200.0;
      if (!(m.W.eval(r) > 0.0)) throw InvalidInteriorError("interior factor is not positive");
    }
  }
  detail::check_interior_curvature(m);
  return m;
}

struct Compactification {
  int n = 3;
  double rho = 1.0;
  double C_n = 3.0;
  double sigma = 0.0;
  double r_star = 0.0;
  double R = 0.0;
  double delta = 0.0;
  double mollifier_width = 0.0;  // requested half-width in r
  double ramp_level = 0.0;       // level eps of the smoothed minimum
  double r_left = 0.0;           // mu_conf = W for r <= r_left
  double r_right = 0.0;          // mu_conf = sphere factor for r >= r_right
  double derivative_jump = 0.0;  // unmollified mu' jump at R*
  RadialProfile lambda;
  RadialProfile mu_conf;
  double min_curvature = 0.0;

  double R_prime() const { return sigma * sigma / R; }
  std::vector<double> knots() const { return {r_left, r_star, r_right}; }

  json to_json() const {
    return {{"n", n},
            {"rho", rho},
            {"C_n", C_n},
            {"sigma", sigma},
            {"r_star", r_star},
            {"R", R},
            {"R_prime", R_prime()},
            {"delta", delta},
            {"mollifier_width", mollifier_width},
            {"ramp_level", ramp_level},
            {"window", {r_left, r_right}},
            {"derivative_jump", derivative_jump},
            {"min_scalar_curvature", min_curvature},
            {"curvature_tolerance", 1e-10},
            {"lambda", lambda.to_json()},
            {"mu_conf", mu_conf.to_json()}};
  }
};

namespace detail {

template <class F>
double bisect(F&& f, double a, double b) {
  double fa = f(a);
  for (int i = 0; i < 200 && b - a > 4 * std::numeric_limits<double>::epsilon() * std::abs(b); ++i) {
    double m = 0.5 * (a + b);
    double fm = f(m);
    if ((fm > 0) == (fa > 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

inline double compactification_sigma(int n, double r_star) {
  double ws = std::pow(1.0 + std::pow(r_star, 2.0 - n), 2.0 / (n - 2));
  double bracket = 2.0 / ws - 1.0;
  if (!(bracket > 0.0))
    throw InfeasibleCompactificationError("transition radius too small: bracket " +
                                          std::to_string(bracket) + " is not positive");
  return r_star / std::sqrt(bracket);
}

// Scalar curvature grid for the compactified factor.
inline std::vector<std::pair<double, double>> curvature_grid(const ModelManifold& model,
                                                             const Compactification& c,
                                                             int points = 1000) {
  std::vector<std::pair<double, double>> g;
  double lo = model.origin_excluded ? 1e-3 * model.rho : 0.0;
  double hi = 3.0 * c.R;
  for (int i = 0; i < points; ++i) {
    double r = lo + (hi - lo) * i / (points - 1);
    g.emplace_back(r, scalar_curvature_radial(c.mu_conf, c.n, r));
  }
  // Dense sampling of the smoothing window.
  for (int i = 0; i <= 200; ++i) {
    double r = c.r_left + (c.r_right - c.r_left) * i / 200.0;
    g.emplace_back(r, scalar_curvature_radial(c.mu_conf, c.n, r));
  }
  std::sort(g.begin(), g.end());
  return g;
}

inline Compactification build_compactification(const ModelManifold& model, double C_n = 3.0,
                                               std::optional<double> mollifier_width = {}) {
  if (!(C_n > 0.0)) throw DomainError("build_compactification: C_n must be positive");
  const int n = model.n;
  Compactification c;
  c.n = n;
  c.rho = model.rho;
  c.C_n = C_n;
  c.r_star = model.rho + C_n;
  c.sigma = compactification_sigma(n, c.r_star);
  c.R = c.sigma + 1.0;
  c.delta = 2.0 * c.sigma * std::atan(c.sigma / c.R);
  c.mollifier_width = mollifier_width.value_or(0.1 * c.r_star);
  if (!(c.mollifier_width > 0.0)) throw DomainError("mollifier width must be positive");
  const double sigma = c.sigma, q = 0.5 * (n - 2);

  // Smoothed minimum on h = mu^{(n-2)/2}: h_in is harmonic, h_out superharmonic.
  auto h_in = [n](const Taylor& r) { return 1.0 + pow(r, 2.0 - n); };
  auto h_out = [sigma, q](const Taylor& r) { return pow(sphere_jet(sigma, r), q); };
  auto D = [&](double r) {
    Taylor t(r, 0);
    return (h_in(t) - h_out(t)).value();
  };
  Taylor js = Taylor::variable(c.r_star, 1);
  double dD = (h_in(js) - h_out(js)).derivative(1);
  {
    Taylor w = schwarzschild_jet(n, js), s = sphere_jet(sigma, js);
    c.derivative_jump = s.derivative(1) - w.derivative(1);
  }
  if (!(dD > 0.0))
    throw MollifierFailureError(
        "derivative jump at the transition radius is not negative; increase C_n");

  // Left of R*, D dips below zero before the branches cross again.
  const int scan = 4000;
  double dmin = 0.0, rmin = c.r_star;
  for (int i = 1; i <= scan; ++i) {
    double r = c.r_star - (c.r_star - model.rho) * i / scan;
    double d = D(r);
    if (d < dmin) {
      dmin = d;
      rmin = r;
    }
    if (d > 0.0) break;
  }
  double eps = std::min(dD * c.mollifier_width, 0.5 * std::abs(dmin));
  if (!(eps > 0.0)) throw MollifierFailureError("smoothing window is empty");
  c.ramp_level = eps;
  c.r_left = detail::bisect([&](double r) { return D(r) + eps; }, rmin, c.r_star);
  double hi = c.r_star;
  while (D(hi) < eps) {
    hi += 0.01 * c.mollifier_width;
    if (hi > c.R) throw MollifierFailureError("smoothing window reaches the cap radius");
  }
  c.r_right = detail::bisect([&](double r) { return D(r) - eps; }, c.r_star, hi);
  if (!(c.r_left > model.rho))
    throw MollifierFailureError("smoothing window reaches the interior region");

  const RadialProfile W = model.W;
  const double rl = c.r_left, rr = c.r_right;
  auto lam = [n, sigma, q, rl, rr, eps, h_in, h_out](const Taylor& r) {
    double r0 = r.value();
    if (r0 <= rl) return Taylor(1.0, r.order());
    Taylor ws = schwarzschild_jet(n, r);
    if (r0 >= rr) return sphere_jet(sigma, r) / ws;
    Taylor hin = h_in(r);
    Taylor h = hin - smooth_ramp(hin - h_out(r), eps);
    return pow(h, 1.0 / q) / ws;
  };
  const double inf = std::numeric_limits<double>::infinity();
  Interval dom = model.W.domain();
  json moll = {{"kind", "smoothed_min"}, {"ramp_level", eps}, {"width", c.mollifier_width}};
  c.lambda = RadialProfile(lam, Interval{dom.lo, inf, dom.lo_open}, {rl, c.r_star, rr},
                           json{{"kind", "lambda"}, {"mollifier", moll}});
  c.mu_conf = RadialProfile(
      [W, lam, rl](const Taylor& r) {
        if (r.value() <= rl) return W(r);
        return lam(r) * W(r);
      },
      Interval{dom.lo, inf, dom.lo_open}, {rl, c.r_star, rr},
      json{{"kind", "mu_conf"}, {"mollifier", moll}});

  if (!(model.rho <= c.sigma && c.sigma <= c.R))
    throw InfeasibleCompactificationError("scaling bounds rho <= sigma <= R violated");

  double smin = inf;
  for (auto& [r, s] : curvature_grid(model, c)) smin = std::min(smin, s);
  c.min_curvature = smin;
  if (!(smin >= -1e-10))
    throw MollifierFailureError("scalar curvature " + std::to_string(smin) +
                                " negative after smoothing");
  return c;
}

}  // namespace wspin
