#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "wspin/errors.hpp"
#include "wspin/greens_kernels.hpp"
#include "wspin/identity_engine.hpp"
#include "wspin/quadrature.hpp"
#include "wspin/radial_geometry.hpp"
#include "wspin/taylor.hpp"

namespace wspin {

struct SpectrumOptions {
  int per_sector = 4;       // smallest |mu| kept per angular sector
  double accuracy = 1e-3;   // relative Richardson estimate allowed for inf_spec_sq
  bool concurrent = true;
};

struct SectorEigenvalue {
  int k = 0;
  double mu = 0.0;  // positive branch; -mu is also an eigenvalue
};

struct SpectrumResult {
  std::vector<double> eigenvalues;  // signed, sorted
  std::vector<SectorEigenvalue> by_sector;
  double inf_spec_sq = 0.0;
  int mesh = 0;
  int levels = 2;
  double convergence_estimate = 0.0;  // |Richardson - finest| for inf_spec_sq

  double lowest() const { return std::sqrt(inf_spec_sq); }

  json to_json() const {
    json s = json::array();
    for (const auto& e : by_sector) s.push_back({{"k", e.k}, {"mu", e.mu}});
    return {{"eigenvalues", eigenvalues},
            {"sectors", s},
            {"inf_spec_sq", inf_spec_sq},
            {"mesh", {{"size", mesh}, {"levels", levels}}},
            {"convergence_estimate", convergence_estimate}};
  }
};

namespace detail {

// Smallest singular values of the weighted staggered sector operator on the unit sphere.
// f lives at theta_i = i h, g at (i - 1/2) h, h = pi/(N + 1/2), theta measured from the north pole.
inline std::vector<double> sector_values(const RadialProfile& Omega, double sigma, int n, int N,
                                         int k, int count) {
  const double h = std::numbers::pi / (N + 0.5);
  const double kappa = 0.5 * (n - 1) + k;
  auto T = [](double th) { return std::tan(0.5 * th); };
  auto weight = [&](double th) {
    double w = Omega.eval(sigma / T(th));
    if (!(w > 0.0)) throw DomainError("radial_dirac_spectrum: Omega must be positive");
    return w;
  };
  Eigen::VectorXd d(N), e(N), wf(N), wg(N + 1);
  for (int i = 1; i <= N; ++i) wf[i - 1] = weight(i * h);
  for (int j = 1; j <= N; ++j) wg[j - 1] = weight((j - 0.5) * h);
  for (int i = 1; i <= N; ++i) {
    double ti = T(i * h);
    d[i - 1] = std::pow(ti / T((i - 0.5) * h), kappa) / h / std::sqrt(wf[i - 1] * wg[i - 1]);
    e[i - 1] = i < N ? -std::pow(ti / T((i + 0.5) * h), kappa) / h / std::sqrt(wf[i - 1] * wg[i])
                     : 0.0;
  }
  // B B^T is tridiagonal.
  Eigen::VectorXd diag(N), sub(N - 1);
  for (int i = 0; i < N; ++i) diag[i] = d[i] * d[i] + e[i] * e[i];
  for (int i = 0; i + 1 < N; ++i) sub[i] = e[i] * d[i + 1];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  std::vector<double> mu;
  for (int i = 0; i < std::min(count, N); ++i)
    mu.push_back(std::sqrt(std::max(es.eigenvalues()[i], 0.0)) / sigma);
  return mu;
}

}  // namespace detail

// Dirac spectrum of Omega^2 g_round through D phi = mu Omega phi, sector by sector.
inline SpectrumResult radial_dirac_spectrum(const RadialProfile& Omega, double sigma, int n,
                                            int mesh = 256, int k_max = 2,
                                            const SpectrumOptions& opt = {}) {
  if (mesh < 64) throw DomainError("radial_dirac_spectrum: mesh must be at least 64");
  if (k_max < 2) throw DomainError("radial_dirac_spectrum: k_max must be at least 2");
  if (n < 3) throw DomainError("radial_dirac_spectrum: dimension must be at least 3");
  if (!(sigma > 0.0)) throw DomainError("radial_dirac_spectrum: sigma must be positive");

  auto solve = [&](int k) {
    std::vector<double> coarse = detail::sector_values(Omega, sigma, n, mesh, k, opt.per_sector);
    std::vector<double> fine = detail::sector_values(Omega, sigma, n, 2 * mesh, k, opt.per_sector);
    std::vector<double> out(coarse.size());
    for (std::size_t i = 0; i < coarse.size(); ++i)
      out[i] = fine[i] + (fine[i] - coarse[i]) / 3.0;
    return std::make_pair(out, fine);
  };

  std::vector<std::pair<std::vector<double>, std::vector<double>>> sectors(k_max + 1);
  if (opt.concurrent) {
    std::vector<std::future<std::pair<std::vector<double>, std::vector<double>>>> jobs;
    for (int k = 0; k <= k_max; ++k) jobs.push_back(std::async(std::launch::async, solve, k));
    for (int k = 0; k <= k_max; ++k) sectors[k] = jobs[k].get();
  } else {
    for (int k = 0; k <= k_max; ++k) sectors[k] = solve(k);
  }

  SpectrumResult res;
  res.mesh = mesh;
  double best = std::numeric_limits<double>::infinity(), best_fine = 0.0;
  for (int k = 0; k <= k_max; ++k) {
    const auto& [rich, fine] = sectors[k];
    for (std::size_t i = 0; i < rich.size(); ++i) {
      res.by_sector.push_back({k, rich[i]});
      res.eigenvalues.push_back(rich[i]);
      res.eigenvalues.push_back(-rich[i]);
      if (rich[i] < best) {
        best = rich[i];
        best_fine = fine[i];
      }
    }
  }
  std::sort(res.eigenvalues.begin(), res.eigenvalues.end());
  res.inf_spec_sq = best * best;
  res.convergence_estimate = std::abs(best * best - best_fine * best_fine);
  if (!(res.convergence_estimate <= opt.accuracy * res.inf_spec_sq))
    throw AccuracyError("radial_dirac_spectrum: Richardson estimate " +
                        std::to_string(res.convergence_estimate) + " exceeds tolerance");
  return res;
}

inline SpectrumResult radial_dirac_spectrum(const CompactifiedModel& cm, int mesh = 256,
                                            int k_max = 2, const SpectrumOptions& opt = {}) {
  return radial_dirac_spectrum(cm.Omega, cm.sigma(), cm.n(), mesh, k_max, opt);
}

// Radial bump spinor sin^kappa(theta) beta(theta / theta_d) in the round cap around the north pole.
struct CapBumpTrial {
  double support = 0.0;  // geodesic radius d; 0 selects 0.9 of the cap radius
  int k = 0;
};

inline double rayleigh_upper_bound(int n, double sigma, double cap_radius,
                                   const CapBumpTrial& trial) {
  if (!(sigma > 0.0)) throw DomainError("rayleigh_upper_bound: sigma must be positive");
  const double d = trial.support > 0.0 ? trial.support : 0.9 * cap_radius;
  if (!(d < cap_radius)) throw DomainError("rayleigh_upper_bound: trial support leaves the cap");
  if (d > std::numbers::pi * sigma)
    throw DomainError("rayleigh_upper_bound: support exceeds the sphere");
  const double td = d / sigma;
  const double kappa = 0.5 * (n - 1) + trial.k;
  auto parts = [&](double th) {
    Taylor b = bump(Taylor::variable(th / td, 1));
    double s = std::sin(th);
    double sk = std::pow(s, kappa);
    double g = sk * b.value();
    // (d/dtheta - kappa/sin) g
    double ag = kappa * std::pow(s, kappa - 1.0) * (std::cos(th) - 1.0) * b.value() +
                sk * b[1] / td;
    return std::make_pair(g, ag);
  };
  QuadOptions qo{1e-12, 15};
  QuadResult num = integrate([&](double t) { double a = parts(t).second; return a * a; }, 0.0, td,
                             {0.5 * td}, qo);
  QuadResult den = integrate([&](double t) { double g = parts(t).first; return g * g; }, 0.0, td,
                             {0.5 * td}, qo);
  return num.value / den.value / (sigma * sigma);
}

inline double rayleigh_upper_bound(const CompactifiedModel& cm, const CapBumpTrial& trial = {}) {
  return rayleigh_upper_bound(cm.n(), cm.sigma(), cm.comp.delta, trial);
}

struct HNormProfile {
  std::vector<double> norms;   // ||D~^l h||, l = 0..l_max
  double inner_radius = 0.0;   // south-chart annulus carrying d eta
  double outer_radius = 0.0;
  double support_leak = 0.0;   // max |h| off the annulus relative to max |h|
  double leibniz_mismatch = 0.0;

  json to_json() const {
    return {{"norms", norms},
            {"annulus", {inner_radius, outer_radius}},
            {"support_leak", support_leak},
            {"leibniz_mismatch", leibniz_mismatch}};
  }
};

namespace detail {

// Radial Dirac operator pieces on mu^2 delta with mu the round factor, south chart.
// scalar u -> coefficient of x_hat.
inline Taylor dirac_scalar(const Taylor& u, const Taylor& mu, const Taylor&, int n) {
  Taylor dU = (pow(mu, 0.5 * (n - 1)) * u).differentiate();
  return pow(mu, -0.5 * (n + 1)).with_order(dU.order()) * dU;
}

// u x_hat -> scalar.
inline Taylor dirac_vector(const Taylor& u, const Taylor& mu, const Taylor& r, int n) {
  Taylor U = pow(mu, 0.5 * (n - 1)) * u;
  Taylor dU = U.differentiate();
  int o = dU.order();
  return -1.0 * pow(mu, -0.5 * (n + 1)).with_order(o) *
         (dU + (n - 1) * U.with_order(o) / r.with_order(o));
}

}  // namespace detail

// h = D~^2(eta G) - eta D~^2 G on the round cap with G the sphere Green's function of D^2 at the pole.
inline HNormProfile h_norm_profile(const Compactification& comp, int l_max = 2,
                                   double leak_tol = 1e-12) {
  if (l_max < 0 || l_max > 2) throw DomainError("h_norm_profile: l_max must be in [0, 2]");
  const int n = comp.n;
  const double sigma = comp.sigma, delta = comp.delta, s2 = sigma * sigma;
  CliffordRep rep = build_clifford_rep(n);
  KernelClosedForms kc = counter_terms(rep, sigma, comp.R);
  const double om = rep.omega;

  auto eta = [&](const Taylor& x) { return bump(2.0 * sigma * atan(x / sigma) / delta); };
  auto green = [&](const Taylor& x) {
    double I0 = tau_integral(n, sigma, x.value(), std::numeric_limits<double>::infinity()).value;
    Taylor I = compose_integral(x, I0, [&](const Taylor& y) {
      return -1.0 * (2.0 * s2 / (s2 + y * y)) * pow(y, 1.0 - n);
    });
    return pow(2.0 * sphere_jet(sigma, x), 0.5 * (1 - n)) / om * I;
  };
  // Leibniz form: h = grad eta . S(., n) + D~(grad eta G), zero wherever d eta = 0.
  auto h_jet = [&](double rp, int ord) {
    Taylor x = Taylor::variable(rp, ord + 1);
    Taylor mu = sphere_jet(sigma, x);
    Taylor ep = eta(Taylor::variable(rp, ord + 2)).differentiate();
    Taylor s = -1.0 * pow(2.0 * mu, 0.5 * (1 - n)) * pow(x, 1.0 - n) / om;
    Taylor first = (-1.0 * ep / mu * s).with_order(ord);
    return first + detail::dirac_vector(ep / mu * green(x), mu, x, n);
  };
  // Direct form P[eta G] - eta P[G] with P = D~^2.
  auto h_direct = [&](double rp) {
    Taylor x = Taylor::variable(rp, 2);
    Taylor mu = sphere_jet(sigma, x);
    Taylor G = green(x);
    Taylor e = eta(x);
    auto P = [&](const Taylor& u) {
      return detail::dirac_vector(detail::dirac_scalar(u, mu, x, n), mu, x, n).value();
    };
    return P(e * G) - e.value() * P(G);
  };

  HNormProfile out;
  out.inner_radius = sigma * std::tan(delta / (4.0 * sigma));
  out.outer_radius = kc.R_prime;
  const double a = out.inner_radius, b = out.outer_radius;

  auto component = [&](double rp, int l) {
    Taylor h = h_jet(rp, l);
    Taylor x = Taylor::variable(rp, l);
    Taylor mu = sphere_jet(sigma, x);
    if (l == 0) return h.value();
    Taylor dh = detail::dirac_scalar(h, mu, x, n);
    if (l == 1) return dh.value();
    return detail::dirac_vector(dh, mu, x, n).value();
  };

  double hmax = 0.0, mism = 0.0;
  for (int i = 1; i < 200; ++i) {
    double rp = a + (b - a) * i / 200.0;
    double h1 = h_jet(rp, 0).value();
    hmax = std::max(hmax, std::abs(h1));
    mism = std::max(mism, std::abs(h1 - h_direct(rp)));
  }
  out.leibniz_mismatch = hmax > 0.0 ? mism / hmax : mism;
  double leak = 0.0;
  for (int i = 1; i <= 50; ++i) {
    leak = std::max(leak, std::abs(h_jet(a * i / 51.0, 0).value()));
    leak = std::max(leak, std::abs(h_jet(b * (1.0 + 2.0 * i / 50.0), 0).value()));
  }
  out.support_leak = hmax > 0.0 ? leak / hmax : leak;
  if (out.support_leak > leak_tol)
    throw CutoffError("h_norm_profile: h does not vanish off the cutoff annulus");

  for (int l = 0; l <= l_max; ++l) {
    QuadResult q = integrate(
        [&](double rp) {
          double c = component(rp, l);
          return rep.N * om * c * c * std::pow(sphere_factor(sigma, rp), n) * std::pow(rp, n - 1);
        },
        a, b, {}, QuadOptions{1e-10, 15});
    out.norms.push_back(std::sqrt(q.value));
  }
  return out;
}

}  // namespace wspin
