#pragma once

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <boost/math/special_functions/erf.hpp>
#include <boost/random/sobol.hpp>

#include "wspin/clifford.hpp"
#include "wspin/errors.hpp"
#include "wspin/quadrature.hpp"

namespace wspin {

inline constexpr double kPoleGuard = 1e-8;

// S(x, y) = -(1/omega) (x - y) . / |x - y|^n
inline SpinorMatrix euclidean_green(const CliffordRep& rep, const Vec& x, const Vec& y) {
  if (x.size() != rep.n || y.size() != rep.n) throw ShapeError("euclidean_green: point dimension");
  Vec d = x - y;
  double r = d.norm();
  if (r < kPoleGuard) throw PoleError("euclidean_green: points coincide");
  return (-1.0 / (rep.omega * std::pow(r, rep.n))) * clifford_vector(rep, d);
}

inline SpinorMatrix conformal_transform_kernel(const SpinorMatrix& kernel, double lambda_x,
                                               double lambda_y, int n) {
  if (!(lambda_x > 0.0) || !(lambda_y > 0.0))
    throw DomainError("conformal_transform_kernel: conformal factors must be positive");
  return std::pow(lambda_x * lambda_y, 0.5 * (1 - n)) * kernel;
}

inline double sphere_factor(double sigma, double r) {
  double s2 = sigma * sigma;
  return 2.0 * s2 / (s2 + r * r);
}

// Dirac Green's function of the round sphere of radius sigma in a stereographic chart.
inline SpinorMatrix sphere_green_dirac(const CliffordRep& rep, double sigma, const Vec& x,
                                       const Vec& y) {
  return conformal_transform_kernel(euclidean_green(rep, x, y), sphere_factor(sigma, x.norm()),
                                    sphere_factor(sigma, y.norm()), rep.n);
}

// Radial integral of 2 sigma^2/(sigma^2+tau^2) tau^{1-n} over [a, b], b may be +inf.
inline QuadResult tau_integral(int n, double sigma, double a, double b) {
  if (!(a > 0.0)) throw PoleError("tau_integral: lower limit must be positive");
  if (a == b) return {};
  double lo = std::min(a, b), hi = std::max(a, b);
  std::vector<double> breaks{sigma};
  for (double t = 10.0 * lo; t < std::min(hi, 1e3 * sigma); t *= 10.0) breaks.push_back(t);
  double s2 = sigma * sigma;
  auto f = [=](double t) { return 2.0 * s2 / (s2 + t * t) * std::pow(t, 1.0 - n); };
  QuadResult q = integrate(f, lo, hi, breaks, QuadOptions{1e-13, 15});
  if (b < a) q.value = -q.value;
  return q;
}

// n = 3 antiderivative of the tau integrand.
inline double tau_antiderivative_n3(double sigma, double tau) {
  return 2.0 * (-1.0 / tau - std::atan(tau / sigma) / sigma);
}

struct SignedValue {
  double value = 0.0;
  bool outside_cap = false;
};

struct KernelClosedForms {
  int n = 3;
  int N = 2;
  double omega = 0.0;
  double sigma = 1.0;
  double R_prime = 1.0;

  // Prefactor (1/omega) (4 sigma^2/(sigma^2 + r'^2))^{(1-n)/2}.
  double prefactor(double rp) const {
    return std::pow(2.0 * sphere_factor(sigma, rp), 0.5 * (1 - n)) / omega;
  }

  double s_product_trace(double rp) const {
    check(rp);
    return N * std::pow(2.0 * rp * rp * sphere_factor(sigma, rp), 1 - n) / (omega * omega);
  }

  SignedValue g_delta_signed(double rp) const {
    check(rp);
    return {prefactor(rp) * tau_integral(n, sigma, rp, R_prime).value, rp > R_prime};
  }
  double g_delta(double rp) const { return g_delta_signed(rp).value; }

  double h_delta(double rp) const {
    check(rp);
    return prefactor(rp) * tau_integral(n, sigma, R_prime, INFINITY).value;
  }
  // Limit r' -> 0 of h_delta.
  double h_delta_at_pole() const {
    return prefactor(0.0) * tau_integral(n, sigma, R_prime, INFINITY).value;
  }

  double g_sphere_sq(double rp) const {
    check(rp);
    return prefactor(rp) * tau_integral(n, sigma, rp, INFINITY).value;
  }

 private:
  static void check(double rp) {
    if (!(rp > 0.0)) throw PoleError("counter term evaluated at the pole");
  }
};

inline KernelClosedForms counter_terms(const CliffordRep& rep, double sigma, double R) {
  if (!(R > 0.0) || !(sigma > 0.0)) throw DomainError("counter_terms: sigma and R must be positive");
  KernelClosedForms k;
  k.n = rep.n;
  k.N = rep.N;
  k.omega = rep.omega;
  k.sigma = sigma;
  k.R_prime = sigma * sigma / R;
  return k;
}

// Direct kernel product S(n, x) S(x, n) in the south chart with the pole at the origin.
inline SpinorMatrix south_kernel_product(const CliffordRep& rep, double sigma, const Vec& x) {
  Vec o = Vec::Zero(rep.n);
  return sphere_green_dirac(rep, sigma, o, x) * sphere_green_dirac(rep, sigma, x, o);
}

enum class OracleMethod { MonteCarlo, AxisymmetricProduct };

struct OracleResult {
  SpinorMatrix value;
  double scalar = 0.0;        // value = scalar * I + bivector part
  double scalar_error = 0.0;  // one standard error or quadrature estimate
  double bivector_norm = 0.0;
  double bivector_error = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

struct OracleOptions {
  OracleMethod method = OracleMethod::MonteCarlo;
  std::uint64_t samples = 10'000'000;
  std::uint64_t seed = 0;
  double tolerance = 1e-3;  // relative
};

namespace detail {

inline SpinorMatrix bivector_matrix(const CliffordRep& rep, const Eigen::MatrixXd& B) {
  SpinorMatrix m = SpinorMatrix::Zero(rep.N, rep.N);
  for (int i = 0; i < rep.n; ++i)
    for (int j = i + 1; j < rep.n; ++j) m += B(i, j) * rep.gammas[i] * rep.gammas[j];
  return m;
}

// Randomized quasi-Monte Carlo: Sobol points under independent random shifts, each point mapped
// through both mixture components (balance heuristic).
inline OracleResult g_delta_monte_carlo(const CliffordRep& rep, double sigma, double Rp,
                                        const Vec& y, const OracleOptions& opt) {
  const int n = rep.n;
  const double b = y.norm();
  const double om = rep.omega;
  const double C = std::pow(sphere_factor(sigma, 0.0) * sphere_factor(sigma, b), 0.5 * (1 - n)) /
                   (om * om);
  const double Ry = Rp + b;
  const int shifts = 16;
  const std::uint64_t per_shift = std::max<std::uint64_t>(opt.samples / (2 * shifts), 1);
  const int nb = n * (n - 1) / 2;
  std::vector<std::vector<double>> est(shifts, std::vector<double>(1 + nb, 0.0));
  auto normal = [](double u) {
    u = std::clamp(u, 1e-300, 1.0 - 1e-16);
    return std::sqrt(2.0) * boost::math::erf_inv(2.0 * u - 1.0);
  };
  for (int s = 0; s < shifts; ++s) {
    std::seed_seq seq{static_cast<std::uint32_t>(opt.seed),
                      static_cast<std::uint32_t>(opt.seed >> 32), static_cast<std::uint32_t>(s),
                      0x5eedu};
    std::mt19937_64 gen(seq);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<double> shift(n + 1);
    for (auto& v : shift) v = U(gen);
    boost::random::sobol qrng(n + 1);
    std::vector<double> acc(1 + nb, 0.0);
    std::vector<double> pt(n + 1);
    Vec x(n), u(n), d(n);
    for (std::uint64_t k = 0; k < per_shift; ++k) {
      for (int i = 0; i <= n; ++i) {
        double v = static_cast<double>(qrng() >> 11) * 0x1.0p-53 + shift[i];
        pt[i] = v - std::floor(v);
      }
      for (int i = 0; i < n; ++i) u[i] = normal(pt[i + 1]);
      u /= u.norm();
      for (int branch = 0; branch < 2; ++branch) {
        x = branch == 0 ? Vec((Rp * pt[0]) * u) : Vec(y + (Ry * pt[0]) * u);
        double r = x.norm();
        if (r >= Rp) continue;
        d = x - y;
        double t = d.norm();
        if (r < kPoleGuard || t < kPoleGuard) continue;
        double p = 0.5 / (om * Rp * std::pow(r, n - 1)) + 0.5 / (om * Ry * std::pow(t, n - 1));
        double w = 0.5 * C * sphere_factor(sigma, r) / (std::pow(r, n) * std::pow(t, n) * p);
        acc[0] += w * x.dot(d);
        int idx = 1;
        for (int i = 0; i < n; ++i)
          for (int j = i + 1; j < n; ++j, ++idx) acc[idx] += -w * (x[i] * d[j] - x[j] * d[i]);
      }
    }
    for (int i = 0; i <= nb; ++i) est[s][i] = acc[i] / per_shift;
  }
  OracleResult res;
  res.samples = 2 * per_shift * shifts;
  res.seed = opt.seed;
  std::vector<double> mean(1 + nb, 0.0), se(1 + nb, 0.0);
  for (int i = 0; i <= nb; ++i) {
    for (int s = 0; s < shifts; ++s) mean[i] += est[s][i] / shifts;
    double var = 0.0;
    for (int s = 0; s < shifts; ++s) var += (est[s][i] - mean[i]) * (est[s][i] - mean[i]);
    se[i] = std::sqrt(var / (shifts - 1) / shifts);
  }
  res.scalar = mean[0];
  res.scalar_error = se[0];
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
  int idx = 1;
  double bn = 0.0, be = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j, ++idx) {
      B(i, j) = mean[idx];
      bn += mean[idx] * mean[idx];
      be += se[idx] * se[idx];
    }
  res.bivector_norm = std::sqrt(bn);
  res.bivector_error = std::sqrt(be);
  res.value = res.scalar * rep.identity() + bivector_matrix(rep, B);
  return res;
}

inline OracleResult g_delta_axisymmetric(const CliffordRep& rep, double sigma, double Rp,
                                         const Vec& y, double tol) {
  const int n = rep.n;
  const double b = y.norm();
  const double om = rep.omega;
  const double C = std::pow(sphere_factor(sigma, 0.0) * sphere_factor(sigma, b), 0.5 * (1 - n)) /
                   (om * om);
  // Area of S^{n-2}, the orbit of the polar angle.
  const double orbit = sphere_area(n - 1);
  const double qtol = std::max(tol * 1e-2, 1e-15);
  QuadOptions inner_opt{qtol, 15};
  double inner_err_max = 0.0;
  auto outer = [&](double r) {
    if (r <= 0.0) return 0.0;
    auto inner = [&](double th) {
      double h = std::sin(0.5 * th), s = std::sin(th);
      double half = 2.0 * r * b * h * h;  // r b (1 - cos)
      double dist2 = (r - b) * (r - b) + 2.0 * half;
      if (dist2 <= 0.0) return 0.0;
      return std::pow(s, n - 2) * (r * (r - b) + half) / std::pow(dist2, 0.5 * n);
    };
    std::vector<double> br;
    double tc = std::abs(r - b) / std::max(b, 1e-300);
    for (double t = tc; t < std::numbers::pi && t > 0.0; t *= 4.0) br.push_back(t);
    QuadResult q = integrate(inner, 0.0, std::numbers::pi, br, inner_opt);
    double weight = C * orbit * sphere_factor(sigma, r) / r;
    inner_err_max = std::max(inner_err_max, weight * q.error);
    return weight * q.value;
  };
  QuadResult q_out = integrate(outer, b, Rp, {}, QuadOptions{qtol, 15});
  QuadOptions in_opt{qtol, 20, qtol * std::abs(q_out.value)};
  QuadResult q_in = integrate(outer, 0.0, b, {}, in_opt);
  OracleResult res;
  res.scalar = q_in.value + q_out.value;
  res.scalar_error = q_in.error + q_out.error + Rp * inner_err_max;
  res.value = res.scalar * rep.identity();
  return res;
}

}  // namespace detail

// Direct cap integral of S_delta(n, x) S_delta(x, y) in the south chart.
inline OracleResult brute_force_g_delta(const CliffordRep& rep, double sigma, double R,
                                        const Vec& y, const OracleOptions& opt = {}) {
  const double Rp = sigma * sigma / R;
  if (y.size() != rep.n) throw ShapeError("brute_force_g_delta: point dimension");
  double b = y.norm();
  if (!(b > 0.0)) throw PoleError("brute_force_g_delta: y at the pole");
  if (!(b < Rp)) throw DomainError("brute_force_g_delta: y outside the open cap");
  OracleResult res;
  double achieved;
  if (opt.method == OracleMethod::MonteCarlo) {
    res = detail::g_delta_monte_carlo(rep, sigma, Rp, y, opt);
    achieved = res.scalar_error / std::abs(res.scalar);
  } else {
    res = detail::g_delta_axisymmetric(rep, sigma, Rp, y, opt.tolerance);
    achieved = res.scalar_error / std::abs(res.scalar);
  }
  if (!(achieved <= opt.tolerance))
    throw ToleranceError("brute_force_g_delta: tolerance not met", achieved);
  return res;
}

// Smooth rapidly decaying test field exp(-|x - c|^2 / (2 s^2)) psi0.
struct GaussianSpinor {
  const CliffordRep* rep = nullptr;
  Vec center;
  double width = 1.0;
  Spinor psi0;

  Spinor value(const Vec& x) const {
    return std::exp(-(x - center).squaredNorm() / (2.0 * width * width)) * psi0;
  }
  Spinor dirac(const Vec& x) const {
    Vec d = x - center;
    double e = std::exp(-d.squaredNorm() / (2.0 * width * width));
    return (-e / (width * width)) * (clifford_vector(*rep, d) * psi0);
  }
  // Radius beyond which the field is below double precision relative to its peak.
  double support_radius() const { return 9.0 * width; }
};

struct ZeroSpinor {
  int N = 2;
  Spinor value(const Vec&) const { return Spinor::Zero(N); }
  Spinor dirac(const Vec&) const { return Spinor::Zero(N); }
  double support_radius() const { return 1.0; }
};

struct CalibrationOptions {
  int polar_nodes = 24;
  int azimuth_nodes = 32;
  int panels = 12;
  double abs_tol = 1e-8;
};

// || int S(y, x) (D psi)(x) dx - psi(y) || in polar coordinates about y.
template <class Field>
double delta_calibration(const CliffordRep& rep, const Field& field, const Vec& y,
                         const CalibrationOptions& opt = {}) {
  if (y.size() != rep.n) throw ShapeError("delta_calibration: point dimension");
  SphereGrid grid = sphere_grid(rep.n, opt.polar_nodes, opt.azimuth_nodes);
  std::vector<SpinorMatrix> units;
  for (auto& p : grid.points) units.push_back(clifford_vector(rep, p));
  const int N = rep.N;
  auto angular = [&](double t) {
    Spinor acc = Spinor::Zero(N);
    for (std::size_t a = 0; a < grid.points.size(); ++a) {
      Vec x = y + t * grid.points[a];
      acc += grid.weights[a] * (units[a] * field.dirac(x));
    }
    return Spinor(acc / rep.omega);
  };
  double T = 0.0;
  if constexpr (requires { field.center; }) T = (y - field.center).norm();
  T += field.support_radius();
  auto q = integrate_composite(angular, 0.0, T, opt.panels, 16);
  if (!(q.error <= opt.abs_tol))
    throw ToleranceError("delta_calibration: quadrature did not converge", q.error);
  Spinor out = q.value;
  return (out - field.value(y)).norm();
}

}  // namespace wspin
