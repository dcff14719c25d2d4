#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include "wspin/errors.hpp"

namespace wspin {

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;
};

struct QuadOptions {
  double rel_tol = 1e-12;
  unsigned max_depth = 15;
  double abs_tol = 0.0;  // when positive, panels are accepted at this absolute error share
};

namespace detail {

template <class F>
void bisect_panels(F& f, double a, double b, double abs_tol, double rel_tol, unsigned depth,
                   CompensatedSum& total, CompensatedSum& err, CompensatedSum& l1) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  double e = 0.0, L = 0.0;
  double v = GK::integrate(f, a, b, 0, 0.0, &e, &L);
  if (depth == 0 || e <= std::max(abs_tol, rel_tol * std::abs(v))) {
    total.add(v);
    err.add(e);
    l1.add(L);
    return;
  }
  double m = 0.5 * (a + b);
  bisect_panels(f, a, m, 0.5 * abs_tol, rel_tol, depth - 1, total, err, l1);
  bisect_panels(f, m, b, 0.5 * abs_tol, rel_tol, depth - 1, total, err, l1);
}

}  // namespace detail

// Adaptive Gauss-Kronrod over [a, b] split at the interior breakpoints. b may be +inf.
template <class F>
QuadResult integrate(F&& f, double a, double b, std::vector<double> breaks = {},
                     QuadOptions opt = {}) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  std::vector<double> pts{a};
  std::sort(breaks.begin(), breaks.end());
  for (double x : breaks)
    if (x > pts.back() && x < b) pts.push_back(x);
  pts.push_back(b);
  CompensatedSum total, err, l1;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (opt.abs_tol > 0.0 && std::isfinite(pts[i + 1])) {
      double share = opt.abs_tol * (pts[i + 1] - pts[i]) / (pts.back() - pts.front());
      detail::bisect_panels(f, pts[i], pts[i + 1], share, opt.rel_tol, opt.max_depth, total, err,
                            l1);
      continue;
    }
    double e = 0.0, L = 0.0;
    double v = GK::integrate(f, pts[i], pts[i + 1], opt.max_depth, opt.rel_tol, &e, &L);
    total.add(v);
    err.add(e);
    l1.add(L);
  }
  return {total.value(), err.value(), l1.value()};
}

// As integrate, but raises ToleranceError when the estimate misses rel_tol by a wide margin.
template <class F>
QuadResult integrate_checked(F&& f, double a, double b, std::vector<double> breaks = {},
                             QuadOptions opt = {}, double abs_floor = 1e-300) {
  QuadResult r = integrate(f, a, b, std::move(breaks), opt);
  double allowed = std::max(100.0 * opt.rel_tol * r.l1, abs_floor);
  if (!std::isfinite(r.value) || r.error > allowed)
    throw ToleranceError("adaptive quadrature did not converge", r.error);
  return r;
}

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule on [a, b].
inline Rule gauss_legendre(int n, double a = -1.0, double b = 1.0) {
  if (n < 1) throw DomainError("gauss_legendre: n must be positive");
  Rule r;
  auto zeros = boost::math::legendre_p_zeros<double>(n);
  std::vector<double> x, w;
  for (double z : zeros) {
    double dp = boost::math::legendre_p_prime<double>(n, z);
    double wt = 2.0 / ((1.0 - z * z) * dp * dp);
    x.push_back(z);
    w.push_back(wt);
    if (z != 0.0) {
      x.push_back(-z);
      w.push_back(wt);
    }
  }
  std::vector<std::size_t> idx(x.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](auto i, auto j) { return x[i] < x[j]; });
  double h = 0.5 * (b - a), m = 0.5 * (b + a);
  for (auto i : idx) {
    r.nodes.push_back(m + h * x[i]);
    r.weights.push_back(h * w[i]);
  }
  return r;
}

template <class T>
struct CompositeResult {
  T value;
  double error = 0.0;
};

// Composite Gauss-Legendre for vector-valued integrands; the error is the change under panel doubling.
template <class F>
auto integrate_composite(F&& f, double a, double b, int panels, int order = 16)
    -> CompositeResult<decltype(f(a))> {
  using T = decltype(f(a));
  Rule gl = gauss_legendre(order, 0.0, 1.0);
  auto run = [&](int m) {
    double h = (b - a) / m;
    T acc = f(a + h * gl.nodes[0]) * (h * gl.weights[0]);
    for (int p = 0; p < m; ++p)
      for (std::size_t i = (p == 0 ? 1 : 0); i < gl.nodes.size(); ++i)
        acc += f(a + h * (p + gl.nodes[i])) * (h * gl.weights[i]);
    return acc;
  };
  T coarse = run(panels);
  T fine = run(2 * panels);
  T diff = fine - coarse;
  double err;
  if constexpr (std::is_arithmetic_v<T>)
    err = std::abs(diff);
  else
    err = diff.norm();
  return {fine, err};
}

// Product rule on the unit sphere S^{n-1} in R^n. Weights sum to the sphere area.
struct SphereGrid {
  std::vector<Eigen::VectorXd> points;
  std::vector<double> weights;
};

inline SphereGrid sphere_grid(int n, int polar_nodes, int azimuth_nodes) {
  if (n < 2) throw DomainError("sphere_grid: dimension must be at least 2");
  SphereGrid g;
  Rule polar = gauss_legendre(polar_nodes, 0.0, std::numbers::pi);
  int nphi = azimuth_nodes;
  // Angles theta_1..theta_{n-2} in [0, pi], phi in [0, 2 pi).
  int nang = n - 2;
  std::vector<int> idx(nang, 0);
  const double dphi = 2.0 * std::numbers::pi / nphi;
  while (true) {
    double w0 = 1.0;
    Eigen::VectorXd base = Eigen::VectorXd::Zero(n);
    double s = 1.0;
    for (int k = 0; k < nang; ++k) {
      double th = polar.nodes[idx[k]];
      int m = nang - k;  // power of sin for this angle
      w0 *= polar.weights[idx[k]] * std::pow(std::sin(th), m);
      base[k] = s * std::cos(th);
      s *= std::sin(th);
    }
    for (int j = 0; j < nphi; ++j) {
      double ph = (j + 0.5) * dphi;
      Eigen::VectorXd p = base;
      p[n - 2] = s * std::cos(ph);
      p[n - 1] = s * std::sin(ph);
      g.points.push_back(p);
      g.weights.push_back(w0 * dphi);
    }
    int k = nang - 1;
    while (k >= 0 && ++idx[k] == polar_nodes) idx[k--] = 0;
    if (k < 0) break;
  }
  return g;
}

inline double sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

}  // namespace wspin
