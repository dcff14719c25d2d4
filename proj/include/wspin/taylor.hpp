#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

#include "wspin/errors.hpp"

namespace wspin {

// Truncated Taylor series in one variable. Coefficient k holds f^{(k)}/k!.
class Taylor {
 public:
  static constexpr int kMaxOrder = 8;

  Taylor() = default;
  Taylor(double value, int order) : order_(checked(order)) { c_[0] = value; }

  static Taylor constant(double value, int order) { return Taylor(value, order); }
  static Taylor variable(double x, int order) {
    Taylor t(x, order);
    if (order >= 1) t.c_[1] = 1.0;
    return t;
  }

  int order() const { return order_; }
  double value() const { return c_[0]; }
  double operator[](int k) const { return c_[k]; }
  double& operator[](int k) { return c_[k]; }

  // k-th derivative at the expansion point.
  double derivative(int k) const {
    if (k > order_) throw DomainError("Taylor::derivative: order exceeds jet order");
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return c_[k] * f;
  }

  // Jet of f' with one order less.
  Taylor differentiate() const {
    Taylor d(0.0, std::max(order_ - 1, 0));
    for (int k = 0; k < order_; ++k) d.c_[k] = (k + 1) * c_[k + 1];
    if (order_ == 0) d.c_[0] = 0.0;
    return d;
  }

  Taylor with_order(int order) const {
    Taylor t = *this;
    t.order_ = checked(order);
    for (int k = order_ + 1; k <= t.order_; ++k) t.c_[k] = 0.0;
    return t;
  }

  Taylor operator-() const {
    Taylor t = *this;
    for (int k = 0; k <= order_; ++k) t.c_[k] = -c_[k];
    return t;
  }

  Taylor& operator+=(const Taylor& o) { return *this = *this + o; }
  Taylor& operator-=(const Taylor& o) { return *this = *this - o; }
  Taylor& operator*=(const Taylor& o) { return *this = *this * o; }
  Taylor& operator/=(const Taylor& o) { return *this = *this / o; }
  Taylor& operator+=(double s) { c_[0] += s; return *this; }
  Taylor& operator-=(double s) { c_[0] -= s; return *this; }
  Taylor& operator*=(double s) {
    for (int k = 0; k <= order_; ++k) c_[k] *= s;
    return *this;
  }
  Taylor& operator/=(double s) { return *this *= 1.0 / s; }

  friend Taylor operator+(const Taylor& a, const Taylor& b) {
    Taylor t(0.0, std::min(a.order_, b.order_));
    for (int k = 0; k <= t.order_; ++k) t.c_[k] = a.c_[k] + b.c_[k];
    return t;
  }
  friend Taylor operator-(const Taylor& a, const Taylor& b) {
    Taylor t(0.0, std::min(a.order_, b.order_));
    for (int k = 0; k <= t.order_; ++k) t.c_[k] = a.c_[k] - b.c_[k];
    return t;
  }
  friend Taylor operator*(const Taylor& a, const Taylor& b) {
    Taylor t(0.0, std::min(a.order_, b.order_));
    for (int k = 0; k <= t.order_; ++k) {
      double s = 0.0;
      for (int j = 0; j <= k; ++j) s += a.c_[j] * b.c_[k - j];
      t.c_[k] = s;
    }
    return t;
  }
  friend Taylor operator/(const Taylor& a, const Taylor& b) {
    Taylor q(0.0, std::min(a.order_, b.order_));
    for (int k = 0; k <= q.order_; ++k) {
      double s = a.c_[k];
      for (int j = 1; j <= k; ++j) s -= b.c_[j] * q.c_[k - j];
      q.c_[k] = s / b.c_[0];
    }
    return q;
  }

  friend Taylor operator+(Taylor a, double s) { return a += s; }
  friend Taylor operator+(double s, Taylor a) { return a += s; }
  friend Taylor operator-(Taylor a, double s) { return a -= s; }
  friend Taylor operator-(double s, const Taylor& a) { return (-a) + s; }
  friend Taylor operator*(Taylor a, double s) { return a *= s; }
  friend Taylor operator*(double s, Taylor a) { return a *= s; }
  friend Taylor operator/(Taylor a, double s) { return a /= s; }
  friend Taylor operator/(double s, const Taylor& a) { return Taylor(s, a.order_) / a; }

 private:
  static int checked(int order) {
    if (order < 0 || order > kMaxOrder) throw DomainError("Taylor: order out of range");
    return order;
  }

  std::array<double, kMaxOrder + 1> c_{};
  int order_ = 0;
};

// y = F(a) given F(a0) and the jet map a -> F'(a).
inline Taylor compose_integral(const Taylor& a, double f0,
                               const std::function<Taylor(const Taylor&)>& fprime) {
  Taylor y(f0, a.order());
  if (a.order() == 0) return y;
  Taylor g = fprime(a.with_order(a.order() - 1)) * a.differentiate();
  for (int k = 1; k <= a.order(); ++k) y[k] = g[k - 1] / k;
  return y;
}

inline Taylor exp(const Taylor& a) {
  Taylor e(std::exp(a.value()), a.order());
  for (int k = 1; k <= a.order(); ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += j * a[j] * e[k - j];
    e[k] = s / k;
  }
  return e;
}

inline Taylor log(const Taylor& a) {
  Taylor l(std::log(a.value()), a.order());
  for (int k = 1; k <= a.order(); ++k) {
    double s = 0.0;
    for (int j = 1; j < k; ++j) s += j * l[j] * a[k - j];
    l[k] = (a[k] - s / k) / a.value();
  }
  return l;
}

inline Taylor pow(const Taylor& a, double alpha) {
  Taylor p(std::pow(a.value(), alpha), a.order());
  for (int k = 1; k <= a.order(); ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += ((alpha + 1.0) * j - k) * a[j] * p[k - j];
    p[k] = s / (k * a.value());
  }
  return p;
}

inline Taylor sqrt(const Taylor& a) { return pow(a, 0.5); }

inline Taylor atan(const Taylor& a) {
  return compose_integral(a, std::atan(a.value()),
                          [](const Taylor& x) { return 1.0 / (1.0 + x * x); });
}

inline Taylor tan(const Taylor& a) {
  // t' = 1 + t^2, solved order by order.
  Taylor t(std::tan(a.value()), a.order());
  for (int k = 1; k <= a.order(); ++k) {
    Taylor tk = t.with_order(k - 1);
    Taylor g = (1.0 + tk * tk) * a.differentiate().with_order(k - 1);
    t[k] = g[k - 1] / k;
  }
  return t;
}

}  // namespace wspin
