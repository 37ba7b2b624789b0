#pragma once

// Second-order forward-mode jets: f(t0 + e) = v + d1 e + d2 e^2 / 2 + O(e^3).
// Enough arithmetic to evaluate closed-form solutions together with their
// first and second derivatives in a single pass.

#include <cmath>

namespace magtunnel::numerics {

template <class T>
struct Jet {
  T v{};   // value
  T d1{};  // first derivative
  T d2{};  // second derivative

  constexpr Jet() = default;
  constexpr Jet(T value) : v(value) {}  // NOLINT: constants promote implicitly
  constexpr Jet(T value, T first, T second) : v(value), d1(first), d2(second) {}

  static constexpr Jet variable(T at) { return Jet(at, T(1), T(0)); }

  Jet& operator+=(const Jet& o) { v += o.v; d1 += o.d1; d2 += o.d2; return *this; }
  Jet& operator-=(const Jet& o) { v -= o.v; d1 -= o.d1; d2 -= o.d2; return *this; }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }
  Jet& operator/=(const Jet& o) { return *this = *this / o; }

  friend Jet operator-(const Jet& a) { return {-a.v, -a.d1, -a.d2}; }
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b) {
    return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + T(2) * a.d1 * b.d1 + a.v * b.d2};
  }
  friend Jet operator/(const Jet& a, const Jet& b) {
    const T q = a.v / b.v;
    const T q1 = (a.d1 - q * b.d1) / b.v;
    const T q2 = (a.d2 - T(2) * q1 * b.d1 - q * b.d2) / b.v;
    return {q, q1, q2};
  }
};

// Chain rule for a scalar function with derivatives f, f', f''.
template <class T>
Jet<T> compose(const Jet<T>& x, T f, T f1, T f2) {
  return {f, f1 * x.d1, f2 * x.d1 * x.d1 + f1 * x.d2};
}

template <class T>
Jet<T> sin(const Jet<T>& x) {
  using std::cos, std::sin;
  const T s = sin(x.v);
  return compose(x, s, T(cos(x.v)), -s);
}

template <class T>
Jet<T> cos(const Jet<T>& x) {
  using std::cos, std::sin;
  const T c = cos(x.v);
  return compose(x, c, T(-sin(x.v)), -c);
}

template <class T>
Jet<T> sinh(const Jet<T>& x) {
  using std::cosh, std::sinh;
  const T s = sinh(x.v);
  return compose(x, s, T(cosh(x.v)), s);
}

template <class T>
Jet<T> cosh(const Jet<T>& x) {
  using std::cosh, std::sinh;
  const T c = cosh(x.v);
  return compose(x, c, T(sinh(x.v)), c);
}

template <class T>
Jet<T> exp(const Jet<T>& x) {
  using std::exp;
  const T e = exp(x.v);
  return compose(x, e, e, e);
}

template <class T>
Jet<T> sqrt(const Jet<T>& x) {
  using std::sqrt;
  const T s = sqrt(x.v);
  return compose(x, s, T(0.5) / s, T(-0.25) / (s * x.v));
}

}  // namespace magtunnel::numerics
