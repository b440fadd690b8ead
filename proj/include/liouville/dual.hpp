#pragma once

#include <cmath>
#include <complex>

namespace liouville {

/// Second-order forward-mode dual number: carries f, f' and f'' through
/// arithmetic with respect to one seeded variable. Works for real and
/// complex `T`; the complex case gives complex derivatives of analytic
/// expressions.
template <typename T>
struct Dual2 {
  T v{};
  T d1{};
  T d2{};

  static constexpr Dual2 constant(T value) { return {value, T{}, T{}}; }
  static constexpr Dual2 variable(T value) { return {value, T{1}, T{}}; }
};

template <typename T>
constexpr Dual2<T> operator+(const Dual2<T>& a, const Dual2<T>& b) {
  return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2};
}

template <typename T>
constexpr Dual2<T> operator-(const Dual2<T>& a, const Dual2<T>& b) {
  return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2};
}

template <typename T>
constexpr Dual2<T> operator-(const Dual2<T>& a) {
  return {-a.v, -a.d1, -a.d2};
}

template <typename T>
constexpr Dual2<T> operator*(const Dual2<T>& a, const Dual2<T>& b) {
  return {a.v * b.v, a.d1 * b.v + a.v * b.d1,
          a.d2 * b.v + T{2} * a.d1 * b.d1 + a.v * b.d2};
}

/// Applies a scalar function with known h(v), h'(v), h''(v) (chain rule).
template <typename T>
constexpr Dual2<T> chain(const Dual2<T>& a, T h, T dh, T ddh) {
  return {h, dh * a.d1, ddh * a.d1 * a.d1 + dh * a.d2};
}

template <typename T>
Dual2<T> reciprocal(const Dual2<T>& a) {
  const T inv = T{1} / a.v;
  return chain(a, inv, -inv * inv, T{2} * inv * inv * inv);
}

template <typename T>
Dual2<T> operator/(const Dual2<T>& a, const Dual2<T>& b) {
  return a * reciprocal(b);
}

template <typename T>
Dual2<T> exp(const Dual2<T>& a) {
  using std::exp;
  const T e = exp(a.v);
  return chain(a, e, e, e);
}

template <typename T>
Dual2<T> log(const Dual2<T>& a) {
  using std::log;
  const T inv = T{1} / a.v;
  return chain(a, log(a.v), inv, -inv * inv);
}

template <typename T>
Dual2<T> sqrt(const Dual2<T>& a) {
  using std::sqrt;
  const T s = sqrt(a.v);
  const T ds = T{0.5} / s;
  return chain(a, s, ds, -ds / (T{2} * a.v));
}

template <typename T>
Dual2<T> sin(const Dual2<T>& a) {
  using std::cos, std::sin;
  const T s = sin(a.v);
  return chain(a, s, cos(a.v), -s);
}

template <typename T>
Dual2<T> cos(const Dual2<T>& a) {
  using std::cos, std::sin;
  const T c = cos(a.v);
  return chain(a, c, -sin(a.v), -c);
}

template <typename T>
Dual2<T> sinh(const Dual2<T>& a) {
  using std::cosh, std::sinh;
  const T s = sinh(a.v);
  return chain(a, s, cosh(a.v), s);
}

template <typename T>
Dual2<T> cosh(const Dual2<T>& a) {
  using std::cosh, std::sinh;
  const T c = cosh(a.v);
  return chain(a, c, sinh(a.v), c);
}

/// Integer power by repeated squaring; negative exponents go through the
/// reciprocal.
template <typename T>
Dual2<T> pow(Dual2<T> base, long long n) {
  if (n < 0) return reciprocal(pow(base, -n));
  Dual2<T> result = Dual2<T>::constant(T{1});
  while (n > 0) {
    if (n & 1) result = result * base;
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return result;
}

}  // namespace liouville
