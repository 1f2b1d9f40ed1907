#pragma once

// Extended-precision scalars for the reference oracles: binary32 work is
// checked against binary64, binary64 work against double-double.

#include <cmath>
#include <complex>
#include <limits>
#include <type_traits>

namespace spblas::oracle {

// Unevaluated sum hi + lo with |lo| <= ulp(hi) / 2.
struct dd {
  double hi = 0.0;
  double lo = 0.0;

  constexpr dd() = default;
  constexpr dd(double h) : hi(h), lo(0.0) {}  // NOLINT: implicit by design
  constexpr dd(double h, double l) : hi(h), lo(l) {}
};

inline dd two_sum(double a, double b) noexcept {
  const double s = a + b;
  const double bb = s - a;
  const double e = (a - (s - bb)) + (b - bb);
  return {s, e};
}

inline dd quick_two_sum(double a, double b) noexcept {
  const double s = a + b;
  return {s, b - (s - a)};
}

inline dd two_prod(double a, double b) noexcept {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}

inline dd operator+(dd a, dd b) noexcept {
  if (!std::isfinite(a.hi) || !std::isfinite(b.hi)) return dd(a.hi + b.hi);
  dd s = two_sum(a.hi, b.hi);
  dd t = two_sum(a.lo, b.lo);
  s.lo += t.hi;
  s = quick_two_sum(s.hi, s.lo);
  s.lo += t.lo;
  return quick_two_sum(s.hi, s.lo);
}

inline dd operator-(dd a) noexcept { return {-a.hi, -a.lo}; }
inline dd operator-(dd a, dd b) noexcept { return a + (-b); }

inline dd operator*(dd a, dd b) noexcept {
  if (!std::isfinite(a.hi) || !std::isfinite(b.hi)) return dd(a.hi * b.hi);
  dd p = two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return quick_two_sum(p.hi, p.lo);
}

inline dd operator/(dd a, dd b) noexcept {
  const double q1 = a.hi / b.hi;
  if (!std::isfinite(q1)) return dd(q1);
  const dd r = a - b * dd(q1);
  const double q2 = r.hi / b.hi;
  const dd r2 = r - b * dd(q2);
  const double q3 = r2.hi / b.hi;
  dd q = quick_two_sum(q1, q2);
  return q + dd(q3);
}

inline dd& operator+=(dd& a, dd b) noexcept { return a = a + b; }
inline dd& operator-=(dd& a, dd b) noexcept { return a = a - b; }

inline bool operator==(dd a, dd b) noexcept { return a.hi == b.hi && a.lo == b.lo; }

inline double to_double(dd a) noexcept { return a.hi + a.lo; }
inline double to_double(double a) noexcept { return a; }

// Complex numbers over an extended real.
template <class E>
struct cx {
  E re{};
  E im{};
};

template <class E>
cx<E> operator+(const cx<E>& a, const cx<E>& b) { return {a.re + b.re, a.im + b.im}; }
template <class E>
cx<E> operator-(const cx<E>& a, const cx<E>& b) { return {a.re - b.re, a.im - b.im}; }
template <class E>
cx<E> operator-(const cx<E>& a) { return {-a.re, -a.im}; }
template <class E>
cx<E> operator*(const cx<E>& a, const cx<E>& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
template <class E>
cx<E> operator/(const cx<E>& a, const cx<E>& b) {
  const E den = b.re * b.re + b.im * b.im;
  return {(a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den};
}
template <class E>
cx<E>& operator+=(cx<E>& a, const cx<E>& b) { return a = a + b; }
template <class E>
cx<E>& operator-=(cx<E>& a, const cx<E>& b) { return a = a - b; }
template <class E>
bool operator==(const cx<E>& a, const cx<E>& b) { return a.re == b.re && a.im == b.im; }

template <class T>
struct extended;
template <>
struct extended<float> {
  using type = double;
};
template <>
struct extended<double> {
  using type = dd;
};
template <>
struct extended<std::complex<float>> {
  using type = cx<double>;
};
template <>
struct extended<std::complex<double>> {
  using type = cx<dd>;
};

template <class T>
using extended_t = typename extended<T>::type;

// Exact widening of a working-precision value.
template <class T>
extended_t<T> widen(T v) {
  if constexpr (std::is_same_v<T, float>) {
    return static_cast<double>(v);
  } else if constexpr (std::is_same_v<T, double>) {
    return dd(v);
  } else {
    using R = typename T::value_type;
    return {widen<R>(v.real()), widen<R>(v.imag())};
  }
}

// Nearest working-precision value.
template <class T>
T round_to(const extended_t<T>& e) {
  if constexpr (std::is_same_v<T, float>) {
    return static_cast<float>(e);
  } else if constexpr (std::is_same_v<T, double>) {
    return to_double(e);
  } else {
    using R = typename T::value_type;
    return T(round_to<R>(e.re), round_to<R>(e.im));
  }
}

template <class E>
E conj_ext(const E& e) {
  if constexpr (std::is_same_v<E, double> || std::is_same_v<E, dd>) {
    return e;
  } else {
    return {e.re, -e.im};
  }
}

// |e| as a binary64 number; enough for bound bookkeeping.
template <class E>
double magnitude(const E& e) {
  if constexpr (std::is_same_v<E, double>) {
    return std::abs(e);
  } else if constexpr (std::is_same_v<E, dd>) {
    return std::abs(to_double(e));
  } else {
    return std::hypot(magnitude(e.re), magnitude(e.im));
  }
}

template <class T>
double magnitude_of(T v) {
  return static_cast<double>(std::abs(v));
}

template <class E>
bool is_zero_ext(const E& e) {
  if constexpr (std::is_same_v<E, double>) {
    return e == 0.0;
  } else if constexpr (std::is_same_v<E, dd>) {
    return e.hi == 0.0 && e.lo == 0.0;
  } else {
    return is_zero_ext(e.re) && is_zero_ext(e.im);
  }
}

}  // namespace spblas::oracle
