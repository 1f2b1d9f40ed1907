#pragma once

// Brute-force reference implementations. Everything here works on dense
// mirrors built straight from view triples and never calls a library
// kernel, so the two can be compared independently.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include <spblas/formats.hpp>
#include <spblas/oracle/extended.hpp>

namespace spblas::oracle {

template <class T>
struct triple {
  std::int64_t i;
  std::int64_t j;
  T v;
};

// Triples in storage order, 0-based, whatever the view's base or offset
// origin.
template <class T, class I, class O>
std::vector<triple<T>> triples_of(const csr_view<T, I, O>& a) {
  std::vector<triple<T>> out;
  const auto off = a.row_offsets();
  if (off.empty()) return out;
  const std::int64_t base = static_cast<int>(a.base());
  const std::int64_t first = off[0];
  for (std::int64_t i = 0; i < a.nrows(); ++i) {
    for (std::int64_t k = off[i] - first; k < off[i + 1] - first; ++k) {
      out.push_back({i, static_cast<std::int64_t>(a.col_indices()[k]) - base, a.values()[k]});
    }
  }
  return out;
}

template <class T, class I, class O>
std::vector<triple<T>> triples_of(const csc_view<T, I, O>& a) {
  std::vector<triple<T>> out;
  const auto off = a.col_offsets();
  if (off.empty()) return out;
  const std::int64_t base = static_cast<int>(a.base());
  const std::int64_t first = off[0];
  for (std::int64_t j = 0; j < a.ncols(); ++j) {
    for (std::int64_t k = off[j] - first; k < off[j + 1] - first; ++k) {
      out.push_back({static_cast<std::int64_t>(a.row_indices()[k]) - base, j, a.values()[k]});
    }
  }
  return out;
}

template <class T, class I, class O>
std::vector<triple<T>> triples_of(const coo_view<T, I, O>& a) {
  std::vector<triple<T>> out;
  const std::int64_t base = static_cast<int>(a.base());
  for (std::int64_t k = 0; k < a.nnz(); ++k) {
    out.push_back({static_cast<std::int64_t>(a.row_indices()[k]) - base,
                   static_cast<std::int64_t>(a.col_indices()[k]) - base, a.values()[k]});
  }
  return out;
}

// Triples sorted by (row, column): the canonical multiset form.
template <class T>
std::vector<triple<T>> canonical(std::vector<triple<T>> t) {
  std::stable_sort(t.begin(), t.end(), [](const triple<T>& a, const triple<T>& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  return t;
}

/// Row-major dense matrix in working precision.
template <class T>
struct dense_matrix {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<T> data;

  dense_matrix() = default;
  dense_matrix(std::int64_t r, std::int64_t c, T fill = T(0))
      : rows(r), cols(c), data(static_cast<std::size_t>(r * c), fill) {}

  T& operator()(std::int64_t i, std::int64_t j) { return data[i * cols + j]; }
  const T& operator()(std::int64_t i, std::int64_t j) const { return data[i * cols + j]; }
};

/// Dense mirror of alpha * op(A) before scaling: extended values, the
/// working-precision values, and the stored pattern.
template <class T>
struct dense_mirror {
  using E = extended_t<T>;
  std::int64_t nrows = 0;
  std::int64_t ncols = 0;
  std::vector<E> data;
  std::vector<T> raw;
  std::vector<std::uint8_t> pattern;

  dense_mirror() = default;
  dense_mirror(std::int64_t r, std::int64_t c)
      : nrows(r), ncols(c), data(static_cast<std::size_t>(r * c)),
        raw(static_cast<std::size_t>(r * c), T(0)), pattern(static_cast<std::size_t>(r * c), 0) {}

  std::size_t at(std::int64_t i, std::int64_t j) const {
    return static_cast<std::size_t>(i * ncols + j);
  }
  bool stored(std::int64_t i, std::int64_t j) const { return pattern[at(i, j)] != 0; }
  std::int64_t row_count(std::int64_t i) const {
    std::int64_t n = 0;
    for (std::int64_t j = 0; j < ncols; ++j) n += stored(i, j);
    return n;
  }
};

template <class T>
T conj_raw(T v) {
  if constexpr (is_complex_v<T>) {
    return std::conj(v);
  } else {
    return v;
  }
}

// Triples of A placed at op(A) coordinates. Duplicate coordinates are a
// caller error.
template <class T>
dense_mirror<T> mirror_of(const std::vector<triple<T>>& t, std::int64_t nrows, std::int64_t ncols,
                          bool transpose = false, bool conjugate = false) {
  dense_mirror<T> m(transpose ? ncols : nrows, transpose ? nrows : ncols);
  for (const auto& e : t) {
    const std::int64_t i = transpose ? e.j : e.i;
    const std::int64_t j = transpose ? e.i : e.j;
    const T v = conjugate ? conj_raw(e.v) : e.v;
    const auto k = m.at(i, j);
    if (m.pattern[k]) throw std::logic_error("mirror_of: duplicate coordinate");
    m.pattern[k] = 1;
    m.raw[k] = v;
    m.data[k] = widen(v);
  }
  return m;
}

template <sparse_view_type V>
auto mirror_of(const V& view, bool transpose = false, bool conjugate = false) {
  return mirror_of(triples_of(view), view.nrows(), view.ncols(), transpose, conjugate);
}

/// Reference output: extended values, the binary64 sum of absolute terms
/// (the sum |x_i||y_i| of the error bound), the number of stored terms and
/// the structural pattern.
template <class T>
struct reference {
  using E = extended_t<T>;
  std::int64_t nrows = 0;
  std::int64_t ncols = 0;
  std::vector<E> value;
  std::vector<double> abs_sum;
  std::vector<std::int64_t> terms;
  std::vector<std::uint8_t> pattern;

  reference() = default;
  reference(std::int64_t r, std::int64_t c)
      : nrows(r), ncols(c), value(static_cast<std::size_t>(r * c)),
        abs_sum(static_cast<std::size_t>(r * c), 0.0), terms(static_cast<std::size_t>(r * c), 0),
        pattern(static_cast<std::size_t>(r * c), 0) {}

  std::size_t at(std::int64_t i, std::int64_t j) const {
    return static_cast<std::size_t>(i * ncols + j);
  }
};

// ---- values ----------------------------------------------------------------

/// Y = alpha * A * X (+ beta * D): A a mirror of op(A), X and D dense.
template <class T>
reference<T> oracle_spmv(const dense_mirror<T>& a, T alpha, const dense_matrix<T>& x,
                         const dense_matrix<T>* d = nullptr, T beta = T(0)) {
  using E = extended_t<T>;
  reference<T> r(a.nrows, x.cols);
  const E ea = widen(alpha);
  const E eb = widen(beta);
  const double ma = magnitude_of(alpha);
  const double mb = magnitude_of(beta);
  for (std::int64_t i = 0; i < a.nrows; ++i) {
    for (std::int64_t c = 0; c < x.cols; ++c) {
      E s{};
      double abs = 0;
      std::int64_t n = 0;
      if (alpha != T(0)) {
        for (std::int64_t k = 0; k < a.ncols; ++k) {
          if (!a.stored(i, k)) continue;
          s += a.data[a.at(i, k)] * widen(x(k, c));
          abs += magnitude_of(a.raw[a.at(i, k)]) * magnitude_of(x(k, c));
          ++n;
        }
      }
      E out = ea * s;
      abs *= ma;
      if (d && beta != T(0)) {
        out += eb * widen((*d)(i, c));
        abs += mb * magnitude_of((*d)(i, c));
        ++n;
      }
      const auto k = r.at(i, c);
      r.value[k] = out;
      r.abs_sum[k] = abs;
      r.terms[k] = n;
      r.pattern[k] = 1;
    }
  }
  return r;
}

/// C = alpha * A * B (+ beta * D) with the symbolic pattern: product
/// pattern united with D's pattern, numeric zeros kept.
template <class T>
reference<T> oracle_gemm(const dense_mirror<T>& a, const dense_mirror<T>& b, T alpha,
                         const dense_mirror<T>* d = nullptr, T beta = T(0)) {
  using E = extended_t<T>;
  reference<T> r(a.nrows, b.ncols);
  const E ea = widen(alpha);
  const E eb = widen(beta);
  for (std::int64_t i = 0; i < a.nrows; ++i) {
    for (std::int64_t j = 0; j < b.ncols; ++j) {
      E s{};
      double abs = 0;
      std::int64_t n = 0;
      bool hit = false;
      for (std::int64_t k = 0; k < a.ncols; ++k) {
        if (!a.stored(i, k) || !b.stored(k, j)) continue;
        hit = true;
        if (alpha != T(0)) {
          s += a.data[a.at(i, k)] * b.data[b.at(k, j)];
          abs += magnitude_of(a.raw[a.at(i, k)]) * magnitude_of(b.raw[b.at(k, j)]);
          ++n;
        }
      }
      E out = ea * s;
      abs *= magnitude_of(alpha);
      if (d && d->stored(i, j)) {
        hit = true;
        if (beta != T(0)) {
          out += eb * d->data[d->at(i, j)];
          abs += magnitude_of(beta) * magnitude_of(d->raw[d->at(i, j)]);
          ++n;
        }
      }
      const auto k = r.at(i, j);
      r.pattern[k] = hit;
      if (hit) {
        r.value[k] = out;
        r.abs_sum[k] = abs;
        r.terms[k] = n;
      }
    }
  }
  return r;
}

/// C = alpha * A + beta * B over the union of patterns.
template <class T>
reference<T> oracle_add(const dense_mirror<T>& a, const dense_mirror<T>& b, T alpha, T beta) {
  reference<T> r(a.nrows, a.ncols);
  for (std::size_t k = 0; k < r.value.size(); ++k) {
    const bool pa = a.pattern[k] && alpha != T(0);
    const bool pb = b.pattern[k] && beta != T(0);
    r.pattern[k] = a.pattern[k] || b.pattern[k];
    if (!r.pattern[k]) continue;
    extended_t<T> v{};
    if (pa) v += widen(alpha) * a.data[k];
    if (pb) v += widen(beta) * b.data[k];
    r.value[k] = v;
    r.abs_sum[k] = (pa ? magnitude_of(alpha) * magnitude_of(a.raw[k]) : 0.0) +
                   (pb ? magnitude_of(beta) * magnitude_of(b.raw[k]) : 0.0);
    r.terms[k] = pa + pb;
  }
  return r;
}

/// C = (alpha * A) .* (beta * B) over the intersection of patterns.
template <class T>
reference<T> oracle_hadamard(const dense_mirror<T>& a, const dense_mirror<T>& b, T alpha,
                             T beta) {
  reference<T> r(a.nrows, a.ncols);
  for (std::size_t k = 0; k < r.value.size(); ++k) {
    r.pattern[k] = a.pattern[k] && b.pattern[k];
    if (!r.pattern[k]) continue;
    if (alpha == T(0) || beta == T(0)) continue;
    r.value[k] = widen(alpha) * a.data[k] * widen(beta) * b.data[k];
    r.abs_sum[k] = magnitude_of(alpha) * magnitude_of(a.raw[k]) * magnitude_of(beta) *
                   magnitude_of(b.raw[k]);
    r.terms[k] = 1;
  }
  return r;
}

/// C(i, j) = alpha * sum_t X(i, t) Y(t, j) at the stored positions of mask.
template <class T>
reference<T> oracle_sddmm(const dense_matrix<T>& x, const dense_matrix<T>& y,
                          const dense_mirror<T>& mask, T alpha) {
  using E = extended_t<T>;
  reference<T> r(mask.nrows, mask.ncols);
  for (std::int64_t i = 0; i < mask.nrows; ++i) {
    for (std::int64_t j = 0; j < mask.ncols; ++j) {
      if (!mask.stored(i, j)) continue;
      E s{};
      double abs = 0;
      for (std::int64_t t = 0; t < x.cols; ++t) {
        s += widen(x(i, t)) * widen(y(t, j));
        abs += magnitude_of(x(i, t)) * magnitude_of(y(t, j));
      }
      const auto k = r.at(i, j);
      r.pattern[k] = 1;
      r.value[k] = widen(alpha) * s;
      r.abs_sum[k] = magnitude_of(alpha) * abs;
      r.terms[k] = x.cols;
    }
  }
  return r;
}

/// Dense substitution in extended precision. Orientation is read from the
/// pattern; nullopt when the system is not triangular or a diagonal entry
/// is missing or zero.
template <class T>
std::optional<std::vector<extended_t<T>>> oracle_trisolve(const dense_mirror<T>& t,
                                                          const std::vector<T>& b) {
  using E = extended_t<T>;
  const std::int64_t n = t.nrows;
  if (t.ncols != n || static_cast<std::int64_t>(b.size()) != n) return std::nullopt;
  bool lower = true;
  bool upper = true;
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      if (!t.stored(i, j)) continue;
      if (j > i) lower = false;
      if (j < i) upper = false;
    }
    if (!t.stored(i, i) || t.raw[t.at(i, i)] == T(0)) return std::nullopt;
  }
  if (!lower && !upper) return std::nullopt;
  std::vector<E> x(static_cast<std::size_t>(n));
  for (std::int64_t s = 0; s < n; ++s) {
    const std::int64_t i = lower ? s : n - 1 - s;
    E acc = widen(b[i]);
    for (std::int64_t j = 0; j < n; ++j) {
      if (j != i && t.stored(i, j)) acc -= t.data[t.at(i, j)] * x[j];
    }
    x[i] = acc / t.data[t.at(i, i)];
  }
  return x;
}

/// Row residuals b - T x_hat in extended precision, with the absolute term
/// sums |b_i| + sum_j |t_ij| |x_hat_j|. A backward-stable substitution makes
/// every residual small relative to its term sum.
template <class T>
reference<T> trisolve_residual(const dense_mirror<T>& t, const std::vector<T>& b,
                               const std::vector<T>& xhat) {
  reference<T> r(t.nrows, 1);
  for (std::int64_t i = 0; i < t.nrows; ++i) {
    extended_t<T> s = widen(b[i]);
    double abs = magnitude_of(b[i]);
    std::int64_t n = 1;
    for (std::int64_t j = 0; j < t.ncols; ++j) {
      if (!t.stored(i, j)) continue;
      s -= t.data[t.at(i, j)] * widen(xhat[j]);
      abs += magnitude_of(t.raw[t.at(i, j)]) * magnitude_of(xhat[j]);
      ++n;
    }
    r.value[i] = s;
    r.abs_sum[i] = abs;
    r.terms[i] = n;
    r.pattern[i] = 1;
  }
  return r;
}

template <class E>
E sqrt_ext(const E& v) {
  if constexpr (std::is_same_v<E, double>) {
    return std::sqrt(v);
  } else {
    const double s = std::sqrt(v.hi);
    if (s == 0.0 || !std::isfinite(s)) return dd(s);
    const dd err = v - two_prod(s, s);
    return quick_two_sum(s, to_double(err) / (2.0 * s));
  }
}

struct norm_reference {
  double value_hi = 0;  // binary64 rounding of the exact norm
  double abs_sum = 0;   // the norm itself: every term is non-negative
  std::int64_t terms = 0;
};

/// Infinity norm |alpha| * max_i sum_j |a_ij| over stored entries.
template <class T>
std::pair<extended_t<real_t<T>>, norm_reference> oracle_inf_norm(const dense_mirror<T>& a,
                                                                 T alpha) {
  using R = real_t<T>;
  using E = extended_t<R>;
  E best{};
  double best_d = 0;
  std::int64_t longest = 0;
  for (std::int64_t i = 0; i < a.nrows; ++i) {
    E s{};
    for (std::int64_t j = 0; j < a.ncols; ++j) {
      if (a.stored(i, j)) s += widen<R>(std::abs(a.raw[a.at(i, j)]));
    }
    const double sd = to_double(s);
    if (sd > best_d || std::isnan(sd)) {
      best = s;
      best_d = sd;
    }
    longest = std::max(longest, a.row_count(i));
  }
  const E v = widen<R>(std::abs(alpha)) * best;
  return {v, {to_double(v), to_double(v), longest}};
}

/// Frobenius norm |alpha| * sqrt(sum |a_ij|^2).
template <class T>
std::pair<extended_t<real_t<T>>, norm_reference> oracle_frob_norm(const dense_mirror<T>& a,
                                                                  T alpha) {
  using R = real_t<T>;
  using E = extended_t<R>;
  E s{};
  std::int64_t n = 0;
  for (std::size_t k = 0; k < a.raw.size(); ++k) {
    if (!a.pattern[k]) continue;
    if constexpr (is_complex_v<T>) {
      const E re = widen<R>(a.raw[k].real());
      const E im = widen<R>(a.raw[k].imag());
      s += re * re + im * im;
    } else {
      const E v = widen<R>(a.raw[k]);
      s += v * v;
    }
    ++n;
  }
  const E v = widen<R>(std::abs(alpha)) * sqrt_ext(s);
  return {v, {to_double(v), to_double(v), n}};
}

// ---- patterns --------------------------------------------------------------

enum class pattern_kind { product, sum, hadamard, transpose, copy };

template <class T>
std::vector<std::uint8_t> oracle_pattern(pattern_kind kind, const dense_mirror<T>& a,
                                         const dense_mirror<T>* b = nullptr) {
  switch (kind) {
    case pattern_kind::product: {
      std::vector<std::uint8_t> p(static_cast<std::size_t>(a.nrows * b->ncols), 0);
      for (std::int64_t i = 0; i < a.nrows; ++i) {
        for (std::int64_t k = 0; k < a.ncols; ++k) {
          if (!a.stored(i, k)) continue;
          for (std::int64_t j = 0; j < b->ncols; ++j) {
            if (b->stored(k, j)) p[i * b->ncols + j] = 1;
          }
        }
      }
      return p;
    }
    case pattern_kind::sum:
    case pattern_kind::hadamard: {
      std::vector<std::uint8_t> p(a.pattern.size());
      for (std::size_t k = 0; k < p.size(); ++k) {
        p[k] = kind == pattern_kind::sum ? (a.pattern[k] || b->pattern[k])
                                         : (a.pattern[k] && b->pattern[k]);
      }
      return p;
    }
    case pattern_kind::transpose: {
      std::vector<std::uint8_t> p(a.pattern.size());
      for (std::int64_t i = 0; i < a.nrows; ++i) {
        for (std::int64_t j = 0; j < a.ncols; ++j) p[j * a.nrows + i] = a.stored(i, j);
      }
      return p;
    }
    case pattern_kind::copy:
      return a.pattern;
  }
  return {};
}

/// Positions of a dense matrix that compare unequal to zero (NaN included).
template <class T>
std::vector<std::uint8_t> oracle_dense_pattern(const dense_matrix<T>& x) {
  std::vector<std::uint8_t> p(x.data.size());
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = x.data[k] != T(0);
  return p;
}

// ---- error bounds ----------------------------------------------------------

enum class summation_order { serial, tree };

/// The dot-product bound f(m) eps sum|x_i||y_i| + g(m) UN, with m the
/// number of stored terms (or rounded operations) actually combined.
struct error_bound_spec {
  double eps = 0;
  double un = 0;
  summation_order order = summation_order::serial;
  std::int64_t m = 0;

  double f() const {
    if (order == summation_order::serial) return static_cast<double>(m);
    return m <= 1 ? 1.0 : std::ceil(std::log2(static_cast<double>(m))) + 1.0;
  }
  double g() const { return 2.0 * static_cast<double>(m); }
  double bound(double abs_sum) const { return f() * eps * abs_sum + g() * un; }

  // eps is the unit roundoff of the working format; UN its smallest
  // subnormal.
  template <class T>
  static error_bound_spec for_type(std::int64_t m, summation_order order = summation_order::serial) {
    using R = real_t<T>;
    return {static_cast<double>(std::numeric_limits<R>::epsilon()) / 2.0,
            static_cast<double>(std::numeric_limits<R>::denorm_min()), order, m};
  }
};

struct bound_check {
  bool pass = false;
  double error = 0;
  double bound = 0;
  double slack = 0;  // error / bound; 0 for an exact match
};

namespace detail {

template <class T>
bool nonfinite(T v) {
  if constexpr (is_complex_v<T>) {
    return nonfinite(v.real()) || nonfinite(v.imag());
  } else {
    return !std::isfinite(v);
  }
}

template <class R>
bool same_nonfinite(R computed, R rounded) {
  if (std::isnan(computed) || std::isnan(rounded)) return std::isnan(computed) && std::isnan(rounded);
  return computed == rounded;
}

inline double slack_of(double error, double bound) {
  if (error == 0) return 0;
  return bound > 0 ? error / bound : std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// Passes iff the distance from computed to the exact value is within the
/// bound. The distance is taken in extended precision against the exact
/// value itself, as in the bound's derivation; rounding the reference first
/// would add up to half an ulp the bound does not cover. Non-finite results
/// must match round(exact) in kind (NaN) or exactly (Inf).
template <class T>
bound_check check_error_bound(T computed, const extended_t<T>& exact,
                              const error_bound_spec& spec, double abs_sum) {
  bound_check c;
  c.bound = spec.bound(abs_sum);
  const T rounded = round_to<T>(exact);
  if (detail::nonfinite(computed) || detail::nonfinite(rounded)) {
    if constexpr (is_complex_v<T>) {
      c.pass = detail::same_nonfinite(computed.real(), rounded.real()) &&
               detail::same_nonfinite(computed.imag(), rounded.imag());
    } else {
      c.pass = detail::same_nonfinite(computed, rounded);
    }
    c.error = c.pass ? 0 : std::numeric_limits<double>::infinity();
    c.slack = detail::slack_of(c.error, c.bound);
    return c;
  }
  c.error = magnitude(widen(computed) - exact);
  c.pass = c.error <= c.bound;
  c.slack = detail::slack_of(c.error, c.bound);
  return c;
}

}  // namespace spblas::oracle
