#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <spblas/conformance.hpp>
#include <spblas/oracle/corpus.hpp>
#include <spblas/oracle/oracle.hpp>
#include <spblas/spblas.hpp>

namespace spblas::conformance::internal {

using namespace spblas::oracle;
using I = std::int32_t;
using O = std::int64_t;

template <class T>
const char* scalar_name() {
  if constexpr (std::is_same_v<T, float>) return "float";
  if constexpr (std::is_same_v<T, double>) return "double";
  if constexpr (std::is_same_v<T, std::complex<float>>) return "complex_float";
  return "complex_double";
}

// How a family draws its inputs.
enum class mode { values, patterns, integers };

struct case_config {
  mode kind = mode::values;
  int max_dim = 64;
  std::vector<double> densities{0.01, 0.1, 0.3};
};

template <class T>
random_params value_params(const case_config& cfg, std::int64_t r, std::int64_t c,
                           double density) {
  random_params p{r, c, density};
  switch (cfg.kind) {
    case mode::values:
      p.kind = value_kind::uniform;
      p.explicit_zero_fraction = 0.05;
      break;
    case mode::patterns:
      p.kind = value_kind::signed_unit;
      break;
    case mode::integers:
      p.kind = value_kind::integer;
      // Keeps sums of up to 32 products below 2^24 in binary32.
      p.int_bound = std::is_same_v<real_t<T>, float> ? 32 : 1024;
      break;
  }
  return p;
}

inline std::int64_t draw_dim(std::mt19937_64& rng, int max_dim) {
  return std::uniform_int_distribution<std::int64_t>(1, max_dim)(rng);
}

inline double draw_density(std::mt19937_64& rng, const case_config& cfg) {
  return cfg.densities[std::uniform_int_distribution<std::size_t>(0, cfg.densities.size() - 1)(rng)];
}

inline bool coin(std::mt19937_64& rng, double p = 0.5) {
  return std::uniform_real_distribution<double>(0, 1)(rng) < p;
}

inline format draw_format(std::mt19937_64& rng) {
  return static_cast<format>(std::uniform_int_distribution<int>(0, 2)(rng));
}

inline execution_policy draw_policy(std::mt19937_64& rng) {
  switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
    case 0: return seq;
    case 1: return detpar(2);
    default: return par(3);
  }
}

// 1 often (the unscaled path), 0 rarely (the short-circuit path), else a
// random scalar. Integer mode draws small integers.
template <class T>
T draw_scalar(std::mt19937_64& rng, const case_config& cfg, bool allow_zero) {
  const double u = std::uniform_real_distribution<double>(0, 1)(rng);
  if (u < 0.4) return T(1);
  if (allow_zero && u < 0.47) return T(0);
  if (cfg.kind == mode::integers) {
    return T(static_cast<real_t<T>>(std::uniform_int_distribution<int>(-2, 2)(rng)));
  }
  random_params p;
  return random_value<T>(rng, p);
}

inline index_base draw_base(std::mt19937_64& rng) {
  return coin(rng) ? index_base::one : index_base::zero;
}

// Owned sparse input with random base and offset origin.
template <class T>
owned_matrix<T> draw_matrix(std::mt19937_64& rng, const case_config& cfg, std::int64_t r,
                            std::int64_t c, double density) {
  auto p = value_params<T>(cfg, r, c, density);
  const auto base = draw_base(rng);
  const O origin = coin(rng, 0.2) ? 5 : 0;
  return from_triples<T>(r, c, random_triples<T>(rng, p), base, origin);
}

// Calls fn with a plain view or a handle over m in format f.
template <class T, class F>
void with_sparse(owned_matrix<T>& m, format f, bool handle, F&& fn) {
  switch (f) {
    case format::csr:
      if (handle) {
        auto h = make_handle(m.csr());
        fn(h);
      } else {
        fn(m.csr());
      }
      return;
    case format::csc:
      if (handle) {
        auto h = make_handle(m.csc());
        fn(h);
      } else {
        fn(m.csc());
      }
      return;
    case format::coo:
      if (handle) {
        auto h = make_handle(m.coo());
        fn(h);
      } else {
        fn(m.coo());
      }
      return;
  }
}

template <class T, class F>
void with_plain(owned_matrix<T>& m, format f, F&& fn) {
  switch (f) {
    case format::csr: fn(m.csr()); return;
    case format::csc: fn(m.csc()); return;
    case format::coo: fn(m.coo()); return;
  }
}

// op(X) with runtime flags and a scalar, the uniform argument shape used
// throughout the harness.
template <class X>
auto wrap(typename X::scalar_type alpha, bool transpose, bool conjugate, const X& x) {
  return scaled(alpha, transposed_view<X>{transpose, conjugate, x});
}

/// Caller-side output buffers with canaries past the exact lengths.
template <class T>
struct output_store {
  static constexpr std::size_t guard = 8;
  static constexpr I index_canary = -424242;
  static constexpr O offset_canary = -4242424242;

  std::vector<O> offsets;
  std::vector<I> first;
  std::vector<I> second;
  std::vector<T> values;
  std::size_t noff = 0;
  std::size_t nnz = 0;

  static T value_canary() { return T(static_cast<real_t<T>>(-31337.25)); }

  void allocate(std::size_t offsets_len, std::size_t n) {
    noff = offsets_len;
    nnz = n;
    offsets.assign(offsets_len + guard, offset_canary);
    first.assign(n + guard, index_canary);
    second.assign(n + guard, index_canary);
    values.assign(n + guard, value_canary());
  }

  void bind(csr_view<T, I, O>& c, std::int64_t n) {
    allocate(static_cast<std::size_t>(c.nrows()) + 1, static_cast<std::size_t>(n));
    c.update(std::span<T>(values.data(), nnz), std::span<O>(offsets.data(), noff),
             std::span<I>(first.data(), nnz));
  }
  void bind(csc_view<T, I, O>& c, std::int64_t n) {
    allocate(static_cast<std::size_t>(c.ncols()) + 1, static_cast<std::size_t>(n));
    c.update(std::span<T>(values.data(), nnz), std::span<O>(offsets.data(), noff),
             std::span<I>(first.data(), nnz));
  }
  void bind(coo_view<T, I, O>& c, std::int64_t n) {
    allocate(0, static_cast<std::size_t>(n));
    c.update(std::span<T>(values.data(), nnz), std::span<I>(first.data(), nnz),
             std::span<I>(second.data(), nnz));
  }

  bool canaries_intact() const {
    auto same = [](T a, T b) { return std::memcmp(&a, &b, sizeof(T)) == 0; };
    for (std::size_t k = 0; k < guard; ++k) {
      if (!offsets.empty() && offsets[noff + k] != offset_canary) return false;
      if (first[nnz + k] != index_canary || second[nnz + k] != index_canary) return false;
      if (!same(values[nnz + k], value_canary())) return false;
    }
    return true;
  }
};

// Calls fn with an empty output shell of the requested format.
template <class T, class F>
void with_shell(format f, std::int64_t r, std::int64_t c, index_base base, F&& fn) {
  switch (f) {
    case format::csr: {
      csr_view<T, I, O> s(static_cast<I>(r), static_cast<I>(c), base);
      fn(s);
      return;
    }
    case format::csc: {
      csc_view<T, I, O> s(static_cast<I>(r), static_cast<I>(c), base);
      fn(s);
      return;
    }
    case format::coo: {
      coo_view<T, I, O> s(static_cast<I>(r), static_cast<I>(c), base);
      fn(s);
      return;
    }
  }
}

template <class T>
bool same_bits(T a, T b) {
  return std::memcmp(&a, &b, sizeof(T)) == 0;
}

template <class T>
bool same_value(T a, T b) {
  if constexpr (is_complex_v<T>) {
    return same_value(a.real(), b.real()) && same_value(a.imag(), b.imag());
  } else {
    return (std::isnan(a) && std::isnan(b)) || same_bits(a, b);
  }
}

/// Running verdict of one case.
struct tally {
  bool pass = true;
  double slack = 0;
  std::int64_t mismatches = 0;
  std::int64_t checked = 0;
  std::string note;

  void fail(const std::string& why) {
    if (pass) note = why;
    pass = false;
  }
  void bound(const bound_check& c, const std::string& where) {
    ++checked;
    slack = std::max(slack, c.slack);
    if (!c.pass) {
      std::ostringstream os;
      os << where << ": error " << c.error << " > bound " << c.bound;
      fail(os.str());
    }
  }
};

/// Output triples against a reference: pattern positions must match
/// exactly; values are checked against the bound spec_of(k), or bitwise
/// against `expected` when given.
template <class T, class SpecFn>
void compare_sparse(tally& t, const std::vector<triple<T>>& out, std::int64_t nrows,
                    std::int64_t ncols, const reference<T>& ref, SpecFn&& spec_of,
                    const std::vector<T>* expected = nullptr) {
  const auto size = static_cast<std::size_t>(nrows * ncols);
  std::vector<std::uint8_t> seen(size, 0);
  std::vector<T> got(size, T(0));
  for (const auto& e : out) {
    if (e.i < 0 || e.i >= nrows || e.j < 0 || e.j >= ncols) {
      t.fail("output index out of range");
      ++t.mismatches;
      continue;
    }
    const auto k = static_cast<std::size_t>(e.i * ncols + e.j);
    if (seen[k]) {
      t.fail("duplicate output coordinate");
      ++t.mismatches;
    }
    seen[k] = 1;
    got[k] = e.v;
  }
  for (std::size_t k = 0; k < size; ++k) {
    if (seen[k] != ref.pattern[k]) {
      ++t.mismatches;
      t.fail("pattern differs at (" + std::to_string(k / ncols) + ", " +
             std::to_string(k % ncols) + ")");
      continue;
    }
    if (!seen[k]) continue;
    if (expected) {
      ++t.checked;
      if (!same_value(got[k], (*expected)[k])) t.fail("value not bitwise equal");
    } else {
      const auto spec = spec_of(k);
      t.bound(check_error_bound<T>(got[k], ref.value[k], spec, ref.abs_sum[k]),
              "entry " + std::to_string(k));
    }
  }
}

template <class T>
case_record make_record(const std::string& family, std::int64_t index, const tally& t,
                        const std::string& what) {
  case_record r;
  r.family = family;
  r.case_id = family + "/" + scalar_name<T>() + "/" + std::to_string(index);
  r.scalar = scalar_name<T>();
  r.pass = t.pass;
  r.slack = t.slack;
  r.mismatches = t.mismatches;
  r.detail = t.pass ? what : what + "; " + t.note;
  return r;
}

// Dense operand stored in a chosen layout, built from a row-major matrix.
template <class T>
struct dense_buffer {
  std::vector<T> data;
  dense_view<T> view;

  dense_buffer(const dense_matrix<T>& m, layout l, bool as_vector) : data(m.data.size()) {
    for (std::int64_t i = 0; i < m.rows; ++i) {
      for (std::int64_t j = 0; j < m.cols; ++j) {
        const auto k = l == layout::row_major ? i * m.cols + j : j * m.rows + i;
        data[static_cast<std::size_t>(k)] = m(i, j);
      }
    }
    view = as_vector ? dense_view<T>(std::span<T>(data), static_cast<std::size_t>(m.rows))
                     : dense_view<T>(std::span<T>(data), static_cast<std::size_t>(m.rows),
                                     static_cast<std::size_t>(m.cols), l);
  }

  T at(std::int64_t i, std::int64_t j) const { return view(i, j); }
};

// Signature of one family runner. Returns nullopt when integer mode drew
// inputs whose intermediates are not exactly representable.
template <class T>
using family_fn = std::optional<case_record> (*)(std::mt19937_64&, const case_config&,
                                                 std::int64_t);

template <class T>
family_fn<T> find_family(const std::string& name);

// Largest integer below which every binary value is exact.
template <class T>
double exact_limit() {
  return std::ldexp(1.0, std::numeric_limits<real_t<T>>::digits);
}

}  // namespace spblas::conformance::internal
