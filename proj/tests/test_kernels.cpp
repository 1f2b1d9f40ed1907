#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <limits>
#include <random>
#include <vector>

#include <spblas/spblas.hpp>
#include <spblas/oracle/corpus.hpp>

using namespace spblas;
using namespace spblas::oracle;

namespace {

template <class T>
dense_view<T> vec(std::vector<T>& v) {
  return dense_view<T>(std::span<T>(v), v.size());
}

template <class F>
error_category category_of(F&& f) {
  try {
    f();
  } catch (const sparse_error& e) {
    return e.category();
  }
  FAIL("no error raised");
  return error_category::io;
}

}  // namespace

TEST_CASE("scale") {
  auto m = from_triples<double>(1, 3, {{0, 0, 1.0}, {0, 1, -3.0}, {0, 2, 0.5}});
  auto a = m.csr();
  scale_state_t st;
  scale(seq, st, 1.0, a);
  CHECK(m.csr_vals == std::vector<double>{1, -3, 0.5});
  scale(seq, st, 2.0, a);
  CHECK(m.csr_vals == std::vector<double>{2, -6, 1});
  scale(seq, st, 0.0, a);
  CHECK(m.csr_vals == std::vector<double>{0, 0, 0});
  CHECK(validate(a).ok());
  CHECK(a.nnz() == 3);
}

TEST_CASE("infinity norm") {
  auto id = from_triples<double>(5, 5, identity_triples<double>(5));
  matrix_inf_norm_state_t st;
  CHECK(matrix_inf_norm(seq, st, id.csr()) == 1.0);
  auto m = from_triples<double>(2, 2, {{0, 0, 1.0}, {0, 1, -2.0}, {1, 1, 3.0}});
  CHECK(matrix_inf_norm(seq, st, m.csr()) == 3.0);
  CHECK(matrix_inf_norm(seq, st, m.csc()) == 3.0);
  CHECK(matrix_inf_norm(seq, st, transposed(m.coo())) == 5.0);
  auto e = from_triples<double>(3, 3, {});
  CHECK(matrix_inf_norm(seq, st, e.csr()) == 0.0);
  auto n = from_triples<double>(2, 2, {{0, 0, std::nan("")}, {1, 1, 1.0}});
  CHECK(std::isnan(matrix_inf_norm(seq, st, n.csr())));
}

TEST_CASE("Frobenius norm") {
  auto id = from_triples<double>(4, 4, identity_triples<double>(4));
  matrix_frob_norm_state_t st;
  CHECK(matrix_frob_norm(st, id.csr()) == 2.0);
  auto m = from_triples<float>(1, 2, {{0, 0, 3.0f}, {0, 1, 4.0f}});
  CHECK(matrix_frob_norm(detpar(4), st, m.coo()) == 5.0f);

  std::mt19937_64 rng(3);
  auto r = from_triples<double>(16, 16, random_triples<double>(rng, {16, 16, 0.2}));
  const auto [exact, info] = oracle_frob_norm(r.mirror(), 1.0);
  const double got = matrix_frob_norm(seq, st, r.csr());
  const double eps = std::numeric_limits<double>::epsilon() / 2;
  CHECK(std::abs(got - to_double(exact)) <= 8 * eps * got);
  (void)info;
}

TEST_CASE("SpMV identity and transposes") {
  auto id = from_triples<double>(4, 4, identity_triples<double>(4));
  std::vector<double> x{1.5, -2.0, 1e-300, 7.0}, y(4, 9.0);
  multiply_state_t st;
  multiply(seq, st, id.csr(), vec(x), vec(y));
  CHECK(y == x);
  std::fill(y.begin(), y.end(), 0.0);
  multiply(seq, st, transposed(id.csc()), vec(x), vec(y));
  CHECK(y == x);
}

TEST_CASE("SpMV with scaled operands and in-place beta") {
  auto m = from_triples<double>(2, 3, {{0, 0, 1.0}, {0, 2, 2.0}, {1, 1, -1.0}});
  std::vector<double> x{1, 2, 3}, y{10, 20};
  multiply_state_t st;
  // y = 2 A x + 0.5 y
  multiply(seq, st, scaled(2.0, m.csr()), vec(x), scaled(0.5, vec(y)), vec(y));
  CHECK(y == std::vector<double>{2 * 7 + 5, 2 * -2 + 10});
  // Scaling composes.
  std::vector<double> y1(2), y2(2);
  multiply(seq, st, scaled(2.0, scaled(3.0, m.coo())), vec(x), vec(y1));
  multiply(seq, st, scaled(6.0, m.coo()), vec(x), vec(y2));
  CHECK(y1 == y2);
}

TEST_CASE("SpMV matches the materialized transpose") {
  std::mt19937_64 rng(11);
  auto m = from_triples<double>(20, 13, random_triples<double>(rng, {20, 13, 0.3}));
  csc_view<double> t(13, 20);
  transpose_state_t ts;
  transpose_compute(seq, ts, m.csr(), t);
  std::vector<double> tv(ts.get_result_nnz());
  std::vector<std::int64_t> to(21);
  std::vector<std::int32_t> ti(ts.get_result_nnz());
  t.update(std::span<double>(tv), std::span<std::int64_t>(to), std::span<std::int32_t>(ti));
  transpose_fill(seq, ts, m.csr(), t);

  std::vector<double> x(20), y1(13), y2(13);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.25 * static_cast<double>(i) - 1;
  multiply_state_t st;
  multiply(seq, st, transposed(m.csr()), vec(x), vec(y1));
  multiply(seq, st, t, vec(x), vec(y2));
  CHECK(y1 == y2);
}

TEST_CASE("SpMM against the oracle") {
  std::mt19937_64 rng(5);
  auto m = from_triples<double>(32, 32, random_triples<double>(rng, {32, 32, 0.2}));
  random_params p;
  auto x = random_dense<double>(rng, 32, 3, p);
  std::vector<double> y(32 * 3);
  multiply_state_t st;
  multiply(par(2), st, m.csr(), dense_view<double>(std::span<double>(x.data), 32, 3),
           dense_view<double>(std::span<double>(y), 32, 3));
  const auto ref = oracle_spmv(m.mirror(), 1.0, x);
  for (std::int64_t i = 0; i < 32; ++i) {
    for (std::int64_t j = 0; j < 3; ++j) {
      const auto k = ref.at(i, j);
      const auto c = check_error_bound(y[k], ref.value[k],
                                       error_bound_spec::for_type<double>(ref.terms[k]),
                                       ref.abs_sum[k]);
      CHECK(c.pass);
    }
  }
}

TEST_CASE("multiply errors") {
  auto m = from_triples<double>(3, 3, identity_triples<double>(3));
  std::vector<double> x(3, 1.0), y(2), z(3);
  multiply_state_t st;
  CHECK(category_of([&] { multiply(seq, st, m.csr(), vec(x), vec(y)); }) ==
        error_category::shape_mismatch);
  CHECK(category_of([&] { multiply(seq, st, m.csr(), vec(x), vec(x)); }) == error_category::aliasing);
  multiply(seq, st, m.csr(), vec(x), vec(z));
  CHECK(z == x);
}

TEST_CASE("alpha = 0 never reads A or x") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto m = from_triples<double>(2, 2, {{0, 0, nan}, {1, 0, nan}, {1, 1, nan}});
  std::vector<double> x{nan, nan}, y{1, 2};
  multiply_state_t st;
  multiply(seq, st, scaled(0.0, m.csr()), vec(x), scaled(1.0, vec(y)), vec(y));
  CHECK(y == std::vector<double>{1, 2});
  std::vector<double> w{nan, nan};
  multiply(seq, st, scaled(0.0, m.csr()), vec(x), scaled(0.0, vec(w)), vec(w));
  CHECK(w == std::vector<double>{0, 0});
}

TEST_CASE("triangular solve") {
  triangular_solve_state_t st;
  {
    auto t = from_triples<double>(3, 3, {{0, 0, 2.0}, {1, 1, 2.0}, {2, 2, 2.0}});
    std::vector<double> b{1, -3, 5}, x(3);
    triangular_solve(seq, st, t.csr(), vec(b), vec(x));
    CHECK(x == std::vector<double>{0.5, -1.5, 2.5});
  }
  {
    auto t = from_triples<double>(2, 2, {{0, 0, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}});
    std::vector<double> b{1, 2}, x(2);
    auto h = make_handle(t.csc());
    triangular_solve_inspect(detpar(2), st, h, vec(b), vec(x));
    triangular_solve(detpar(2), st, h, vec(b), vec(x));
    CHECK(x == std::vector<double>{1, 1});
    // Upper orientation through a transpose.
    triangular_solve(seq, st, transposed(t.csr()), vec(b), vec(x));
    CHECK(x == std::vector<double>{-1, 2});
  }
  {
    // Integer unit-lower system, n = 16: exact against the dense oracle.
    std::mt19937_64 rng(9);
    std::vector<triple<double>> tr;
    std::uniform_int_distribution<int> v(-1, 1);
    for (int i = 0; i < 16; ++i) {
      for (int j = 0; j < i; ++j) {
        if (rng() % 4 == 0) tr.push_back({i, j, static_cast<double>(v(rng))});
      }
      tr.push_back({i, i, 1.0});
    }
    auto t = from_triples<double>(16, 16, tr);
    std::vector<double> b(16), x(16);
    for (int i = 0; i < 16; ++i) b[i] = i % 5 - 2;
    triangular_solve(seq, st, t.csr(), vec(b), vec(x));
    const auto ref = oracle_trisolve(t.mirror(), b);
    REQUIRE(ref.has_value());
    for (int i = 0; i < 16; ++i) CHECK(x[i] == to_double((*ref)[i]));
  }
}

TEST_CASE("triangular solve errors") {
  triangular_solve_state_t st;
  std::vector<double> b{1, 1}, x(2);
  auto missing = from_triples<double>(2, 2, {{0, 0, 1.0}, {1, 0, 1.0}});
  CHECK(category_of([&] { triangular_solve(seq, st, missing.csr(), vec(b), vec(x)); }) ==
        error_category::singular_structure);
  auto zero = from_triples<double>(2, 2, {{0, 0, 1.0}, {1, 1, 0.0}});
  CHECK(category_of([&] { triangular_solve(seq, st, zero.csr(), vec(b), vec(x)); }) ==
        error_category::numeric_singularity);
  auto full = from_triples<double>(2, 2, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}});
  CHECK(category_of([&] { triangular_solve(seq, st, full.csr(), vec(b), vec(x)); }) ==
        error_category::pattern);
  CHECK(category_of([&] { triangular_solve(seq, st, zero.csr(), vec(b), vec(b)); }) ==
        error_category::aliasing);
}

TEST_CASE("SDDMM") {
  std::vector<double> eye{1, 0, 0, 0, 1, 0, 0, 0, 1};
  dense_view<double> x(std::span<double>(eye), 3, 3);
  auto c = from_triples<double>(3, 3, {{0, 0, 5.0}, {1, 1, 5.0}, {2, 2, 5.0}});
  sampled_multiply_state_t st;
  sampled_multiply(seq, st, x, x, c.csr());
  CHECK(c.csr_vals == std::vector<double>{1, 1, 1});

  auto empty = from_triples<double>(3, 3, {});
  sampled_multiply(seq, st, x, x, empty.coo());

  std::mt19937_64 rng(21);
  random_params p;
  auto xm = random_dense<double>(rng, 8, 4, p);
  auto ym = random_dense<double>(rng, 4, 8, p);
  auto mask = from_triples<double>(8, 8, random_triples<double>(rng, {8, 8, 0.25}));
  const auto ref = oracle_sddmm(xm, ym, mask.mirror(), 1.0);
  sampled_multiply(seq, st, dense_view<double>(std::span<double>(xm.data), 8, 4),
                   dense_view<double>(std::span<double>(ym.data), 4, 8), mask.csr());
  for (const auto& e : triples_of(mask.csr())) {
    const auto k = ref.at(e.i, e.j);
    CHECK(check_error_bound(e.v, ref.value[k], error_bound_spec::for_type<double>(4), ref.abs_sum[k])
              .pass);
  }

  std::vector<std::int64_t> off{0, 1, 2, 3};
  std::vector<std::int32_t> idx{0, 1, 2};
  csr_view<double> iso(value_array<double>(iso_value<double>{1.0, 3}),
                       std::span<std::int64_t>(off), std::span<std::int32_t>(idx), 3, 3, 3);
  CHECK(category_of([&] { sampled_multiply(seq, st, x, x, iso); }) ==
        error_category::read_only_values);
}

TEST_CASE("complex conjugate transpose") {
  using C = std::complex<double>;
  auto m = from_triples<C>(2, 2, {{0, 1, C(1, 2)}, {1, 0, C(0, -1)}});
  std::vector<C> x{C(1, 0), C(0, 1)}, y(2);
  multiply_state_t st;
  multiply(seq, st, transposed(m.csr(), true), vec(x), vec(y));
  // A^H = [[0, conj(-i)], [conj(1+2i), 0]] = [[0, i], [1-2i, 0]]
  CHECK(y[0] == C(0, 1) * C(0, 1));
  CHECK(y[1] == C(1, -2));
}

TEST_CASE("inspect is semantically neutral and idempotent") {
  std::mt19937_64 rng(13);
  auto m = from_triples<double>(30, 30, random_triples<double>(rng, {30, 30, 0.2}));
  std::vector<double> x(30, 0.5), y1(30), y2(30);
  auto h = make_handle(m.coo());
  multiply_state_t st;
  multiply_inspect(seq, st, h, vec(x), vec(y1));
  multiply_inspect(seq, st, h, vec(x), vec(y1));
  CHECK(st.current_phase() == phase::inspected);
  multiply(seq, st, h, vec(x), vec(y1));
  multiply_state_t plain;
  multiply(seq, plain, m.coo(), vec(x), vec(y2));
  CHECK(std::memcmp(y1.data(), y2.data(), y1.size() * sizeof(double)) == 0);
}
