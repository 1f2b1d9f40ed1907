#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <vector>

#include <spblas/spblas.hpp>
#include <spblas/oracle/corpus.hpp>

#include "support.hpp"

using namespace spblas;
using namespace spblas::oracle;

namespace {

// Caller-side CSR output arrays sized from the state.
struct csr_out {
  std::vector<double> v;
  std::vector<std::int64_t> off;
  std::vector<std::int32_t> col;
  csr_view<double> view;

  csr_out(std::int32_t r, std::int32_t c) : view(r, c) {}

  void bind(std::int64_t nnz) {
    v.assign(nnz, 0);
    off.assign(view.nrows() + 1, 0);
    col.assign(nnz, 0);
    view.update(std::span<double>(v), std::span<std::int64_t>(off), std::span<std::int32_t>(col));
  }
  std::vector<triple<double>> triples() const { return triples_of(view); }
};

template <class A, class B>
std::vector<triple<double>> product(const A& a, const B& b, std::int32_t r, std::int32_t c) {
  sparse_multiply_state_t st;
  csr_out out(r, c);
  sparse_multiply_compute(seq, st, a, b, out.view);
  out.bind(st.get_result_nnz());
  sparse_multiply_fill(seq, st, a, b, out.view);
  return out.triples();
}

bool same(const std::vector<triple<double>>& a, const std::vector<triple<double>>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].i != b[k].i || a[k].j != b[k].j) return false;
    if (std::memcmp(&a[k].v, &b[k].v, sizeof(double)) != 0) return false;
  }
  return true;
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

TEST_CASE("SpGEMM with an identity factor") {
  std::mt19937_64 rng(1);
  auto b = from_triples<double>(6, 9, random_triples<double>(rng, {6, 9, 0.3}));
  auto id = from_triples<double>(6, 6, identity_triples<double>(6));
  CHECK(same(product(id.csr(), b.csr(), 6, 9), b.triples));
  sparse_multiply_state_t st;
  csr_view<double> c(6, 9);
  sparse_multiply_compute(seq, st, id.csr(), b.csc(), c);
  CHECK(state_result_nnz(st) == b.nnz());
}

TEST_CASE("SpGEMM keeps numeric zeros") {
  auto a = from_triples<double>(1, 2, {{0, 0, 1.0}, {0, 1, -1.0}});
  auto b = from_triples<double>(2, 1, {{0, 0, 2.5}, {1, 0, 2.5}});
  const auto c = product(a.csr(), b.csr(), 1, 1);
  REQUIRE(c.size() == 1);
  CHECK(c[0].v == 0.0);
}

TEST_CASE("SpGEMM pattern and values against the oracle") {
  std::mt19937_64 rng(2);
  auto a = from_triples<double>(16, 12, random_triples<double>(rng, {16, 12, 0.2}));
  auto b = from_triples<double>(12, 20, random_triples<double>(rng, {12, 20, 0.2}));
  const auto got = product(a.csr(), b.coo(), 16, 20);
  const auto ma = a.mirror();
  const auto mb = b.mirror();
  const auto pat = oracle_pattern(pattern_kind::product, ma, &mb);
  const auto ref = oracle_gemm(ma, mb, 1.0);
  std::size_t stored = 0;
  for (auto p : pat) stored += p;
  CHECK(got.size() == stored);
  for (const auto& e : got) {
    const auto k = ref.at(e.i, e.j);
    CHECK(pat[k] == 1);
    CHECK(check_error_bound(e.v, ref.value[k], error_bound_spec::for_type<double>(ref.terms[k]),
                            ref.abs_sum[k])
              .pass);
  }
}

TEST_CASE("SpGEMM with D and output arrays of the wrong length") {
  auto a = from_triples<double>(2, 2, identity_triples<double>(2));
  auto d = from_triples<double>(2, 2, {{0, 1, 4.0}});
  sparse_multiply_state_t st;
  csr_out out(2, 2);
  sparse_multiply_compute(seq, st, a.csr(), a.csr(), out.view, scaled(0.5, d.csr()));
  CHECK(st.get_result_nnz() == 3);
  out.bind(2);
  CHECK(category_of([&] {
          sparse_multiply_fill(seq, st, a.csr(), a.csr(), out.view, scaled(0.5, d.csr()));
        }) == error_category::output_length);
  out.bind(3);
  sparse_multiply_fill(seq, st, a.csr(), a.csr(), out.view, scaled(0.5, d.csr()));
  CHECK(out.v == std::vector<double>{1, 2, 1});
  CHECK(validate(out.view).ok());
}

TEST_CASE("SpGEMM shape mismatch") {
  auto a = from_triples<double>(2, 3, {});
  sparse_multiply_state_t st;
  csr_view<double> c(2, 2);
  CHECK(category_of([&] { sparse_multiply_compute(seq, st, a.csr(), a.csr(), c); }) ==
        error_category::shape_mismatch);
}

TEST_CASE("split phases and structure reuse") {
  std::mt19937_64 rng(4);
  auto a = from_triples<double>(10, 10, random_triples<double>(rng, {10, 10, 0.3}));
  sparse_multiply_state_t st;
  csr_out out(10, 10);
  csr_view<double> probe(10, 10);
  CHECK(category_of([&] { sparse_multiply_numeric_compute(seq, st, a.csr(), a.csr(), probe); }) ==
        error_category::phase);
  sparse_multiply_symbolic_compute(seq, st, a.csr(), a.csr(), out.view);
  out.bind(st.get_result_nnz());
  sparse_multiply_symbolic_fill(seq, st, a.csr(), a.csr(), out.view);
  for (int it = 0; it < 3; ++it) {
    for (auto& v : a.csr_vals) v *= -1.5;
    sparse_multiply_numeric_compute(seq, st, a.csr(), a.csr(), out.view);
    sparse_multiply_numeric_fill(seq, st, a.csr(), a.csr(), out.view);
    CHECK(same(out.triples(), product(a.csr(), a.csr(), 10, 10)));
  }
  CHECK(st.analysis_count() == 1);

  auto other = from_triples<double>(10, 10, identity_triples<double>(10));
  CHECK(category_of([&] {
          sparse_multiply_numeric_compute(seq, st, a.csr(), other.csr(), out.view);
        }) == error_category::stale_structure);
}

TEST_CASE("repeated compute with the same structure skips analysis") {
  std::mt19937_64 rng(6);
  auto a = from_triples<double>(12, 12, random_triples<double>(rng, {12, 12, 0.25}));
  sparse_multiply_state_t st;
  csr_out out(12, 12);
  for (int it = 0; it < 4; ++it) {
    sparse_multiply_compute(seq, st, a.csr(), a.csc(), out.view);
    if (it == 0) out.bind(st.get_result_nnz());
    sparse_multiply_fill(seq, st, a.csr(), a.csc(), out.view);
    for (auto& v : a.csr_vals) v += 1;
    for (auto& v : a.csc_vals) v += 1;
  }
  CHECK(st.analysis_count() == 1);
}

TEST_CASE("addition") {
  std::mt19937_64 rng(7);
  auto a = from_triples<double>(24, 24, random_triples<double>(rng, {24, 24, 0.15}));
  auto e = from_triples<double>(24, 24, {});
  add_state_t st;
  csr_out out(24, 24);
  add_compute(seq, st, a.csr(), e.coo(), out.view);
  out.bind(st.get_result_nnz());
  add_fill(seq, st, a.csr(), e.coo(), out.view);
  CHECK(same(out.triples(), a.triples));

  add_compute(seq, st, a.csr(), scaled(-1.0, a.csc()), out.view);
  CHECK(st.get_result_nnz() == a.nnz());
  out.bind(st.get_result_nnz());
  add_fill(seq, st, a.csr(), scaled(-1.0, a.csc()), out.view);
  for (double v : out.v) CHECK(v == 0.0);

  add_compute(seq, st, a.csr(), a.csr(), out.view);
  CHECK(st.get_result_nnz() == a.nnz());
}

TEST_CASE("element-wise multiplication") {
  std::mt19937_64 rng(8);
  auto a = from_triples<double>(10, 10, random_triples<double>(rng, {10, 10, 0.3}));
  std::vector<std::int64_t> off = a.csr_offsets;
  std::vector<std::int32_t> col = a.csr_cols;
  csr_view<double> ones(value_array<double>(iso_value<double>{1.0, a.nnz()}),
                        std::span<std::int64_t>(off), std::span<std::int32_t>(col), 10, 10, a.nnz());
  multiply_elementwise_state_t st;
  csr_out out(10, 10);
  multiply_elementwise_compute(seq, st, a.csr(), ones, out.view);
  out.bind(st.get_result_nnz());
  multiply_elementwise_fill(seq, st, a.csr(), ones, out.view);
  CHECK(same(out.triples(), a.triples));

  auto l = from_triples<double>(2, 2, {{0, 0, 1.0}});
  auto r = from_triples<double>(2, 2, {{1, 1, 1.0}});
  csr_out small(2, 2);
  multiply_elementwise_compute(seq, st, l.csr(), r.csr(), small.view);
  CHECK(st.get_result_nnz() == 0);
}

TEST_CASE("conversion from dense drops zeros of either sign and keeps NaN") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> d{0.0, 5.0, nan, -0.0};
  dense_view<double> dv(std::span<double>(d), 2, 2);
  convert_state_t st;
  coo_view<double> out(2, 2);
  convert_compute(seq, st, dv, out);
  REQUIRE(st.get_result_nnz() == 2);
  std::vector<double> v(2);
  std::vector<std::int32_t> r(2), c(2);
  out.update(std::span<double>(v), std::span<std::int32_t>(r), std::span<std::int32_t>(c));
  convert_fill(seq, st, dv, out);
  CHECK(r == std::vector<std::int32_t>{0, 1});
  CHECK(c == std::vector<std::int32_t>{1, 0});
  CHECK(v[0] == 5.0);
  CHECK(std::isnan(v[1]));
}

TEST_CASE("filter") {
  auto a = from_triples<double>(3, 3, {{0, 0, 1.0}, {1, 2, -2.0}, {2, 1, 3.0}});
  filter_state_t st;
  csr_out out(3, 3);
  auto positive = [](std::int64_t, std::int64_t, double v) { return v > 0; };
  filter_compute(seq, st, a.csr(), out.view, positive);
  out.bind(st.get_result_nnz());
  filter_fill(seq, st, a.csr(), out.view, positive);
  CHECK(out.v == std::vector<double>{1, 3});

  auto all = [](std::int64_t, std::int64_t, double) { return true; };
  filter_compute(seq, st, a.coo(), out.view, all);
  out.bind(st.get_result_nnz());
  filter_fill(seq, st, a.coo(), out.view, all);
  CHECK(same(out.triples(), a.triples));

  // Decisions are recorded at compute: a predicate that changes its mind
  // cannot desynchronize fill.
  int calls = 0;
  auto fickle = [&](std::int64_t, std::int64_t, double) { return ++calls % 2 == 1; };
  filter_compute(seq, st, a.csr(), out.view, fickle);
  out.bind(st.get_result_nnz());
  filter_fill(seq, st, a.csr(), out.view, fickle);
  CHECK(calls == 3);
  CHECK(out.v == std::vector<double>{1, 3});

  std::vector<triple<double>> far;
  for (int i = 10; i < 14; ++i) far.push_back({i, i, 1.0});
  auto big = from_triples<double>(14, 14, far);
  auto corner = [](std::int64_t i, std::int64_t j, double) { return i < 10 && j < 10; };
  csr_out small(14, 14);
  filter_compute(seq, st, big.csr(), small.view, corner);
  CHECK(st.get_result_nnz() == 0);
}

TEST_CASE("transpose") {
  std::mt19937_64 rng(10);
  auto a = from_triples<double>(7, 5, random_triples<double>(rng, {7, 5, 0.4}));
  transpose_state_t st;
  csr_out t(5, 7);
  transpose_compute(seq, st, a.csr(), t.view);
  CHECK(st.get_result_nnz() == a.nnz());
  t.bind(st.get_result_nnz());
  transpose_fill(seq, st, a.csr(), t.view);

  transpose_state_t st2;
  csr_out back(7, 5);
  transpose_compute(seq, st2, t.view, back.view);
  back.bind(st2.get_result_nnz());
  transpose_fill(seq, st2, t.view, back.view);
  CHECK(same(back.triples(), a.triples));
}

TEST_CASE("staged families return all memory") {
  testing::counting_resource res;
  std::mt19937_64 rng(12);
  auto a = from_triples<double>(15, 15, random_triples<double>(rng, {15, 15, 0.3}));
  {
    auto h = make_handle(a.coo(), &res);
    sparse_multiply_state_t st(&res);
    csr_out out(15, 15);
    sparse_multiply_inspect(seq, st, h, transposed(h), out.view);
    sparse_multiply_compute(par(2), st, h, transposed(h), out.view);
    out.bind(st.get_result_nnz());
    sparse_multiply_fill(par(2), st, h, transposed(h), out.view);
    CHECK(res.allocations() > 0);
  }
  CHECK(res.balance() == 0);
}
