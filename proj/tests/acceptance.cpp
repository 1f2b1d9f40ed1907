// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <spblas/conformance.hpp>
#include <spblas/io.hpp>
#include <spblas/spblas.hpp>

#include "conformance_internal.hpp"
#include "support.hpp"

using namespace spblas;
using namespace spblas::oracle;
using spblas::conformance::internal::output_store;
using spblas::conformance::internal::with_plain;
using spblas::conformance::internal::with_shell;
using spblas::conformance::internal::with_sparse;
using spblas::testing::counting_resource;
namespace sc = spblas::conformance;

using I = std::int32_t;
using O = std::int64_t;

namespace {

int failures = 0;

void verdict(const std::string& name, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string first_failure(const sc::report& r) {
  for (const auto& c : r.records) {
    if (!c.pass) return c.case_id + " " + c.detail;
  }
  return {};
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

template <class T>
bool same_triples(const std::vector<triple<T>>& a, const std::vector<triple<T>>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].i != b[k].i || a[k].j != b[k].j) return false;
    if (std::memcmp(&a[k].v, &b[k].v, sizeof(T)) != 0) return false;
  }
  return true;
}

template <class F>
bool raises(error_category want, F&& f) {
  try {
    f();
  } catch (const sparse_error& e) {
    return e.category() == want;
  } catch (...) {
    return false;
  }
  return false;
}

template <class T>
void append_bytes(std::string& s, const T& v) {
  s.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void append_bytes(std::string& s, const std::vector<T>& v) {
  for (const auto& x : v) append_bytes(s, x);
}

template <class T>
void append_bytes(std::string& s, const std::vector<triple<T>>& v) {
  for (const auto& e : v) {
    append_bytes(s, e.i);
    append_bytes(s, e.j);
    append_bytes(s, e.v);
  }
}

owned_matrix<double> random_matrix(std::mt19937_64& rng, std::int64_t r, std::int64_t c,
                                   double density, index_base base = index_base::zero) {
  random_params p{r, c, density};
  p.explicit_zero_fraction = 0.05;
  return from_triples<double>(r, c, random_triples<double>(rng, p), base);
}

// Lower-triangular, diagonally dominant.
template <class T>
owned_matrix<T> lower_system(std::mt19937_64& rng, std::int64_t n, double density) {
  std::vector<triple<T>> t;
  random_params p;
  std::uniform_real_distribution<double> u(0, 1);
  for (std::int64_t i = 0; i < n; ++i) {
    double sum = 0;
    for (std::int64_t j = 0; j < i; ++j) {
      if (u(rng) >= density) continue;
      const T v = random_value<T>(rng, p);
      sum += std::abs(static_cast<double>(v));
      t.push_back({i, j, v});
    }
    t.push_back({i, i, static_cast<T>(1 + sum)});
  }
  return from_triples<T>(n, n, t);
}

// ---------------------------------------------------------------------------
// Staged protocol

using shell_t = csr_view<double, I, O>;

template <class State, class Compute, class Fill>
std::vector<triple<double>> staged_run(State& st, std::int64_t r, std::int64_t c,
                                       output_store<double>& store, Compute&& compute,
                                       Fill&& fill) {
  shell_t shell(static_cast<I>(r), static_cast<I>(c));
  compute(st, shell);
  store.bind(shell, st.get_result_nnz());
  fill(st, shell);
  return triples_of(shell);
}

template <class State, class Compute, class Fill>
std::vector<triple<double>> from_scratch(std::int64_t r, std::int64_t c, Compute&& compute,
                                         Fill&& fill) {
  State st;
  output_store<double> store;
  return staged_run(st, r, c, store, compute, fill);
}

// Illegal orderings common to every staged family, then a reset and a
// legal run that must equal a from-scratch run.
template <class State, class Compute, class Fill>
std::string ordering_checks(const std::string& family, std::int64_t r, std::int64_t c,
                            Compute&& compute, Fill&& fill) {
  State st;
  shell_t shell(static_cast<I>(r), static_cast<I>(c));
  if (!raises(error_category::phase, [&] { (void)st.get_result_nnz(); })) {
    return family + ": result_nnz before compute did not raise a phase error";
  }
  if (!raises(error_category::phase, [&] { fill(st, shell); })) {
    return family + ": fill before compute did not raise a phase error";
  }
  if (st.current_phase() != phase::created) return family + ": failed call changed the phase";

  const auto expected = from_scratch<State>(r, c, compute, fill);
  output_store<double> store;
  auto got = staged_run(st, r, c, store, compute, fill);
  if (!same_triples(got, expected)) return family + ": run after failed calls differs";
  // A second fill needs a new compute.
  if (!raises(error_category::phase, [&] { fill(st, shell); })) {
    return family + ": second fill without compute did not raise a phase error";
  }
  st.reset();
  if (!raises(error_category::phase, [&] { (void)st.get_result_nnz(); })) {
    return family + ": result_nnz after reset did not raise a phase error";
  }
  got = staged_run(st, r, c, store, compute, fill);
  if (!same_triples(got, expected)) return family + ": run after reset differs";
  if (!store.canaries_intact()) return family + ": canary overwritten";
  return {};
}

// Product-specific checks: split-phase orderings, stale structure and the
// three usage patterns.
std::string spgemm_protocol(std::mt19937_64& rng) {
  const std::int64_t r = 30, k = 25, c = 20;
  auto ma = random_matrix(rng, r, k, 0.15);
  auto mb = random_matrix(rng, k, c, 0.15, index_base::one);
  auto md = random_matrix(rng, r, c, 0.1);
  const double beta = 0.5;
  auto a = ma.csr();
  auto b = mb.csc();
  auto d = md.coo();

  auto compute = [&](auto& st, auto& shell) { sparse_multiply_compute(seq, st, a, b, shell, scaled(beta, d)); };
  auto fill = [&](auto& st, auto& shell) { sparse_multiply_fill(seq, st, a, b, shell, scaled(beta, d)); };
  auto sym_compute = [&](auto& st, auto& shell) {
    sparse_multiply_symbolic_compute(seq, st, a, b, shell, scaled(beta, d));
  };
  auto sym_fill = [&](auto& st, auto& shell) {
    sparse_multiply_symbolic_fill(seq, st, a, b, shell, scaled(beta, d));
  };
  auto num_compute = [&](auto& st, auto& shell) {
    sparse_multiply_numeric_compute(seq, st, a, b, shell, scaled(beta, d));
  };
  auto num_fill = [&](auto& st, auto& shell) {
    sparse_multiply_numeric_fill(seq, st, a, b, shell, scaled(beta, d));
  };
  auto scratch = [&] { return from_scratch<sparse_multiply_state_t>(r, c, compute, fill); };

  {
    sparse_multiply_state_t st;
    shell_t shell(static_cast<I>(r), static_cast<I>(c));
    if (!raises(error_category::phase, [&] { num_compute(st, shell); })) {
      return "numeric_compute before symbolic did not raise a phase error";
    }
    if (!raises(error_category::phase, [&] { sym_fill(st, shell); })) {
      return "symbolic_fill before symbolic_compute did not raise a phase error";
    }
    sym_compute(st, shell);
    if (!raises(error_category::phase, [&] { num_compute(st, shell); })) {
      return "numeric_compute before symbolic_fill did not raise a phase error";
    }
    if (!raises(error_category::phase, [&] { fill(st, shell); })) {
      return "fill after symbolic_compute did not raise a phase error";
    }
    if (!raises(error_category::phase, [&] { num_fill(st, shell); })) {
      return "numeric_fill before numeric_compute did not raise a phase error";
    }
    if (st.current_phase() != phase::symbolic_computed) return "failed call changed the phase";
    st.reset();
    output_store<double> store;
    shell_t out(static_cast<I>(r), static_cast<I>(c));
    sym_compute(st, out);
    store.bind(out, st.get_result_nnz());
    sym_fill(st, out);
    num_compute(st, out);
    num_fill(st, out);
    if (!same_triples(triples_of(out), scratch())) return "split run after reset differs";
  }

  // Pattern 1: single use with the optional inspect.
  {
    sparse_multiply_state_t st;
    output_store<double> store;
    shell_t out(static_cast<I>(r), static_cast<I>(c));
    sparse_multiply_inspect(seq, st, a, b, out, scaled(beta, d));
    compute(st, out);
    store.bind(out, st.get_result_nnz());
    fill(st, out);
    if (!same_triples(triples_of(out), scratch())) return "usage pattern 1 differs from scratch";
  }

  std::uniform_real_distribution<double> u(-2, 2);
  auto perturb = [&] {
    for (auto& v : ma.csr_vals) v = u(rng);
    for (auto& v : mb.csc_vals) v = u(rng);
    for (auto& v : md.coo_vals) v = u(rng);
  };

  // Pattern 2: compute/fill in a loop over value-only changes; arrays
  // allocated once.
  {
    sparse_multiply_state_t st;
    output_store<double> store;
    shell_t out(static_cast<I>(r), static_cast<I>(c));
    sparse_multiply_inspect(seq, st, a, b, out, scaled(beta, d));
    for (int it = 0; it < 5; ++it) {
      if (it > 0) perturb();
      compute(st, out);
      if (it == 0) store.bind(out, st.get_result_nnz());
      fill(st, out);
      if (!same_triples(triples_of(out), scratch())) {
        return "usage pattern 2 differs from scratch at iteration " + std::to_string(it);
      }
    }
    if (st.analysis_count() != 1) {
      return "usage pattern 2 repeated the structural analysis (" +
             std::to_string(st.analysis_count()) + " analyses)";
    }
    if (!store.canaries_intact()) return "usage pattern 2 overwrote a canary";
  }

  // Pattern 3: symbolic once, numeric in the loop.
  {
    sparse_multiply_state_t st;
    output_store<double> store;
    shell_t out(static_cast<I>(r), static_cast<I>(c));
    sparse_multiply_inspect(seq, st, a, b, out, scaled(beta, d));
    sym_compute(st, out);
    store.bind(out, st.get_result_nnz());
    sym_fill(st, out);
    for (int it = 0; it < 5; ++it) {
      perturb();
      num_compute(st, out);
      num_fill(st, out);
      if (!same_triples(triples_of(out), scratch())) {
        return "usage pattern 3 differs from scratch at iteration " + std::to_string(it);
      }
    }
    if (!store.canaries_intact()) return "usage pattern 3 overwrote a canary";

    // A structural change between the symbolic and numeric phases.
    auto mb2 = random_matrix(rng, k, c, 0.3);
    auto b2 = mb2.csc();
    if (!raises(error_category::stale_structure, [&] {
          sparse_multiply_numeric_compute(seq, st, a, b2, out, scaled(beta, d));
        })) {
      return "structure change before numeric_compute did not raise stale_structure";
    }
  }
  return {};
}

void staged_protocol() {
  std::mt19937_64 rng(1234);
  std::vector<std::string> problems;
  auto note = [&](const std::string& s) {
    if (!s.empty()) problems.push_back(s);
  };

  note(spgemm_protocol(rng));

  const std::int64_t r = 28, c = 22;
  auto ma = random_matrix(rng, r, c, 0.2);
  auto mb = random_matrix(rng, r, c, 0.2, index_base::one);
  auto a = ma.csr();
  auto b = mb.coo();
  auto ac = ma.csc();
  auto pred = [](std::int64_t i, std::int64_t j, double v) { return std::abs(v) > 0.5 || i == j; };

  note(ordering_checks<add_state_t>(
      "add", r, c, [&](auto& st, auto& sh) { add_compute(seq, st, a, b, sh); },
      [&](auto& st, auto& sh) { add_fill(seq, st, a, b, sh); }));
  note(ordering_checks<multiply_elementwise_state_t>(
      "elementwise", r, c, [&](auto& st, auto& sh) { multiply_elementwise_compute(seq, st, a, b, sh); },
      [&](auto& st, auto& sh) { multiply_elementwise_fill(seq, st, a, b, sh); }));
  note(ordering_checks<convert_state_t>(
      "convert", r, c, [&](auto& st, auto& sh) { convert_compute(seq, st, ac, sh); },
      [&](auto& st, auto& sh) { convert_fill(seq, st, ac, sh); }));
  note(ordering_checks<filter_state_t>(
      "filter", r, c, [&](auto& st, auto& sh) { filter_compute(seq, st, a, sh, pred); },
      [&](auto& st, auto& sh) { filter_fill(seq, st, a, sh, pred); }));
  note(ordering_checks<transpose_state_t>(
      "transpose", c, r, [&](auto& st, auto& sh) { transpose_compute(seq, st, a, sh); },
      [&](auto& st, auto& sh) { transpose_fill(seq, st, a, sh); }));
  {
    auto mk = random_matrix(rng, c, r, 0.2);
    auto bk = mk.csr();
    note(ordering_checks<sparse_multiply_state_t>(
        "spgemm", r, r, [&](auto& st, auto& sh) { sparse_multiply_compute(seq, st, a, bk, sh); },
        [&](auto& st, auto& sh) { sparse_multiply_fill(seq, st, a, bk, sh); }));
  }

  verdict("staged_protocol", problems.empty(),
          problems.empty() ? "6 staged families: illegal orderings raise phase errors, state "
                             "reusable after reset; usage patterns 1-3 bitwise equal to scratch"
                           : problems.front());
}

// ---------------------------------------------------------------------------
// Resource accounting

std::string resource_checks(std::string& summary) {
  std::mt19937_64 rng(99);
  std::int64_t cases = 0;
  std::int64_t total_allocations = 0;
  std::string problem;

  auto check = [&](const std::string& what, auto&& body) {
    counting_resource res;
    bool canaries = true;
    try {
      body(res, canaries);
    } catch (const std::exception& e) {
      if (problem.empty()) problem = what + ": " + e.what();
    }
    ++cases;
    total_allocations += res.allocations();
    if (problem.empty() && res.balance() != 0) {
      problem = what + ": balance " + std::to_string(res.balance());
    }
    if (problem.empty() && !canaries) problem = what + ": fill wrote past result_nnz";
  };

  for (int f = 0; f < 3; ++f) {
    const auto fa = static_cast<format>(f);
    const std::int64_t n = 35;
    auto ma = random_matrix(rng, n, n, 0.15);
    auto mb = random_matrix(rng, n, n, 0.15, index_base::one);
    auto tri = lower_system<double>(rng, n, 0.2);
    std::vector<double> xv(n, 1.5), yv(n, 0.0), bv(n, 2.0), sol(n, 0.0);
    dense_view<double> x(std::span<double>(xv), n), y(std::span<double>(yv), n);
    dense_view<double> rhs(std::span<double>(bv), n), xs(std::span<double>(sol), n);
    std::vector<double> xd(n * 4, 0.25), yd(4 * n, -0.5);
    dense_view<double> xm(std::span<double>(xd), n, 4), ym(std::span<double>(yd), 4, n);
    const std::string tag = std::string("format ") + std::to_string(f) + " ";

    with_plain(ma, fa, [&](const auto& av) {
      check(tag + "single-stage", [&](counting_resource& res, bool&) {
        auto h = make_handle(av, &res);
        {
          matrix_inf_norm_state_t s1(&res);
          matrix_inf_norm_inspect(seq, s1, h);
          (void)matrix_inf_norm(par(2), s1, h);
          matrix_frob_norm_state_t s2(&res);
          matrix_frob_norm_inspect(seq, s2, h);
          (void)matrix_frob_norm(detpar(2), s2, h);
          multiply_state_t s3(&res);
          multiply_inspect(seq, s3, h, x, y);
          multiply(par(2), s3, h, x, y);
          multiply(seq, s3, transposed(h), x, y);
          scale_state_t s4(&res);
          scale_inspect(seq, s4, h);
          scale(seq, s4, 1.0, h);
        }
      });
      check(tag + "sddmm", [&](counting_resource& res, bool&) {
        auto h = make_handle(av, &res);
        sampled_multiply_state_t s(&res);
        sampled_multiply_inspect(seq, s, xm, ym, h);
        sampled_multiply(par(2), s, xm, ym, h);
      });
    });
    with_plain(tri, fa, [&](const auto& tv) {
      check(tag + "trisolve", [&](counting_resource& res, bool&) {
        auto h = make_handle(tv, &res);
        triangular_solve_state_t s(&res);
        triangular_solve_inspect(seq, s, h, rhs, xs);
        triangular_solve(par(2), s, h, rhs, xs);
        triangular_solve(seq, s, tv, rhs, xs);
      });
    });

    // Every staged family into every output format, with handles.
    for (int g = 0; g < 3; ++g) {
      const auto fc = static_cast<format>(g);
      auto staged = [&](const std::string& what, auto&& run) {
        check(tag + what, [&](counting_resource& res, bool& canaries) {
          with_plain(ma, fa, [&](const auto& av) {
            with_plain(mb, fa, [&](const auto& bv2) {
              auto ha = make_handle(av, &res);
              auto hb = make_handle(bv2, &res);
              with_shell<double>(fc, n, n, index_base::zero, [&](auto& shell) {
                output_store<double> store;
                run(res, ha, hb, shell, store);
                canaries = canaries && store.canaries_intact();
              });
            });
          });
        });
      };
      auto pred = [](std::int64_t, std::int64_t, double v) { return v > 0; };
      staged("spgemm", [&](auto& res, auto& ha, auto& hb, auto& shell, auto& store) {
        sparse_multiply_state_t s(&res);
        sparse_multiply_inspect(seq, s, ha, hb, shell);
        sparse_multiply_compute(par(2), s, ha, hb, shell);
        store.bind(shell, s.get_result_nnz());
        sparse_multiply_fill(par(2), s, ha, hb, shell);
        s.reset();
        sparse_multiply_symbolic_compute(seq, s, ha, transposed(hb), shell, hb);
        store.bind(shell, s.get_result_nnz());
        sparse_multiply_symbolic_fill(seq, s, ha, transposed(hb), shell, hb);
        sparse_multiply_numeric_compute(seq, s, ha, transposed(hb), shell, hb);
        sparse_multiply_numeric_fill(seq, s, ha, transposed(hb), shell, hb);
      });
      staged("add", [&](auto& res, auto& ha, auto& hb, auto& shell, auto& store) {
        add_state_t s(&res);
        add_inspect(seq, s, ha, hb, shell);
        add_compute(par(2), s, ha, hb, shell);
        store.bind(shell, s.get_result_nnz());
        add_fill(par(2), s, ha, hb, shell);
      });
      staged("elementwise", [&](auto& res, auto& ha, auto& hb, auto& shell, auto& store) {
        multiply_elementwise_state_t s(&res);
        multiply_elementwise_inspect(seq, s, ha, hb, shell);
        multiply_elementwise_compute(seq, s, ha, hb, shell);
        store.bind(shell, s.get_result_nnz());
        multiply_elementwise_fill(seq, s, ha, hb, shell);
      });
      staged("convert", [&](auto& res, auto& ha, auto&, auto& shell, auto& store) {
        convert_state_t s(&res);
        convert_inspect(seq, s, ha, shell);
        convert_compute(seq, s, ha, shell);
        store.bind(shell, s.get_result_nnz());
        convert_fill(seq, s, ha, shell);
      });
      staged("filter", [&](auto& res, auto& ha, auto&, auto& shell, auto& store) {
        filter_state_t s(&res);
        filter_compute(seq, s, ha, shell, pred);
        store.bind(shell, s.get_result_nnz());
        filter_fill(seq, s, ha, shell, pred);
      });
      staged("transpose", [&](auto& res, auto& ha, auto&, auto& shell, auto& store) {
        transpose_state_t s(&res);
        transpose_compute(seq, s, ha, shell);
        store.bind(shell, s.get_result_nnz());
        transpose_fill(seq, s, ha, shell);
      });
    }
  }
  if (problem.empty() && total_allocations == 0) problem = "nothing was allocated through the resource";
  if (!problem.empty()) return problem;
  summary = std::to_string(cases) + " cases, " + std::to_string(total_allocations) +
            " allocations observed";
  return {};
}

// ---------------------------------------------------------------------------
// Round trips

template <class T, class Src, class Dst>
std::vector<triple<T>> convert_into(const Src& src, Dst shell, output_store<T>& store) {
  convert_state_t st;
  convert_compute(seq, st, src, shell);
  store.bind(shell, st.get_result_nnz());
  convert_fill(seq, st, src, shell);
  return canonical(triples_of(shell));
}

template <class T>
std::string round_trip_corpus(int count) {
  for (int k = 0; k < count; ++k) {
    std::string name;
    auto m = corpus_matrix<T>(k, 4242, &name);
    const I r = m.nrows, c = m.ncols;
    const auto base = m.base;
    output_store<T> s1, s2, s3;
    const auto csc = convert_into<T>(m.csr(), csc_view<T, I, O>(r, c, base), s1);
    if (!same_triples(csc, m.triples)) return name + ": CSR -> CSC differs";
    csc_view<T, I, O> csc_v(std::span<T>(s1.values.data(), s1.nnz), std::span<O>(s1.offsets.data(), s1.noff),
                            std::span<I>(s1.first.data(), s1.nnz), r, c, static_cast<O>(s1.nnz), base);
    if (!validate(csc_v).ok()) return name + ": converted CSC is not canonical";
    const auto coo = convert_into<T>(csc_v, coo_view<T, I, O>(r, c, base), s2);
    if (!same_triples(coo, m.triples)) return name + ": CSC -> COO differs";
    coo_view<T, I, O> coo_v(std::span<T>(s2.values.data(), s2.nnz), std::span<I>(s2.first.data(), s2.nnz),
                            std::span<I>(s2.second.data(), s2.nnz), r, c, static_cast<O>(s2.nnz), base);
    if (!validate(coo_v).ok()) return name + ": converted COO is not canonical";
    const auto csr = convert_into<T>(coo_v, csr_view<T, I, O>(r, c, base), s3);
    if (!same_triples(csr, m.triples)) return name + ": COO -> CSR differs";
    if (!s1.canaries_intact() || !s2.canaries_intact() || !s3.canaries_intact()) {
      return name + ": conversion overwrote a canary";
    }

    for (int src = 0; src < 3; ++src) {
      std::stringstream ss;
      if (src == 0) io::mm_write(ss, m.csr());
      if (src == 1) io::mm_write(ss, m.csc());
      if (src == 2) io::mm_write(ss, m.coo());
      auto back = io::mm_read<T>(ss, base);
      if (!same_triples(triples_of(back.view()), m.triples)) {
        return name + ": Matrix Market write/read differs";
      }
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Handle transparency

// Runs `run(operand, inspect, matrix)` over plain and handle operands with and
// without inspect, in every format, and compares the returned bytes.
template <class T, class Run>
std::string transparent(const std::string& family, const owned_matrix<T>& src, Run&& run) {
  for (int f = 0; f < 3; ++f) {
    std::string reference;
    for (int combo = 0; combo < 4; ++combo) {
      const bool handle = combo & 1;
      const bool inspect = combo & 2;
      auto m = src;
      std::string bytes;
      with_sparse(m, static_cast<format>(f), handle,
                  [&](const auto& a) { bytes = run(a, inspect, m, static_cast<format>(f)); });
      if (combo == 0) {
        reference = bytes;
      } else if (bytes != reference) {
        return family + " (format " + std::to_string(f) + ", handle " + std::to_string(handle) +
               ", inspect " + std::to_string(inspect) + ") differs from the plain path";
      }
    }
  }
  return {};
}

template <class T>
std::string handle_transparency() {
  std::mt19937_64 rng(555);
  const std::int64_t n = 40;
  random_params p{n, n, 0.12};
  p.explicit_zero_fraction = 0.05;
  const auto m = from_triples<T>(n, n, random_triples<T>(rng, p), index_base::one);
  const auto tri = lower_system<T>(rng, n, 0.15);
  random_params dp;
  const auto xd = random_dense<T>(rng, n, 3, dp);
  const auto yd = random_dense<T>(rng, 3, n, dp);
  const T alpha = static_cast<T>(-1.25);

  std::string problem;
  auto note = [&](std::string s) {
    if (problem.empty()) problem = std::move(s);
  };

  note(transparent<T>("scale", m, [&](const auto& a, bool inspect, owned_matrix<T>& mm, format f) {
    scale_state_t st;
    if (inspect) scale_inspect(seq, st, a);
    scale(seq, st, alpha, a);
    std::string b;
    with_plain(mm, f, [&](const auto& v) { append_bytes(b, triples_of(v)); });
    return b;
  }));
  note(transparent<T>("inf_norm", m, [&](const auto& a, bool inspect, auto&, format) {
    matrix_inf_norm_state_t st;
    if (inspect) matrix_inf_norm_inspect(seq, st, a);
    std::string b;
    append_bytes(b, matrix_inf_norm(seq, st, scaled(alpha, a)));
    append_bytes(b, matrix_inf_norm(seq, st, transposed(a)));
    return b;
  }));
  note(transparent<T>("frob_norm", m, [&](const auto& a, bool inspect, auto&, format) {
    matrix_frob_norm_state_t st;
    if (inspect) matrix_frob_norm_inspect(seq, st, a);
    std::string b;
    append_bytes(b, matrix_frob_norm(seq, st, scaled(alpha, a)));
    return b;
  }));
  note(transparent<T>("spmv", m, [&](const auto& a, bool inspect, auto&, format) {
    auto x = xd;
    std::vector<T> y(n, T(0));
    std::vector<T> d(n, T(1));
    dense_view<T> xv(std::span<T>(x.data.data(), n), n), yv(std::span<T>(y), n),
        dv(std::span<T>(d), n);
    multiply_state_t st;
    if (inspect) multiply_inspect(seq, st, scaled(alpha, a), xv, yv);
    multiply(seq, st, scaled(alpha, a), xv, yv);
    std::string b;
    append_bytes(b, y);
    multiply(seq, st, transposed(a), xv, scaled(T(2), dv), yv);
    append_bytes(b, y);
    return b;
  }));
  note(transparent<T>("spmm", m, [&](const auto& a, bool inspect, auto&, format) {
    auto x = xd;
    std::vector<T> y(n * 3, T(0));
    dense_view<T> xv(std::span<T>(x.data), n, 3), yv(std::span<T>(y), n, 3, layout::col_major);
    multiply_state_t st;
    if (inspect) multiply_inspect(seq, st, a, xv, yv);
    multiply(seq, st, a, xv, yv);
    std::string b;
    append_bytes(b, y);
    return b;
  }));
  note(transparent<T>("trisolve", tri, [&](const auto& t, bool inspect, auto&, format) {
    std::vector<T> rhs(n), x(n, T(0));
    for (std::int64_t i = 0; i < n; ++i) rhs[i] = static_cast<T>(1 + i % 7);
    dense_view<T> bv(std::span<T>(rhs), n), xv(std::span<T>(x), n);
    triangular_solve_state_t st;
    if (inspect) triangular_solve_inspect(seq, st, t, bv, xv);
    triangular_solve(seq, st, t, bv, xv);
    std::string b;
    append_bytes(b, x);
    triangular_solve(seq, st, transposed(t), bv, xv);
    append_bytes(b, x);
    return b;
  }));
  note(transparent<T>("sddmm", m, [&](const auto& c, bool inspect, owned_matrix<T>& mm, format f) {
    auto x = xd;
    auto y = yd;
    dense_view<T> xv(std::span<T>(x.data), n, 3), yv(std::span<T>(y.data), 3, n);
    sampled_multiply_state_t st;
    if (inspect) sampled_multiply_inspect(seq, st, scaled(alpha, xv), yv, c);
    sampled_multiply(seq, st, scaled(alpha, xv), yv, c);
    std::string b;
    with_plain(mm, f, [&](const auto& v) { append_bytes(b, triples_of(v)); });
    return b;
  }));
  return problem;
}

}  // namespace

int main() {
  sc::options opt;

  {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = sc::value_suite(opt);
    const double s = seconds_since(t0);
    bool counts = true;
    for (const auto& f : sc::value_families()) {
      counts = counts && r.count(f) == static_cast<std::size_t>(opt.cases_per_family * 2);
    }
    const bool pass = r.failures() == 0 && counts && s < 60.0;
    verdict("oracle_values", pass,
            std::to_string(r.records.size()) + " cases over " +
                std::to_string(sc::value_families().size()) + " families x {float,double}, " +
                std::to_string(r.failures()) + " failures, max slack " + fmt(r.max_slack()) +
                " (bound f(m)=m, g(m)=2m), " + fmt(s) + " s (limit 60 s)" +
                (r.failures() ? "; first: " + first_failure(r) : ""));
  }
  {
    const auto r = sc::pattern_suite(opt);
    verdict("oracle_patterns", r.failures() == 0 && r.total_mismatches() == 0,
            std::to_string(r.records.size()) + " cases, " + std::to_string(r.total_mismatches()) +
                " mismatched entries, " + std::to_string(r.failures()) + " failures" +
                (r.failures() ? "; first: " + first_failure(r) : ""));
  }
  {
    auto o = opt;
    o.max_dim = 32;
    const auto r = sc::exact_integer_suite(o);
    std::set<std::string> need{"spmv", "spgemm", "add", "sddmm", "trisolve"};
    for (const auto& c : r.records) need.erase(c.family);
    verdict("exact_integer", r.failures() == 0 && need.empty(),
            std::to_string(r.records.size()) + " cases, |entries| <= 2^10, dims <= 32, " +
                std::to_string(r.failures()) + " not bitwise equal" +
                (r.failures() ? "; first: " + first_failure(r) : ""));
  }
  {
    const auto r = sc::exception_matrix_suite();
    verdict("exception_table", r.records.size() == 8 && r.failures() == 0,
            std::to_string(r.records.size() - r.failures()) + "/8 cases pass" +
                (r.failures() ? "; first: " + first_failure(r) : ""));
  }
  {
    const auto t0 = std::chrono::steady_clock::now();
    sc::reproducibility_options cnr;
    cnr.property = cnr_property::cnr;
    cnr.threads = {4};
    cnr.repeats = 10;
    const auto r1 = sc::reproducibility_suite(cnr);
    sc::reproducibility_options strict;
    strict.property = cnr_property::strict_cnr;
    strict.threads = {1, 2, 4, 8};
    const auto r2 = sc::reproducibility_suite(strict);
    const double s = seconds_since(t0);
    const bool pass = r1.failures() == 0 && r2.failures() == 0 && s < 120.0;
    std::string first = first_failure(r1);
    if (first.empty()) first = first_failure(r2);
    verdict("reproducibility", pass,
            "cnr 10 repeats at 4 threads: " + std::to_string(r1.records.size() - r1.failures()) +
                "/" + std::to_string(r1.records.size()) + " families identical; strict_cnr threads "
                "{1,2,4,8}: " + std::to_string(r2.records.size() - r2.failures()) + "/" +
                std::to_string(r2.records.size()) + " identical; " + fmt(s) + " s (limit 120 s)" +
                (first.empty() ? "" : "; first: " + first));
  }

  staged_protocol();

  {
    std::string summary;
    const auto problem = resource_checks(summary);
    verdict("resource_accounting", problem.empty(),
            problem.empty() ? "counting-resource balance zero after every case (" + summary +
                                  "); fill never wrote past result_nnz (canaries intact)"
                            : problem);
  }
  {
    auto problem = round_trip_corpus<double>(50);
    if (problem.empty()) problem = round_trip_corpus<float>(50);
    verdict("round_trips", problem.empty(),
            problem.empty() ? "50 corpus matrices x {float,double}: CSR->CSC->COO->CSR and "
                              "Matrix Market write/read reproduce triples bitwise"
                            : problem);
  }
  {
    auto problem = handle_transparency<double>();
    if (problem.empty()) problem = handle_transparency<float>();
    verdict("handle_transparency", problem.empty(),
            problem.empty() ? "scale, inf_norm, frob_norm, spmv, spmm, trisolve, sddmm: handle "
                              "and plain paths bitwise equal under seq, with and without inspect"
                            : problem);
  }

  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
