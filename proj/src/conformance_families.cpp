#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "conformance_internal.hpp"

namespace spblas::conformance::internal {

namespace {

template <class T>
T scaled_value(T alpha, T v) {
  return alpha == T(1) ? v : alpha * v;
}

template <class T>
bool nontrivial(T alpha) {
  return alpha != T(1) && alpha != T(0);
}

// Values are held to the rounding bound; integer inputs to exact equality.
template <class T>
error_bound_spec spec_for(const case_config& cfg, std::int64_t m) {
  auto s = error_bound_spec::for_type<T>(m);
  if (cfg.kind == mode::integers) {
    s.eps = 0;
    s.un = 0;
  }
  return s;
}

// Integer mode only runs when every partial sum is exactly representable.
template <class T>
bool exact_ok(const case_config& cfg, const reference<T>& r) {
  if (cfg.kind != mode::integers) return true;
  for (std::size_t k = 0; k < r.pattern.size(); ++k) {
    if (r.pattern[k] && !(r.abs_sum[k] < exact_limit<T>())) return false;
  }
  return true;
}

template <class T>
reference<T> pattern_reference(std::int64_t r, std::int64_t c, std::vector<std::uint8_t> p) {
  reference<T> ref(r, c);
  ref.pattern = std::move(p);
  return ref;
}

const char* format_label(format f) {
  switch (f) {
    case format::csr: return "csr";
    case format::csc: return "csc";
    case format::coo: return "coo";
  }
  return "?";
}

std::string policy_label(const execution_policy& p) {
  switch (p.mode) {
    case execution_mode::sequential: return "seq";
    case execution_mode::deterministic_parallel: return "detpar" + std::to_string(p.threads);
    case execution_mode::parallel: return "par" + std::to_string(p.threads);
  }
  return "?";
}

class describe {
public:
  template <class V>
  describe& operator()(const char* key, const V& v) {
    os_ << (first_ ? "" : " ") << key << '=' << v;
    first_ = false;
    return *this;
  }
  describe& operator()(const char* key, format f) { return (*this)(key, format_label(f)); }
  describe& operator()(const char* key, const execution_policy& p) {
    return (*this)(key, policy_label(p));
  }
  describe& operator()(const char* key, bool b) { return (*this)(key, b ? 1 : 0); }
  std::string str() const { return os_.str(); }

private:
  std::ostringstream os_;
  bool first_ = true;
};

template <class T>
dense_matrix<T> draw_dense(std::mt19937_64& rng, const case_config& cfg, std::int64_t r,
                           std::int64_t c) {
  auto p = value_params<T>(cfg, r, c, 1.0);
  p.explicit_zero_fraction = 0;
  return random_dense<T>(rng, r, c, p);
}

inline layout draw_layout(std::mt19937_64& rng) {
  return coin(rng) ? layout::row_major : layout::col_major;
}

// compute -> allocate exactly result_nnz -> fill into a fresh output of
// format f, with canaries past every array. Returns the output triples.
template <class T, class Compute, class Fill>
std::vector<triple<T>> staged_output(tally& t, format f, std::int64_t r, std::int64_t c,
                                     index_base base, const state_base& st, Compute&& compute,
                                     Fill&& fill) {
  std::vector<triple<T>> out;
  with_shell<T>(f, r, c, base, [&](auto& shell) {
    compute(shell);
    const auto nnz = st.get_result_nnz();
    output_store<T> store;
    store.bind(shell, nnz);
    fill(shell);
    if (!store.canaries_intact()) t.fail("write past the end of an output array");
    if (shell.nnz() != nnz) t.fail("output nnz not set to result_nnz");
    const auto report = validate(shell);
    if (!report.ok()) t.fail("output not canonical: " + report.describe());
    out = triples_of(shell);
  });
  return out;
}

template <class T>
std::optional<case_record> finish(const std::string& family, std::int64_t index, const tally& t,
                                  const describe& d) {
  return make_record<T>(family, index, t, d.str());
}

// Runs body, turning any escaped exception into a failed case.
template <class F>
void guarded(tally& t, F&& body) {
  try {
    body();
  } catch (const sparse_error& e) {
    t.fail(std::string("error: ") + std::string(category_name(e.category())) + ": " + e.what());
  } catch (const std::exception& e) {
    t.fail(std::string("exception: ") + e.what());
  }
}

// ---- single-stage ----------------------------------------------------------

template <class T>
std::optional<case_record> run_scale(std::mt19937_64& rng, const case_config& cfg,
                                     std::int64_t index) {
  const auto r = draw_dim(rng, cfg.max_dim);
  const auto c = draw_dim(rng, cfg.max_dim);
  auto m = draw_matrix<T>(rng, cfg, r, c, draw_density(rng, cfg));
  const auto f = draw_format(rng);
  const bool handle = coin(rng);
  const bool inspect = coin(rng);
  const bool tr = coin(rng);
  const T alpha = draw_scalar<T>(rng, cfg, true);
  const auto pol = draw_policy(rng);
  describe d;
  d("fmt", f)("handle", handle)("inspect", inspect)("trans", tr)("alpha", alpha)("policy", pol)
      ("nnz", m.nnz());

  tally t;
  guarded(t, [&] {
    with_sparse(m, f, handle, [&](const auto& a) {
      using A = std::decay_t<decltype(a)>;
      transposed_view<A> op{tr, false, a};
      scale_state_t st;
      if (inspect) scale_inspect(pol, st, op);
      scale(pol, st, alpha, op);
    });
    std::vector<triple<T>> got;
    with_plain(m, f, [&](const auto& v) { got = canonical(triples_of(v)); });
    if (got.size() != m.triples.size()) {
      t.fail("stored entry count changed");
      return;
    }
    for (std::size_t k = 0; k < got.size(); ++k) {
      ++t.checked;
      if (got[k].i != m.triples[k].i || got[k].j != m.triples[k].j) {
        ++t.mismatches;
        t.fail("pattern changed");
      } else if (!same_value(got[k].v, scaled_value(alpha, m.triples[k].v))) {
        t.fail("value differs from alpha * v");
      }
    }
  });
  return finish<T>("scale", index, t, d);
}

template <class T, bool Frobenius>
std::optional<case_record> run_norm(std::mt19937_64& rng, const case_config& cfg,
                                    std::int64_t index) {
  using R = real_t<T>;
  const auto r = draw_dim(rng, cfg.max_dim);
  const auto c = draw_dim(rng, cfg.max_dim);
  auto m = draw_matrix<T>(rng, cfg, r, c, draw_density(rng, cfg));
  const auto f = draw_format(rng);
  const bool handle = coin(rng);
  const bool inspect = coin(rng);
  const bool tr = coin(rng);
  const T alpha = draw_scalar<T>(rng, cfg, true);
  const auto pol = draw_policy(rng);
  describe d;
  d("fmt", f)("handle", handle)("inspect", inspect)("trans", tr)("alpha", alpha)("policy", pol)
      ("nnz", m.nnz());

  const auto mir = m.mirror(tr);
  const auto [exact, nref] = Frobenius ? oracle_frob_norm(mir, alpha) : oracle_inf_norm(mir, alpha);
  if (cfg.kind == mode::integers && !(nref.abs_sum < exact_limit<T>())) return std::nullopt;

  tally t;
  guarded(t, [&] {
    R got = 0;
    with_sparse(m, f, handle, [&](const auto& a) {
      const auto op = wrap(alpha, tr, false, a);
      if constexpr (Frobenius) {
        matrix_frob_norm_state_t st;
        if (inspect) matrix_frob_norm_inspect(pol, st, op);
        got = matrix_frob_norm(pol, st, op);
      } else {
        matrix_inf_norm_state_t st;
        if (inspect) matrix_inf_norm_inspect(pol, st, op);
        got = matrix_inf_norm(pol, st, op);
      }
    });
    // Frobenius: nnz squarings and additions, the square root, the scaling.
    const std::int64_t m_terms = Frobenius ? nref.terms + 1 + nontrivial(alpha)
                                           : nref.terms + nontrivial(alpha);
    t.bound(check_error_bound<R>(got, exact, spec_for<R>(cfg, m_terms), nref.abs_sum), "norm");
  });
  return finish<T>(Frobenius ? "frob_norm" : "inf_norm", index, t, d);
}

template <class T, bool Matrix>
std::optional<case_record> run_multiply(std::mt19937_64& rng, const case_config& cfg,
                                        std::int64_t index) {
  const auto r = draw_dim(rng, cfg.max_dim);
  const auto c = draw_dim(rng, cfg.max_dim);
  auto m = draw_matrix<T>(rng, cfg, r, c, draw_density(rng, cfg));
  const auto f = draw_format(rng);
  const bool handle = coin(rng);
  const bool inspect = coin(rng);
  const bool tr = coin(rng);
  const T alpha = draw_scalar<T>(rng, cfg, true);
  const bool use_d = coin(rng);
  const T beta = draw_scalar<T>(rng, cfg, true);
  const bool alias = use_d && coin(rng, 0.3);
  const auto pol = draw_policy(rng);
  const std::int64_t k = Matrix ? std::uniform_int_distribution<std::int64_t>(2, 8)(rng) : 1;
  const layout lx = Matrix ? draw_layout(rng) : layout::row_major;
  const layout ly = Matrix ? draw_layout(rng) : layout::row_major;
  const layout ld = alias ? ly : (Matrix ? draw_layout(rng) : layout::row_major);

  const auto mir = m.mirror(tr);
  const auto x = draw_dense<T>(rng, cfg, mir.ncols, k);
  const auto dm = draw_dense<T>(rng, cfg, mir.nrows, k);
  describe d;
  d("fmt", f)("handle", handle)("inspect", inspect)("trans", tr)("alpha", alpha)("d", use_d)
      ("beta", beta)("alias", alias)("k", k)("policy", pol)("nnz", m.nnz());

  const auto ref = oracle_spmv(mir, alpha, x, use_d ? &dm : nullptr, beta);
  if (!exact_ok(cfg, ref)) return std::nullopt;

  tally t;
  guarded(t, [&] {
    dense_buffer<T> xb(x, lx, !Matrix);
    dense_buffer<T> yb(alias ? dm : dense_matrix<T>(mir.nrows, k, output_store<T>::value_canary()),
                       ly, !Matrix);
    dense_buffer<T> db(dm, ld, !Matrix);
    with_sparse(m, f, handle, [&](const auto& a) {
      const auto op = wrap(alpha, tr, false, a);
      multiply_state_t st;
      if (inspect) multiply_inspect(pol, st, op, xb.view, yb.view);
      if (use_d) {
        multiply(pol, st, op, xb.view, scaled(beta, alias ? yb.view : db.view), yb.view);
      } else {
        multiply(pol, st, op, xb.view, yb.view);
      }
    });
    for (std::int64_t i = 0; i < mir.nrows; ++i) {
      for (std::int64_t j = 0; j < k; ++j) {
        const auto p = ref.at(i, j);
        const bool beta_term = use_d && beta != T(0);
        const std::int64_t m_terms = ref.terms[p] + nontrivial(alpha) + beta_term;
        t.bound(check_error_bound<T>(yb.at(i, j), ref.value[p], spec_for<T>(cfg, m_terms),
                                     ref.abs_sum[p]),
                "y(" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  });
  return finish<T>(Matrix ? "spmm" : "spmv", index, t, d);
}

template <class T>
std::optional<case_record> run_trisolve(std::mt19937_64& rng, const case_config& cfg,
                                        std::int64_t index) {
  using R = real_t<T>;
  const bool integers = cfg.kind == mode::integers;
  const auto n = draw_dim(rng, cfg.max_dim);
  const bool lower = coin(rng);
  const bool tr = coin(rng);
  const double density = draw_density(rng, cfg);
  auto p = value_params<T>(cfg, n, n, density);
  // Unit-diagonal systems with entries in {-1, 0, 1} keep the integer
  // solution small enough to stay exact.
  if (integers) p.kind = value_kind::signed_unit;

  std::vector<triple<T>> logical;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::int64_t i = 0; i < n; ++i) {
    double row_abs = 0;
    for (std::int64_t j = 0; j < n; ++j) {
      if (j == i || (lower ? j > i : j < i) || u(rng) >= density) continue;
      const T v = random_value<T>(rng, p);
      logical.push_back({i, j, v});
      row_abs += magnitude_of(v);
    }
    const R sign = coin(rng) ? R(1) : R(-1);
    const R mag = integers ? R(1) : static_cast<R>(1.0 + row_abs);
    logical.push_back({i, i, T(sign * mag)});
  }
  auto stored = logical;
  if (tr) {
    for (auto& e : stored) std::swap(e.i, e.j);
  }
  auto m = from_triples<T>(n, n, stored, draw_base(rng), O{coin(rng, 0.2) ? 5 : 0});
  auto bp = value_params<T>(cfg, n, 1, 1.0);
  bp.explicit_zero_fraction = 0;
  const auto b = random_dense<T>(rng, n, 1, bp);
  const auto f = draw_format(rng);
  const bool handle = coin(rng);
  const bool inspect = coin(rng);
  const auto pol = draw_policy(rng);
  describe d;
  d("fmt", f)("handle", handle)("inspect", inspect)("trans", tr)("lower", lower)("policy", pol)
      ("n", n)("nnz", m.nnz());

  const auto mir = m.mirror(tr);
  std::optional<std::vector<extended_t<T>>> exact;
  if (integers) {
    exact = oracle_trisolve(mir, b.data);
    if (!exact) return std::nullopt;
    std::vector<T> rounded;
    for (const auto& e : *exact) {
      if (!(magnitude(e) < exact_limit<T>())) return std::nullopt;
      rounded.push_back(round_to<T>(e));
    }
    if (!exact_ok(cfg, trisolve_residual(mir, b.data, rounded))) return std::nullopt;
  }

  tally t;
  guarded(t, [&] {
    dense_buffer<T> bb(b, layout::row_major, true);
    dense_buffer<T> xb(dense_matrix<T>(n, 1), layout::row_major, true);
    with_sparse(m, f, handle, [&](const auto& a) {
      using A = std::decay_t<decltype(a)>;
      transposed_view<A> op{tr, false, a};
      triangular_solve_state_t st;
      if (inspect) triangular_solve_inspect(pol, st, op, bb.view, xb.view);
      triangular_solve(pol, st, op, bb.view, xb.view);
    });
    if (integers) {
      for (std::int64_t i = 0; i < n; ++i) {
        t.bound(check_error_bound<T>(xb.data[i], (*exact)[i], spec_for<T>(cfg, 1), 0.0),
                "x(" + std::to_string(i) + ")");
      }
      return;
    }
    // Backward stability: each residual b_i - (T x_hat)_i is within the
    // bound for its row's terms.
    const auto res = trisolve_residual(mir, b.data, xb.data);
    for (std::int64_t i = 0; i < n; ++i) {
      t.bound(check_error_bound<T>(T(0), res.value[i], spec_for<T>(cfg, res.terms[i]),
                                   res.abs_sum[i]),
              "residual(" + std::to_string(i) + ")");
    }
  });
  return finish<T>("trisolve", index, t, d);
}

template <class T>
std::optional<case_record> run_sddmm(std::mt19937_64& rng, const case_config& cfg,
                                     std::int64_t index) {
  const auto r = draw_dim(rng, cfg.max_dim);
  const auto c = draw_dim(rng, cfg.max_dim);
  const auto k = std::uniform_int_distribution<std::int64_t>(1, 16)(rng);
  auto m = draw_matrix<T>(rng, cfg, r, c, draw_density(rng, cfg));
  const auto x = draw_dense<T>(rng, cfg, r, k);
  const auto y = draw_dense<T>(rng, cfg, k, c);
  const auto f = draw_format(rng);
  const bool handle = coin(rng);
  const bool inspect = coin(rng);
  const T alpha = draw_scalar<T>(rng, cfg, true);
  const layout lx = draw_layout(rng);
  const layout ly = draw_layout(rng);
  const auto pol = draw_policy(rng);
  describe d;
  d("fmt", f)("handle", handle)("inspect", inspect)("alpha", alpha)("k", k)("policy", pol)
      ("nnz", m.nnz());

  const auto ref = oracle_sddmm(x, y, m.mirror(), alpha);
  if (!exact_ok(cfg, ref)) return std::nullopt;

  tally t;
  guarded(t, [&] {
    dense_buffer<T> xb(x, lx, false);
    dense_buffer<T> yb(y, ly, false);
    with_sparse(m, f, handle, [&](const auto& cv) {
      sampled_multiply_state_t st;
      if (inspect) sampled_multiply_inspect(pol, st, scaled(alpha, xb.view), yb.view, cv);
      sampled_multiply(pol, st, scaled(alpha, xb.view), yb.view, cv);
    });
    std::vector<triple<T>> got;
    with_plain(m, f, [&](const auto& v) { got = triples_of(v); });
    compare_sparse(t, got, r, c, ref, [&](std::size_t) {
      return spec_for<T>(cfg, k + nontrivial(alpha));
    });
  });
  return finish<T>("sddmm", index, t, d);
}

// ---- multi-stage -----------------------------------------------------------

template <class T, class A, class B, class... D>
std::vector<triple<T>> spgemm_once(tally& t, const execution_policy& pol, bool inspect,
                                   bool split, format fc, index_base base, std::int64_t r,
                                   std::int64_t c, const A& a, const B& b, const D&... dv) {
  sparse_multiply_state_t st;
  return staged_output<T>(
      t, fc, r, c, base, st,
      [&](auto& shell) {
        if (inspect) sparse_multiply_inspect(pol, st, a, b, shell, dv...);
        if (split) {
          sparse_multiply_symbolic_compute(pol, st, a, b, shell, dv...);
        } else {
          sparse_multiply_compute(pol, st, a, b, shell, dv...);
        }
      },
      [&](auto& shell) {
        if (split) {
          sparse_multiply_symbolic_fill(pol, st, a, b, shell, dv...);
          sparse_multiply_numeric_compute(pol, st, a, b, shell, dv...);
          sparse_multiply_numeric_fill(pol, st, a, b, shell, dv...);
        } else {
          sparse_multiply_fill(pol, st, a, b, shell, dv...);
        }
      });
}

template <class T>
std::optional<case_record> run_spgemm(std::mt19937_64& rng, const case_config& cfg,
                                      std::int64_t index) {
  const auto r = draw_dim(rng, cfg.max_dim);
  const auto kk = draw_dim(rng, cfg.max_dim);
  const auto c = draw_dim(rng, cfg.max_dim);
  const bool ta = coin(rng);
  const bool tb = coin(rng);
  auto ma = draw_matrix<T>(rng, cfg, ta ? kk : r, ta ? r : kk, draw_density(rng, cfg));
  auto mb = draw_matrix<T>(rng, cfg, tb ? c : kk, tb ? kk : c, draw_density(rng, cfg));
  const bool use_d = coin(rng);
  auto md = draw_matrix<T>(rng, cfg, r, c, draw_density(rng, cfg));
  const auto fa = draw_format(rng);
  const auto fb = draw_format(rng);
  const auto fd = draw_format(rng);
  const auto fc = draw_format(rng);
  const auto base = draw_base(rng);
  const bool handle = coin(rng);
  const bool inspect = coin(rng);
  const bool split = coin(rng);
  const T alpha = draw_scalar<T>(rng, cfg, true);
  const T beta = draw_scalar<T>(rng, cfg, true);
  const auto pol = draw_policy(rng);
  describe d;
  d("fmt_a", fa)("fmt_b", fb)("fmt_c", fc)("handle", handle)("inspect", inspect)("split", split)
      ("trans_a", ta)("trans_b", tb)("alpha", alpha)("d", use_d)("beta", beta)("policy", pol);

  const auto mia = ma.mirror(ta);
  const auto mib = mb.mirror(tb);
  const auto mid = md.mirror();
  const auto ref = oracle_gemm(mia, mib, alpha, use_d ? &mid : nullptr, beta);
  if (!exact_ok(cfg, ref)) return std::nullopt;

  tally t;
  guarded(t, [&] {
    std::vector<triple<T>> got;
    with_sparse(ma, fa, handle, [&](const auto& a) {
      with_plain(mb, fb, [&](const auto& b) {
        const auto opa = wrap(alpha, ta, false, a);
        const auto opb = wrap(T(1), tb, false, b);
        if (use_d) {
          with_plain(md, fd, [&](const auto& dv) {
            got = spgemm_once<T>(t, pol, inspect, split, fc, base, r, c, opa, opb,
                                 scaled(beta, dv));
          });
        } else {
          got = spgemm_once<T>(t, pol, inspect, split, fc, base, r, c, opa, opb);
        }
      });
    });
    compare_sparse(t, got, r, c, ref, [&](std::size_t p) {
      const bool beta_term = use_d && mid.pattern[p] && beta != T(0);
      return spec_for<T>(cfg, ref.terms[p] + nontrivial(alpha) + beta_term);
    });
  });
  return finish<T>("spgemm", index, t, d);
}

template <class T, bool Union>
std::optional<case_record> run_merge(std::mt19937_64& rng, const case_config& cfg,
                                     std::int64_t index) {
  const auto r = draw_dim(rng, cfg.max_dim);
  const auto c = draw_dim(rng, cfg.max_dim);
  const bool ta = coin(rng);
  const bool tb = coin(rng);
  auto ma = draw_matrix<T>(rng, cfg, ta ? c : r, ta ? r : c, draw_density(rng, cfg));
  // Half the cases share A's pattern so that intersections are not empty.
  const bool shared = coin(rng);
  owned_matrix<T> mb;
  if (shared) {
    auto p = value_params<T>(cfg, r, c, 1.0);
    std::vector<triple<T>> tb_triples;
    for (const auto& e : ma.triples) {
      const auto i = ta ? e.j : e.i;
      const auto j = ta ? e.i : e.j;
      tb_triples.push_back({tb ? j : i, tb ? i : j, random_value<T>(rng, p)});
    }
    mb = from_triples<T>(tb ? c : r, tb ? r : c, tb_triples, draw_base(rng));
  } else {
    mb = draw_matrix<T>(rng, cfg, tb ? c : r, tb ? r : c, draw_density(rng, cfg));
  }
  const auto fa = draw_format(rng);
  const auto fb = draw_format(rng);
  const auto fc = draw_format(rng);
  const auto base = draw_base(rng);
  const bool handle = coin(rng);
  const bool inspect = coin(rng);
  const T alpha = draw_scalar<T>(rng, cfg, true);
  const T beta = draw_scalar<T>(rng, cfg, true);
  const auto pol = draw_policy(rng);
  describe d;
  d("fmt_a", fa)("fmt_b", fb)("fmt_c", fc)("handle", handle)("inspect", inspect)("trans_a", ta)
      ("trans_b", tb)("alpha", alpha)("beta", beta)("shared", shared)("policy", pol);

  const auto mia = ma.mirror(ta);
  const auto mib = mb.mirror(tb);
  const auto ref = Union ? oracle_add(mia, mib, alpha, beta) : oracle_hadamard(mia, mib, alpha, beta);
  if (!exact_ok(cfg, ref)) return std::nullopt;

  tally t;
  guarded(t, [&] {
    std::vector<triple<T>> got;
    with_sparse(ma, fa, handle, [&](const auto& a) {
      with_plain(mb, fb, [&](const auto& b) {
        const auto opa = wrap(alpha, ta, false, a);
        const auto opb = wrap(beta, tb, false, b);
        if constexpr (Union) {
          add_state_t st;
          got = staged_output<T>(
              t, fc, r, c, base, st,
              [&](auto& shell) {
                if (inspect) add_inspect(pol, st, opa, opb, shell);
                add_compute(pol, st, opa, opb, shell);
              },
              [&](auto& shell) { add_fill(pol, st, opa, opb, shell); });
        } else {
          multiply_elementwise_state_t st;
          got = staged_output<T>(
              t, fc, r, c, base, st,
              [&](auto& shell) {
                if (inspect) multiply_elementwise_inspect(pol, st, opa, opb, shell);
                multiply_elementwise_compute(pol, st, opa, opb, shell);
              },
              [&](auto& shell) { multiply_elementwise_fill(pol, st, opa, opb, shell); });
        }
      });
    });
    compare_sparse(t, got, r, c, ref, [&](std::size_t p) {
      const std::int64_t m_terms = Union ? ref.terms[p] + (alpha != T(1)) + (beta != T(1))
                                         : 1 + (alpha != T(1)) + (beta != T(1));
      return spec_for<T>(cfg, m_terms);
    });
  });
  return finish<T>(Union ? "add" : "hadamard", index, t, d);
}

// Expected values of alpha * op(A) at every stored position.
template <class T>
std::vector<T> scaled_raw(const dense_mirror<T>& mir, T alpha) {
  std::vector<T> v(mir.raw.size(), T(0));
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (mir.pattern[k]) v[k] = scaled_value(alpha, mir.raw[k]);
  }
  return v;
}

template <class T>
std::optional<case_record> run_convert(std::mt19937_64& rng, const case_config& cfg,
                                       std::int64_t index) {
  const auto r = draw_dim(rng, cfg.max_dim);
  const auto c = draw_dim(rng, cfg.max_dim);
  const double density = draw_density(rng, cfg);
  auto m = draw_matrix<T>(rng, cfg, r, c, density);
  const bool from_dense = coin(rng, 0.3);
  const auto f = draw_format(rng);
  const auto fc = draw_format(rng);
  const auto base = draw_base(rng);
  const bool handle = coin(rng);
  const bool inspect = coin(rng);
  const bool tr = coin(rng);
  const T alpha = draw_scalar<T>(rng, cfg, false);
  const layout lx = draw_layout(rng);
  const auto pol = draw_policy(rng);
  describe d;
  d("dense", from_dense)("fmt", f)("fmt_c", fc)("handle", handle)("inspect", inspect)
      ("trans", tr)("alpha", alpha)("policy", pol);

  tally t;
  guarded(t, [&] {
    convert_state_t st;
    if (from_dense) {
      // Sparse-ish dense source with a few signed zeros that must be dropped.
      auto x = draw_dense<T>(rng, cfg, r, c);
      for (auto& v : x.data) {
        const double u = std::uniform_real_distribution<double>(0, 1)(rng);
        if (u >= density) v = u < density + 0.05 ? -T(0) : T(0);
      }
      dense_buffer<T> xb(x, lx, false);
      auto got = staged_output<T>(
          t, fc, r, c, base, st,
          [&](auto& shell) {
            if (inspect) convert_inspect(pol, st, scaled(alpha, xb.view), shell);
            convert_compute(pol, st, scaled(alpha, xb.view), shell);
          },
          [&](auto& shell) { convert_fill(pol, st, scaled(alpha, xb.view), shell); });
      std::vector<T> expected(x.data.size());
      for (std::size_t k = 0; k < expected.size(); ++k) expected[k] = scaled_value(alpha, x.data[k]);
      const auto ref = pattern_reference<T>(r, c, oracle_dense_pattern(x));
      compare_sparse(t, got, r, c, ref, [](std::size_t) { return error_bound_spec{}; }, &expected);
      return;
    }
    const auto mir = m.mirror(tr);
    const auto ref = pattern_reference<T>(mir.nrows, mir.ncols, oracle_pattern(pattern_kind::copy, mir));
    const auto expected = scaled_raw(mir, alpha);
    with_sparse(m, f, handle, [&](const auto& a) {
      const auto op = wrap(alpha, tr, false, a);
      auto got = staged_output<T>(
          t, fc, mir.nrows, mir.ncols, base, st,
          [&](auto& shell) {
            if (inspect) convert_inspect(pol, st, op, shell);
            convert_compute(pol, st, op, shell);
          },
          [&](auto& shell) { convert_fill(pol, st, op, shell); });
      compare_sparse(t, got, mir.nrows, mir.ncols, ref,
                     [](std::size_t) { return error_bound_spec{}; }, &expected);
    });
  });
  return finish<T>("convert", index, t, d);
}

template <class T>
std::optional<case_record> run_filter(std::mt19937_64& rng, const case_config& cfg,
                                      std::int64_t index) {
  const auto r = draw_dim(rng, cfg.max_dim);
  const auto c = draw_dim(rng, cfg.max_dim);
  auto m = draw_matrix<T>(rng, cfg, r, c, draw_density(rng, cfg));
  const auto f = draw_format(rng);
  const auto fc = draw_format(rng);
  const auto base = draw_base(rng);
  const bool handle = coin(rng);
  const bool tr = coin(rng);
  const T alpha = draw_scalar<T>(rng, cfg, false);
  const double threshold = std::uniform_real_distribution<double>(0.0, 4.0)(rng);
  const auto pol = draw_policy(rng);
  describe d;
  d("fmt", f)("fmt_c", fc)("handle", handle)("trans", tr)("alpha", alpha)
      ("threshold", threshold)("policy", pol);

  auto pred = [threshold](std::int64_t i, std::int64_t j, T v) {
    return magnitude_of(v) >= threshold || (i + 2 * j) % 5 == 0;
  };
  const auto mir = m.mirror(tr);
  const auto expected = scaled_raw(mir, alpha);
  std::vector<std::uint8_t> keep(mir.pattern.size(), 0);
  for (std::int64_t i = 0; i < mir.nrows; ++i) {
    for (std::int64_t j = 0; j < mir.ncols; ++j) {
      const auto k = mir.at(i, j);
      keep[k] = mir.pattern[k] && pred(i, j, expected[k]);
    }
  }
  const auto ref = pattern_reference<T>(mir.nrows, mir.ncols, keep);

  tally t;
  guarded(t, [&] {
    with_sparse(m, f, handle, [&](const auto& a) {
      const auto op = wrap(alpha, tr, false, a);
      filter_state_t st;
      auto got = staged_output<T>(
          t, fc, mir.nrows, mir.ncols, base, st,
          [&](auto& shell) { filter_compute(pol, st, op, shell, pred); },
          [&](auto& shell) { filter_fill(pol, st, op, shell, pred); });
      compare_sparse(t, got, mir.nrows, mir.ncols, ref,
                     [](std::size_t) { return error_bound_spec{}; }, &expected);
    });
  });
  return finish<T>("filter", index, t, d);
}

template <class T>
std::optional<case_record> run_transpose(std::mt19937_64& rng, const case_config& cfg,
                                         std::int64_t index) {
  const auto r = draw_dim(rng, cfg.max_dim);
  const auto c = draw_dim(rng, cfg.max_dim);
  auto m = draw_matrix<T>(rng, cfg, r, c, draw_density(rng, cfg));
  const auto f = draw_format(rng);
  const auto fc = draw_format(rng);
  const auto base = draw_base(rng);
  const bool handle = coin(rng);
  const bool tr = coin(rng);
  const bool conj = coin(rng);
  const T alpha = draw_scalar<T>(rng, cfg, false);
  const auto pol = draw_policy(rng);
  describe d;
  d("fmt", f)("fmt_c", fc)("handle", handle)("trans", tr)("conj", conj)("alpha", alpha)
      ("policy", pol);

  // (alpha op(A))^T, conjugated on request.
  const auto mir = m.mirror(!tr, conj);
  const T factor = conj ? conj_raw(alpha) : alpha;
  const auto expected = scaled_raw(mir, factor);
  const auto ref = pattern_reference<T>(mir.nrows, mir.ncols, mir.pattern);

  tally t;
  guarded(t, [&] {
    with_sparse(m, f, handle, [&](const auto& a) {
      const auto op = wrap(alpha, tr, false, a);
      transpose_state_t st;
      auto got = staged_output<T>(
          t, fc, mir.nrows, mir.ncols, base, st,
          [&](auto& shell) { transpose_compute(pol, st, op, shell, conj); },
          [&](auto& shell) { transpose_fill(pol, st, op, shell, conj); });
      compare_sparse(t, got, mir.nrows, mir.ncols, ref,
                     [](std::size_t) { return error_bound_spec{}; }, &expected);
    });
  });
  return finish<T>("transpose", index, t, d);
}

}  // namespace

template <class T>
family_fn<T> find_family(const std::string& name) {
  static const std::map<std::string, family_fn<T>> table{
      {"scale", &run_scale<T>},
      {"inf_norm", &run_norm<T, false>},
      {"frob_norm", &run_norm<T, true>},
      {"spmv", &run_multiply<T, false>},
      {"spmm", &run_multiply<T, true>},
      {"trisolve", &run_trisolve<T>},
      {"sddmm", &run_sddmm<T>},
      {"spgemm", &run_spgemm<T>},
      {"add", &run_merge<T, true>},
      {"hadamard", &run_merge<T, false>},
      {"convert", &run_convert<T>},
      {"filter", &run_filter<T>},
      {"transpose", &run_transpose<T>},
  };
  const auto it = table.find(name);
  return it == table.end() ? nullptr : it->second;
}

template family_fn<float> find_family<float>(const std::string&);
template family_fn<double> find_family<double>(const std::string&);

}  // namespace spblas::conformance::internal
