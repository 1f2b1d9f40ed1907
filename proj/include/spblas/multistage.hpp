#pragma once

// Operations whose output structure is unknown before the call. Each family
// follows inspect (optional) -> compute -> caller allocates -> fill; the
// sparse product additionally offers a symbolic/numeric split.
//
// compute stores the 0-based row offsets of the result in the state; fill
// regenerates each row, writes indices and values, and converts to the
// output view's index base.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory_resource>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include <spblas/detail/operand.hpp>
#include <spblas/detail/parallel.hpp>
#include <spblas/kernels.hpp>
#include <spblas/state.hpp>

namespace spblas {

namespace detail {

template <class V>
struct is_output_view : std::false_type {};
template <class T, class I, class O>
struct is_output_view<csr_view<T, I, O>> : std::true_type {};
template <class T, class I, class O>
struct is_output_view<csc_view<T, I, O>> : std::true_type {};
template <class T, class I, class O>
struct is_output_view<coo_view<T, I, O>> : std::true_type {};

template <class V>
concept output_view = is_output_view<V>::value;

// ---- producers -----------------------------------------------------------
//
// A producer describes the result row by row:
//   make_workspace()          per-thread scratch
//   count(i, ws)              number of entries in row i
//   emit(i, ws, sink)         sink(j, v) for each entry, ascending j

template <class T, class I, class O>
struct product_producer {
  row_access<T, I, O> a;
  row_access<T, I, O> b;
  std::optional<row_access<T, I, O>> d;
  T alpha;
  T beta;
  std::pmr::memory_resource* resource;

  struct workspace {
    std::pmr::vector<std::int64_t> marker;
    std::pmr::vector<std::int64_t> product_marker;
    std::pmr::vector<T> acc;
    std::pmr::vector<std::int64_t> cols;
  };

  std::int64_t ncols() const noexcept { return b.ncols; }

  workspace make_workspace() const {
    const auto n = static_cast<std::size_t>(ncols());
    return {std::pmr::vector<std::int64_t>(n, -1, resource),
            std::pmr::vector<std::int64_t>(n, -1, resource), std::pmr::vector<T>(n, T(0), resource),
            std::pmr::vector<std::int64_t>(resource)};
  }

  std::int64_t count(std::int64_t i, workspace& ws) const {
    std::int64_t n = 0;
    for (std::int64_t p = a.begin(i); p < a.end(i); ++p) {
      const std::int64_t k = a.col(p);
      for (std::int64_t q = b.begin(k); q < b.end(k); ++q) {
        const std::int64_t j = b.col(q);
        if (ws.marker[j] != i) {
          ws.marker[j] = i;
          ++n;
        }
      }
    }
    if (d) {
      for (std::int64_t q = d->begin(i); q < d->end(i); ++q) {
        const std::int64_t j = d->col(q);
        if (ws.marker[j] != i) {
          ws.marker[j] = i;
          ++n;
        }
      }
    }
    return n;
  }

  // The marker arrays are stamped with (row + 1) * -1 - 1 during emit so a
  // workspace shared with count() never sees stale stamps.
  template <class Sink>
  void emit(std::int64_t i, workspace& ws, Sink&& sink) const {
    const std::int64_t stamp = -2 - i;
    const bool read_products = alpha != T(0);
    const bool read_d = beta != T(0);
    ws.cols.clear();
    for (std::int64_t p = a.begin(i); p < a.end(i); ++p) {
      const std::int64_t k = a.col(p);
      const T av = read_products ? a.value(p) : T(0);
      for (std::int64_t q = b.begin(k); q < b.end(k); ++q) {
        const std::int64_t j = b.col(q);
        if (ws.marker[j] != stamp) {
          ws.marker[j] = stamp;
          ws.cols.push_back(j);
        }
        if (read_products) {
          const T term = av * b.value(q);
          if (ws.product_marker[j] != stamp) {
            ws.product_marker[j] = stamp;
            ws.acc[j] = term;
          } else {
            ws.acc[j] = ws.acc[j] + term;
          }
        }
      }
    }
    if (d) {
      for (std::int64_t q = d->begin(i); q < d->end(i); ++q) {
        const std::int64_t j = d->col(q);
        if (ws.marker[j] != stamp) {
          ws.marker[j] = stamp;
          ws.cols.push_back(j);
        }
      }
    }
    std::sort(ws.cols.begin(), ws.cols.end());
    // D's row is sorted, so it is merged by walking it alongside.
    std::int64_t q = d ? d->begin(i) : 0;
    const std::int64_t qe = d ? d->end(i) : 0;
    for (const std::int64_t j : ws.cols) {
      const bool has_product = ws.product_marker[j] == stamp;
      bool has_d = false;
      T dv(0);
      if (d && q < qe && d->col(q) == j) {
        has_d = true;
        if (read_d) dv = d->value(q);
        ++q;
      }
      const bool use_p = has_product && read_products;
      const bool use_d = has_d && read_d;
      T v(0);
      if (use_p && use_d) {
        v = apply_scale(alpha, ws.acc[j]) + apply_scale(beta, dv);
      } else if (use_p) {
        v = apply_scale(alpha, ws.acc[j]);
      } else if (use_d) {
        v = apply_scale(beta, dv);
      }
      sink(j, v);
    }
  }
};

// Merge of two sorted rows: union (add) or intersection (element-wise).
template <class T, class I, class O, bool Union>
struct merge_producer {
  row_access<T, I, O> a;
  row_access<T, I, O> b;
  T alpha;
  T beta;

  struct workspace {};
  workspace make_workspace() const { return {}; }

  template <class F>
  void walk(std::int64_t i, F&& f) const {
    std::int64_t p = a.begin(i);
    std::int64_t q = b.begin(i);
    const std::int64_t pe = a.end(i);
    const std::int64_t qe = b.end(i);
    while (p < pe || q < qe) {
      const std::int64_t ja = p < pe ? a.col(p) : std::numeric_limits<std::int64_t>::max();
      const std::int64_t jb = q < qe ? b.col(q) : std::numeric_limits<std::int64_t>::max();
      if (ja == jb) {
        f(ja, p++, q++);
      } else if (ja < jb) {
        if constexpr (Union) f(ja, p, std::int64_t{-1});
        ++p;
      } else {
        if constexpr (Union) f(jb, std::int64_t{-1}, q);
        ++q;
      }
    }
  }

  std::int64_t count(std::int64_t i, workspace&) const {
    std::int64_t n = 0;
    walk(i, [&](std::int64_t, std::int64_t, std::int64_t) { ++n; });
    return n;
  }

  T term_a(std::int64_t p) const { return alpha == T(0) ? T(0) : apply_scale(alpha, a.value(p)); }
  T term_b(std::int64_t q) const { return beta == T(0) ? T(0) : apply_scale(beta, b.value(q)); }

  template <class Sink>
  void emit(std::int64_t i, workspace&, Sink&& sink) const {
    walk(i, [&](std::int64_t j, std::int64_t p, std::int64_t q) {
      if constexpr (Union) {
        if (p >= 0 && q >= 0) {
          const bool ua = alpha != T(0);
          const bool ub = beta != T(0);
          if (ua && ub) {
            sink(j, term_a(p) + term_b(q));
          } else if (ua) {
            sink(j, term_a(p));
          } else if (ub) {
            sink(j, term_b(q));
          } else {
            sink(j, T(0));
          }
        } else if (p >= 0) {
          sink(j, term_a(p));
        } else {
          sink(j, term_b(q));
        }
      } else {
        if (alpha == T(0) || beta == T(0)) {
          sink(j, T(0));
        } else {
          sink(j, apply_scale(alpha, a.value(p)) * apply_scale(beta, b.value(q)));
        }
      }
    });
  }
};

// Stored entries of one matrix, optionally filtered by a per-entry bitmap.
template <class T, class I, class O>
struct rows_producer {
  row_access<T, I, O> a;
  T alpha;
  const std::uint8_t* keep = nullptr;

  struct workspace {};
  workspace make_workspace() const { return {}; }

  std::int64_t count(std::int64_t i, workspace&) const {
    if (!keep) return a.end(i) - a.begin(i);
    std::int64_t n = 0;
    for (std::int64_t p = a.begin(i); p < a.end(i); ++p) n += keep[p];
    return n;
  }

  template <class Sink>
  void emit(std::int64_t i, workspace&, Sink&& sink) const {
    for (std::int64_t p = a.begin(i); p < a.end(i); ++p) {
      if (!keep || keep[p]) sink(a.col(p), apply_scale(alpha, a.value(p)));
    }
  }
};

// Dense to sparse: keeps every entry that compares unequal to zero, so -0
// is dropped and NaN is kept.
template <class T>
struct dense_producer {
  dense_view<T> x;
  T alpha;

  struct workspace {};
  workspace make_workspace() const { return {}; }

  std::int64_t count(std::int64_t i, workspace&) const {
    std::int64_t n = 0;
    for (std::size_t j = 0; j < x.cols(); ++j) n += x(i, j) != T(0);
    return n;
  }

  template <class Sink>
  void emit(std::int64_t i, workspace&, Sink&& sink) const {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const T v = x(i, j);
      if (v != T(0)) sink(static_cast<std::int64_t>(j), apply_scale(alpha, v));
    }
  }
};

// ---- staged engine -------------------------------------------------------

template <class Producer>
void analyze(const execution_policy& policy, state_base& state, const Producer& producer,
             std::int64_t nrows, std::int64_t ncols, std::uint64_t fingerprint, bool reusable) {
  auto& staged = state.staged();
  if (reusable && staged.has_fingerprint && staged.fingerprint == fingerprint &&
      staged.out_nrows == nrows && staged.out_ncols == ncols &&
      static_cast<std::int64_t>(staged.row_offsets.size()) == nrows + 1) {
    return;
  }
  std::pmr::vector<std::int64_t> offsets(static_cast<std::size_t>(nrows) + 1, 0,
                                         state.resource());
  for_each_block_with(
      policy, nrows, 128, [&] { return producer.make_workspace(); },
      [&](std::int64_t b, std::int64_t e, auto& ws) {
        for (std::int64_t i = b; i < e; ++i) offsets[i + 1] = producer.count(i, ws);
      });
  for (std::int64_t i = 0; i < nrows; ++i) offsets[i + 1] += offsets[i];
  staged.row_offsets = std::move(offsets);
  staged.out_nrows = nrows;
  staged.out_ncols = ncols;
  staged.fingerprint = fingerprint;
  staged.has_fingerprint = true;
  state.set_result_nnz(staged.row_offsets.back());
  state.count_analysis();
}

struct fill_parts {
  bool structure = true;
  bool values = true;
};

template <class T>
void check_length(std::size_t got, std::int64_t want, const char* what) {
  if (static_cast<std::int64_t>(got) != want) {
    raise(error_category::output_length, std::string(what) + ": expected length " +
                                             std::to_string(want) + ", got " +
                                             std::to_string(got));
  }
}

// Writes the staged result into the caller's arrays. Nothing outside the
// checked lengths is touched.
template <class Producer, class T, class I, class O>
void emit_into(const execution_policy& policy, state_base& state, const Producer& producer,
               csr_view<T, I, O>& out, fill_parts parts) {
  const auto& offsets = state.staged().row_offsets;
  const std::int64_t nrows = state.staged().out_nrows;
  const std::int64_t nnz = offsets.back();
  const O base = static_cast<O>(static_cast<int>(out.base()));
  std::span<O> ro = out.row_offsets();
  std::span<I> ci = out.col_indices();
  std::span<T> vals;
  if (parts.structure) {
    check_length<T>(ro.size(), nrows + 1, "fill: row offsets");
    check_length<T>(ci.size(), nnz, "fill: column indices");
  }
  if (parts.values) {
    require_writable(out.values(), "fill");
    vals = out.values().span();
    check_length<T>(vals.size(), nnz, "fill: values");
  }
  if (parts.structure) {
    for (std::int64_t i = 0; i <= nrows; ++i) ro[i] = static_cast<O>(offsets[i]) + base;
  }
  for_each_block_with(
      policy, nrows, 128, [&] { return producer.make_workspace(); },
      [&](std::int64_t b, std::int64_t e, auto& ws) {
        for (std::int64_t i = b; i < e; ++i) {
          std::int64_t pos = offsets[i];
          producer.emit(i, ws, [&](std::int64_t j, T v) {
            if (parts.structure) ci[pos] = static_cast<I>(j + static_cast<std::int64_t>(base));
            if (parts.values) vals[pos] = v;
            ++pos;
          });
        }
      });
  out.set_nnz(static_cast<O>(nnz));
}

template <class Producer, class T, class I, class O>
void emit_into(const execution_policy& policy, state_base& state, const Producer& producer,
               coo_view<T, I, O>& out, fill_parts parts) {
  const auto& offsets = state.staged().row_offsets;
  const std::int64_t nrows = state.staged().out_nrows;
  const std::int64_t nnz = offsets.back();
  const std::int64_t base = static_cast<int>(out.base());
  std::span<I> ri = out.row_indices();
  std::span<I> ci = out.col_indices();
  std::span<T> vals;
  if (parts.structure) {
    check_length<T>(ri.size(), nnz, "fill: row indices");
    check_length<T>(ci.size(), nnz, "fill: column indices");
  }
  if (parts.values) {
    require_writable(out.values(), "fill");
    vals = out.values().span();
    check_length<T>(vals.size(), nnz, "fill: values");
  }
  for_each_block_with(
      policy, nrows, 128, [&] { return producer.make_workspace(); },
      [&](std::int64_t b, std::int64_t e, auto& ws) {
        for (std::int64_t i = b; i < e; ++i) {
          std::int64_t pos = offsets[i];
          producer.emit(i, ws, [&](std::int64_t j, T v) {
            if (parts.structure) {
              ri[pos] = static_cast<I>(i + base);
              ci[pos] = static_cast<I>(j + base);
            }
            if (parts.values) vals[pos] = v;
            ++pos;
          });
        }
      });
  out.set_nnz(static_cast<O>(nnz));
}

// CSC: rows are produced into library scratch, then scattered column by
// column with a stable counting sort.
template <class Producer, class T, class I, class O>
void emit_into(const execution_policy& policy, state_base& state, const Producer& producer,
               csc_view<T, I, O>& out, fill_parts parts) {
  const auto& offsets = state.staged().row_offsets;
  const std::int64_t nrows = state.staged().out_nrows;
  const std::int64_t ncols = state.staged().out_ncols;
  const std::int64_t nnz = offsets.back();
  const std::int64_t base = static_cast<int>(out.base());
  std::span<O> co = out.col_offsets();
  std::span<I> ri = out.row_indices();
  std::span<T> vals;
  if (parts.structure) {
    check_length<T>(co.size(), ncols + 1, "fill: column offsets");
    check_length<T>(ri.size(), nnz, "fill: row indices");
  }
  if (parts.values) {
    require_writable(out.values(), "fill");
    vals = out.values().span();
    check_length<T>(vals.size(), nnz, "fill: values");
  }
  auto* r = state.resource();
  std::pmr::vector<std::int64_t> cols(static_cast<std::size_t>(nnz), r);
  std::pmr::vector<T> tmp(static_cast<std::size_t>(nnz), r);
  for_each_block_with(
      policy, nrows, 128, [&] { return producer.make_workspace(); },
      [&](std::int64_t b, std::int64_t e, auto& ws) {
        for (std::int64_t i = b; i < e; ++i) {
          std::int64_t pos = offsets[i];
          producer.emit(i, ws, [&](std::int64_t j, T v) {
            cols[pos] = j;
            tmp[pos] = v;
            ++pos;
          });
        }
      });
  std::pmr::vector<std::int64_t> cursor(static_cast<std::size_t>(ncols) + 1, 0, r);
  for (auto j : cols) ++cursor[j + 1];
  for (std::int64_t j = 0; j < ncols; ++j) cursor[j + 1] += cursor[j];
  if (parts.structure) {
    for (std::int64_t j = 0; j <= ncols; ++j) co[j] = static_cast<O>(cursor[j] + base);
  }
  for (std::int64_t i = 0; i < nrows; ++i) {
    for (std::int64_t p = offsets[i]; p < offsets[i + 1]; ++p) {
      const std::int64_t dst = cursor[cols[p]]++;
      if (parts.structure) ri[dst] = static_cast<I>(i + base);
      if (parts.values) vals[dst] = tmp[p];
    }
  }
  out.set_nnz(static_cast<O>(nnz));
}

template <class V>
void require_output_extents(const V& out, std::int64_t nrows, std::int64_t ncols,
                            const char* what) {
  if (out.nrows() != nrows || out.ncols() != ncols) {
    raise(error_category::shape_mismatch,
          std::string(what) + ": output is " + std::to_string(out.nrows()) + "x" +
              std::to_string(out.ncols()) + ", result is " + std::to_string(nrows) + "x" +
              std::to_string(ncols));
  }
}

template <class T, class I, class O>
std::uint64_t fingerprint_of(op_kind kind, std::initializer_list<const sparse_operand<T, I, O>*> ops) {
  structure_hash h;
  h.mix(static_cast<std::int64_t>(kind));
  for (const auto* op : ops) {
    if (op) {
      mix_structure(h, *op);
    } else {
      h.mix(-1);
    }
  }
  return h.value();
}

// Phases from which a new compute (or symbolic compute) may start.
inline void require_compute_phase(const state_base& s, const char* call) {
  s.require_phase({phase::created, phase::inspected, phase::computed, phase::filled}, call);
}

inline void require_inspect_phase(const state_base& s, const char* call) {
  s.require_phase({phase::created, phase::inspected}, call);
}

// ---- sparse product plumbing ---------------------------------------------

template <class T, class I, class O>
struct product_inputs {
  sparse_operand<T, I, O> a;
  sparse_operand<T, I, O> b;
  std::optional<sparse_operand<T, I, O>> d;

  std::int64_t nrows() const { return a.nrows(); }
  std::int64_t ncols() const { return b.ncols(); }

  void check() const {
    if (a.ncols() != b.nrows()) {
      raise(error_category::shape_mismatch, "sparse_multiply: cols(op(A)) != rows(op(B))");
    }
    if (d && (d->nrows() != nrows() || d->ncols() != ncols())) {
      raise(error_category::shape_mismatch, "sparse_multiply: D does not conform to C");
    }
  }

  std::uint64_t fingerprint() const {
    return fingerprint_of<T, I, O>(op_kind::sparse_multiply, {&a, &b, d ? &*d : nullptr});
  }
};

template <class T, class I, class O>
struct product_scratch {
  row_scratch<T, I, O> a;
  row_scratch<T, I, O> b;
  row_scratch<T, I, O> d;
  explicit product_scratch(std::pmr::memory_resource* r) : a(r), b(r), d(r) {}
};

template <class T, class I, class O>
product_producer<T, I, O> make_product(const product_inputs<T, I, O>& in,
                                       product_scratch<T, I, O>& s,
                                       std::pmr::memory_resource* r) {
  product_producer<T, I, O> p{rows_of(in.a, s.a), rows_of(in.b, s.b), std::nullopt,
                              in.a.alpha * in.b.alpha, T(0), r};
  if (in.d) {
    p.d = rows_of(*in.d, s.d);
    p.beta = in.d->alpha;
  }
  return p;
}

template <class A, class B>
auto product_args(const A& a, const B& b) {
  using Op = decltype(to_operand(a));
  return product_inputs<typename Op::scalar_type, typename Op::index_type,
                        typename Op::offset_type>{to_operand(a), to_operand(b), std::nullopt};
}

template <class A, class B, class D>
auto product_args(const A& a, const B& b, const D& d) {
  auto in = product_args(a, b);
  in.d = to_operand(d);
  return in;
}

template <class T, class I, class O, class C>
void product_compute(const execution_policy& policy, state_base& state,
                     const product_inputs<T, I, O>& in, const C& c) {
  in.check();
  require_output_extents(c, in.nrows(), in.ncols(), "sparse_multiply");
  product_scratch<T, I, O> s(state.resource());
  const auto producer = make_product(in, s, state.resource());
  analyze(policy, state, producer, in.nrows(), in.ncols(), in.fingerprint(), true);
}

template <class T, class I, class O, class C>
void product_fill(const execution_policy& policy, state_base& state,
                  const product_inputs<T, I, O>& in, C& c, fill_parts parts) {
  in.check();
  require_output_extents(c, in.nrows(), in.ncols(), "sparse_multiply");
  if (in.fingerprint() != state.staged().fingerprint) {
    raise(error_category::stale_structure, "sparse_multiply: operand structure changed since compute");
  }
  product_scratch<T, I, O> s(state.resource());
  const auto producer = make_product(in, s, state.resource());
  emit_into(policy, state, producer, c, parts);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// sparse_multiply: C = alpha * op(A) * op(B) + beta * D. The pattern is the
// symbolic product pattern united with the pattern of D; numeric zeros are
// kept. alpha and beta come from scaled wrappers.

template <detail::sparse_argument A, detail::sparse_argument B, detail::output_view C>
void sparse_multiply_inspect(const execution_policy&, sparse_multiply_state_t& state, const A& a,
                             const B& b, const C&) {
  detail::require_inspect_phase(state, "sparse_multiply_inspect");
  auto in = detail::product_args(a, b);
  detail::cache_rows(in.a);
  detail::cache_rows(in.b);
  state.advance(phase::inspected);
}

template <detail::sparse_argument A, detail::sparse_argument B, detail::output_view C,
          detail::sparse_argument D>
void sparse_multiply_inspect(const execution_policy& policy, sparse_multiply_state_t& state,
                             const A& a, const B& b, const C& c, const D& d) {
  sparse_multiply_inspect(policy, state, a, b, c);
  detail::cache_rows(detail::to_operand(d));
}

template <detail::sparse_argument A, detail::sparse_argument B, detail::output_view C>
void sparse_multiply_compute(const execution_policy& policy, sparse_multiply_state_t& state,
                             const A& a, const B& b, const C& c) {
  detail::require_compute_phase(state, "sparse_multiply_compute");
  detail::product_compute(policy, state, detail::product_args(a, b), c);
  state.advance(phase::computed);
}

template <detail::sparse_argument A, detail::sparse_argument B, detail::output_view C,
          detail::sparse_argument D>
void sparse_multiply_compute(const execution_policy& policy, sparse_multiply_state_t& state,
                             const A& a, const B& b, const C& c, const D& d) {
  detail::require_compute_phase(state, "sparse_multiply_compute");
  detail::product_compute(policy, state, detail::product_args(a, b, d), c);
  state.advance(phase::computed);
}

template <detail::sparse_argument A, detail::sparse_argument B, detail::output_view C>
void sparse_multiply_fill(const execution_policy& policy, sparse_multiply_state_t& state,
                          const A& a, const B& b, C& c) {
  state.require_phase({phase::computed}, "sparse_multiply_fill");
  detail::product_fill(policy, state, detail::product_args(a, b), c, {});
  state.advance(phase::filled);
}

template <detail::sparse_argument A, detail::sparse_argument B, detail::output_view C,
          detail::sparse_argument D>
void sparse_multiply_fill(const execution_policy& policy, sparse_multiply_state_t& state,
                          const A& a, const B& b, C& c, const D& d) {
  state.require_phase({phase::computed}, "sparse_multiply_fill");
  detail::product_fill(policy, state, detail::product_args(a, b, d), c, {});
  state.advance(phase::filled);
}

// Symbolic/numeric split. symbolic_fill writes structure arrays only; the
// numeric pair may then be repeated while only values change.

namespace detail {

inline void require_symbolic_phase(const state_base& s, const char* call) {
  s.require_phase({phase::created, phase::inspected, phase::symbolic_computed,
                   phase::symbolic_filled, phase::numeric_filled},
                  call);
}

template <class T, class I, class O, class C>
void symbolic_compute(const execution_policy& policy, state_base& state,
                      const product_inputs<T, I, O>& in, const C& c) {
  require_symbolic_phase(state, "sparse_multiply_symbolic_compute");
  product_compute(policy, state, in, c);
  state.advance(phase::symbolic_computed);
}

template <class T, class I, class O, class C>
void symbolic_fill(const execution_policy& policy, state_base& state,
                   const product_inputs<T, I, O>& in, C& c) {
  state.require_phase({phase::symbolic_computed}, "sparse_multiply_symbolic_fill");
  product_fill(policy, state, in, c, {true, false});
  state.advance(phase::symbolic_filled);
}

template <class T, class I, class O, class C>
void numeric_compute(const execution_policy&, state_base& state,
                     const product_inputs<T, I, O>& in, const C& c) {
  state.require_phase({phase::symbolic_filled, phase::numeric_filled},
                      "sparse_multiply_numeric_compute");
  in.check();
  require_output_extents(c, in.nrows(), in.ncols(), "sparse_multiply");
  if (in.fingerprint() != state.staged().fingerprint) {
    raise(error_category::stale_structure,
          "sparse_multiply_numeric_compute: operand structure changed since symbolic phase");
  }
  state.advance(phase::numeric_computed);
}

template <class T, class I, class O, class C>
void numeric_fill(const execution_policy& policy, state_base& state,
                  const product_inputs<T, I, O>& in, C& c) {
  state.require_phase({phase::numeric_computed}, "sparse_multiply_numeric_fill");
  product_fill(policy, state, in, c, {false, true});
  state.advance(phase::numeric_filled);
}

}  // namespace detail

template <detail::sparse_argument A, detail::sparse_argument B, detail::output_view C>
void sparse_multiply_symbolic_compute(const execution_policy& policy,
                                      sparse_multiply_state_t& state, const A& a, const B& b,
                                      const C& c) {
  detail::symbolic_compute(policy, state, detail::product_args(a, b), c);
}

template <detail::sparse_argument A, detail::sparse_argument B, detail::output_view C,
          detail::sparse_argument D>
void sparse_multiply_symbolic_compute(const execution_policy& policy,
                                      sparse_multiply_state_t& state, const A& a, const B& b,
                                      const C& c, const D& d) {
  detail::symbolic_compute(policy, state, detail::product_args(a, b, d), c);
}

template <detail::sparse_argument A, detail::sparse_argument B, detail::output_view C>
void sparse_multiply_symbolic_fill(const execution_policy& policy, sparse_multiply_state_t& state,
                                   const A& a, const B& b, C& c) {
  detail::symbolic_fill(policy, state, detail::product_args(a, b), c);
}

template <detail::sparse_argument A, detail::sparse_argument B, detail::output_view C,
          detail::sparse_argument D>
void sparse_multiply_symbolic_fill(const execution_policy& policy, sparse_multiply_state_t& state,
                                   const A& a, const B& b, C& c, const D& d) {
  detail::symbolic_fill(policy, state, detail::product_args(a, b, d), c);
}

template <detail::sparse_argument A, detail::sparse_argument B, detail::output_view C>
void sparse_multiply_numeric_compute(const execution_policy& policy,
                                     sparse_multiply_state_t& state, const A& a, const B& b,
                                     const C& c) {
  detail::numeric_compute(policy, state, detail::product_args(a, b), c);
}

template <detail::sparse_argument A, detail::sparse_argument B, detail::output_view C,
          detail::sparse_argument D>
void sparse_multiply_numeric_compute(const execution_policy& policy,
                                     sparse_multiply_state_t& state, const A& a, const B& b,
                                     const C& c, const D& d) {
  detail::numeric_compute(policy, state, detail::product_args(a, b, d), c);
}

template <detail::sparse_argument A, detail::sparse_argument B, detail::output_view C>
void sparse_multiply_numeric_fill(const execution_policy& policy, sparse_multiply_state_t& state,
                                  const A& a, const B& b, C& c) {
  detail::numeric_fill(policy, state, detail::product_args(a, b), c);
}

template <detail::sparse_argument A, detail::sparse_argument B, detail::output_view C,
          detail::sparse_argument D>
void sparse_multiply_numeric_fill(const execution_policy& policy, sparse_multiply_state_t& state,
                                  const A& a, const B& b, C& c, const D& d) {
  detail::numeric_fill(policy, state, detail::product_args(a, b, d), c);
}

// ---------------------------------------------------------------------------
// Two-operand families sharing one staged driver.

namespace detail {

template <op_kind K, bool Union, class A, class B, class C>
void merge_stage(const execution_policy& policy, state_base& state, const A& a_arg,
                 const B& b_arg, C& c, bool fill, const char* name) {
  auto a = to_operand(a_arg);
  auto b = to_operand(b_arg);
  using Op = decltype(a);
  using T = typename Op::scalar_type;
  using I = typename Op::index_type;
  using O = typename Op::offset_type;
  if (a.nrows() != b.nrows() || a.ncols() != b.ncols()) {
    raise(error_category::shape_mismatch, std::string(name) + ": operand extents differ");
  }
  require_output_extents(c, a.nrows(), a.ncols(), name);
  row_scratch<T, I, O> sa(state.resource());
  row_scratch<T, I, O> sb(state.resource());
  merge_producer<T, I, O, Union> producer{rows_of(a, sa), rows_of(b, sb), a.alpha, b.alpha};
  const auto fp = fingerprint_of<T, I, O>(K, {&a, &b});
  if (!fill) {
    analyze(policy, state, producer, a.nrows(), a.ncols(), fp, true);
  } else {
    if (fp != state.staged().fingerprint) {
      raise(error_category::stale_structure, std::string(name) + ": operand structure changed");
    }
    emit_into(policy, state, producer, c, {});
  }
}

}  // namespace detail

// add: C = A + B (alpha/beta via scaled wrappers). Pattern is the union.

template <detail::sparse_argument A, detail::sparse_argument B, detail::output_view C>
void add_inspect(const execution_policy&, add_state_t& state, const A& a, const B& b, const C&) {
  detail::require_inspect_phase(state, "add_inspect");
  detail::cache_rows(detail::to_operand(a));
  detail::cache_rows(detail::to_operand(b));
  state.advance(phase::inspected);
}

template <detail::sparse_argument A, detail::sparse_argument B, detail::output_view C>
void add_compute(const execution_policy& policy, add_state_t& state, const A& a, const B& b,
                 const C& c) {
  detail::require_compute_phase(state, "add_compute");
  C shell = c;
  detail::merge_stage<op_kind::add, true>(policy, state, a, b, shell, false, "add_compute");
  state.advance(phase::computed);
}

template <detail::sparse_argument A, detail::sparse_argument B, detail::output_view C>
void add_fill(const execution_policy& policy, add_state_t& state, const A& a, const B& b, C& c) {
  state.require_phase({phase::computed}, "add_fill");
  detail::merge_stage<op_kind::add, true>(policy, state, a, b, c, true, "add_fill");
  state.advance(phase::filled);
}

// multiply_elementwise: C = A .* B. Pattern is the intersection.

template <detail::sparse_argument A, detail::sparse_argument B, detail::output_view C>
void multiply_elementwise_inspect(const execution_policy&, multiply_elementwise_state_t& state,
                                  const A& a, const B& b, const C&) {
  detail::require_inspect_phase(state, "multiply_elementwise_inspect");
  detail::cache_rows(detail::to_operand(a));
  detail::cache_rows(detail::to_operand(b));
  state.advance(phase::inspected);
}

template <detail::sparse_argument A, detail::sparse_argument B, detail::output_view C>
void multiply_elementwise_compute(const execution_policy& policy,
                                  multiply_elementwise_state_t& state, const A& a, const B& b,
                                  const C& c) {
  detail::require_compute_phase(state, "multiply_elementwise_compute");
  C shell = c;
  detail::merge_stage<op_kind::multiply_elementwise, false>(policy, state, a, b, shell, false,
                                                             "multiply_elementwise_compute");
  state.advance(phase::computed);
}

template <detail::sparse_argument A, detail::sparse_argument B, detail::output_view C>
void multiply_elementwise_fill(const execution_policy& policy,
                               multiply_elementwise_state_t& state, const A& a, const B& b,
                               C& c) {
  state.require_phase({phase::computed}, "multiply_elementwise_fill");
  detail::merge_stage<op_kind::multiply_elementwise, false>(policy, state, a, b, c, true,
                                                             "multiply_elementwise_fill");
  state.advance(phase::filled);
}

// ---------------------------------------------------------------------------
// convert: B = sparse(A). Sparse sources keep every stored entry, explicit
// zeros included; dense sources keep entries that compare unequal to zero.

namespace detail {

template <class A, class C>
void convert_stage(const execution_policy& policy, state_base& state, const A& a_arg, C& c,
                   bool fill) {
  if constexpr (dense_argument<A>) {
    const auto a = to_dense_operand(a_arg);
    using T = typename decltype(a.view)::scalar_type;
    require_dense_storage(a.view, "convert");
    const auto nrows = static_cast<std::int64_t>(a.view.rows());
    const auto ncols = static_cast<std::int64_t>(a.view.cols());
    require_output_extents(c, nrows, ncols, "convert");
    dense_producer<T> producer{a.view, a.alpha};
    if (!fill) {
      // Dense values decide the pattern, so nothing is reusable.
      analyze(policy, state, producer, nrows, ncols, 0, false);
    } else {
      emit_into(policy, state, producer, c, {});
    }
  } else {
    auto a = to_operand(a_arg);
    using Op = decltype(a);
    using T = typename Op::scalar_type;
    using I = typename Op::index_type;
    using O = typename Op::offset_type;
    require_output_extents(c, a.nrows(), a.ncols(), "convert");
    row_scratch<T, I, O> s(state.resource());
    rows_producer<T, I, O> producer{rows_of(a, s), a.alpha, nullptr};
    const auto fp = fingerprint_of<T, I, O>(op_kind::convert, {&a});
    if (!fill) {
      analyze(policy, state, producer, a.nrows(), a.ncols(), fp, true);
    } else {
      if (fp != state.staged().fingerprint) {
        raise(error_category::stale_structure, "convert_fill: operand structure changed");
      }
      emit_into(policy, state, producer, c, {});
    }
  }
}

}  // namespace detail

template <class A, detail::output_view C>
  requires(detail::sparse_argument<A> || detail::dense_argument<A>)
void convert_inspect(const execution_policy&, convert_state_t& state, const A& a, const C&) {
  detail::require_inspect_phase(state, "convert_inspect");
  if constexpr (detail::sparse_argument<A>) detail::cache_rows(detail::to_operand(a));
  state.advance(phase::inspected);
}

template <class A, detail::output_view C>
  requires(detail::sparse_argument<A> || detail::dense_argument<A>)
void convert_compute(const execution_policy& policy, convert_state_t& state, const A& a,
                     const C& c) {
  detail::require_compute_phase(state, "convert_compute");
  C shell = c;
  detail::convert_stage(policy, state, a, shell, false);
  state.advance(phase::computed);
}

template <class A, detail::output_view C>
  requires(detail::sparse_argument<A> || detail::dense_argument<A>)
void convert_fill(const execution_policy& policy, convert_state_t& state, const A& a, C& c) {
  state.require_phase({phase::computed}, "convert_fill");
  detail::convert_stage(policy, state, a, c, true);
  state.advance(phase::filled);
}

// ---------------------------------------------------------------------------
// filter: B = entries of A for which pred(i, j, v) holds, with 0-based
// logical indices of op(A) and v the value after scaling. compute records
// every decision; fill replays them and never calls pred.

template <detail::sparse_argument A, detail::output_view C, class Pred>
void filter_compute(const execution_policy& policy, filter_state_t& state, const A& a_arg,
                    const C& c, Pred&& pred) {
  detail::require_compute_phase(state, "filter_compute");
  auto a = detail::to_operand(a_arg);
  using Op = decltype(a);
  using T = typename Op::scalar_type;
  detail::require_output_extents(c, a.nrows(), a.ncols(), "filter_compute");
  detail::row_scratch<T, typename Op::index_type, typename Op::offset_type> s(state.resource());
  const auto rows = detail::rows_of(a, s);
  std::pmr::vector<std::uint8_t> keep(static_cast<std::size_t>(rows.nnz()), 0, state.resource());
  // pred is user code: evaluated sequentially, in row order.
  for (std::int64_t i = 0; i < rows.nrows; ++i) {
    for (std::int64_t p = rows.begin(i); p < rows.end(i); ++p) {
      keep[p] = pred(i, rows.col(p), detail::apply_scale(a.alpha, rows.value(p))) ? 1 : 0;
    }
  }
  detail::rows_producer<T, typename Op::index_type, typename Op::offset_type> producer{
      rows, a.alpha, keep.data()};
  const auto fp = detail::fingerprint_of<T, typename Op::index_type, typename Op::offset_type>(
      op_kind::filter, {&a});
  detail::analyze(policy, state, producer, a.nrows(), a.ncols(), fp, false);
  state.staged().keep = std::move(keep);
  state.advance(phase::computed);
}

template <detail::sparse_argument A, detail::output_view C, class Pred>
void filter_fill(const execution_policy& policy, filter_state_t& state, const A& a_arg, C& c,
                 Pred&&) {
  state.require_phase({phase::computed}, "filter_fill");
  auto a = detail::to_operand(a_arg);
  using Op = decltype(a);
  using T = typename Op::scalar_type;
  detail::require_output_extents(c, a.nrows(), a.ncols(), "filter_fill");
  const auto fp = detail::fingerprint_of<T, typename Op::index_type, typename Op::offset_type>(
      op_kind::filter, {&a});
  if (fp != state.staged().fingerprint) {
    raise(error_category::stale_structure, "filter_fill: operand structure changed");
  }
  detail::row_scratch<T, typename Op::index_type, typename Op::offset_type> s(state.resource());
  detail::rows_producer<T, typename Op::index_type, typename Op::offset_type> producer{
      detail::rows_of(a, s), a.alpha, state.staged().keep.data()};
  detail::emit_into(policy, state, producer, c, {});
  state.advance(phase::filled);
}

// ---------------------------------------------------------------------------
// transpose: B = A^T, or A^H when conjugate is set. nnz(B) == nnz(A).

template <detail::sparse_argument A, detail::output_view C>
void transpose_compute(const execution_policy& policy, transpose_state_t& state, const A& a,
                       const C& c, bool conjugate = false) {
  detail::require_compute_phase(state, "transpose_compute");
  C shell = c;
  detail::convert_stage(policy, state, transposed(a, conjugate), shell, false);
  state.advance(phase::computed);
}

template <detail::sparse_argument A, detail::output_view C>
void transpose_fill(const execution_policy& policy, transpose_state_t& state, const A& a, C& c,
                    bool conjugate = false) {
  state.require_phase({phase::computed}, "transpose_fill");
  detail::convert_stage(policy, state, transposed(a, conjugate), c, true);
  state.advance(phase::filled);
}

}  // namespace spblas
