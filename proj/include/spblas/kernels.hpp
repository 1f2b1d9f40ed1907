#pragma once

// Single-stage operations: the output structure is known before the call.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory_resource>
#include <optional>
#include <string>
#include <vector>

#include <spblas/detail/operand.hpp>
#include <spblas/detail/parallel.hpp>
#include <spblas/state.hpp>

namespace spblas {

namespace detail {

template <class T>
real_t<T> squared_magnitude(T v) noexcept {
  if constexpr (is_complex_v<T>) {
    return std::norm(v);
  } else {
    return v * v;
  }
}

// Fixed-size chunk partial sums combined pairwise. Grouping depends only
// on the number of terms, never on the thread count.
template <class R, class F>
R chunked_tree_sum(const execution_policy& policy, std::int64_t n, F&& term) {
  constexpr std::int64_t chunk = 256;
  const std::int64_t nchunks = std::max<std::int64_t>((n + chunk - 1) / chunk, 1);
  std::vector<R> partial(static_cast<std::size_t>(nchunks), R(0));
  for_each_block(policy, n, chunk, [&](std::int64_t b, std::int64_t e) {
    R s = 0;
    for (std::int64_t k = b; k < e; ++k) s += term(k);
    partial[static_cast<std::size_t>(b / chunk)] = s;
  });
  for (std::size_t width = 1; width < partial.size(); width *= 2) {
    for (std::size_t i = 0; i + width < partial.size(); i += 2 * width) {
      partial[i] += partial[i + width];
    }
  }
  return partial[0];
}

// One contiguous block per thread, combined in thread order. Reproducible
// for a fixed thread count only.
template <class R, class F>
R per_thread_sum(const execution_policy& policy, std::int64_t n, F&& term) {
  const std::int64_t nthreads = block_count_for_threads(policy);
  const std::int64_t grain = std::max<std::int64_t>((n + nthreads - 1) / nthreads, 1);
  std::vector<R> partial(static_cast<std::size_t>(nthreads), R(0));
  for_each_block(policy, n, grain, [&](std::int64_t b, std::int64_t e) {
    R s = 0;
    for (std::int64_t k = b; k < e; ++k) s += term(k);
    partial[static_cast<std::size_t>(b / grain)] = s;
  });
  R total = 0;
  for (auto p : partial) total += p;
  return total;
}

template <class T>
void require_writable(const value_array<T>& v, const char* what) {
  if (!v.writable()) {
    raise(error_category::read_only_values, std::string(what) + ": values are iso-valued");
  }
}

template <class T>
void require_vector_length(const dense_view<T>& v, std::int64_t n, const char* what) {
  if (static_cast<std::int64_t>(v.size()) != n || v.data().size() < v.size()) {
    raise(error_category::shape_mismatch,
          std::string(what) + ": expected length " + std::to_string(n) + ", got " +
              std::to_string(v.size()));
  }
}

template <class T>
void require_dense_storage(const dense_view<T>& v, const char* what) {
  if (v.data().size() < v.size()) {
    raise(error_category::shape_mismatch, std::string(what) + ": data shorter than extents");
  }
}

template <class T>
bool same_dense(const dense_view<T>& a, const dense_view<T>& b) noexcept {
  return a.data().data() == b.data().data() && a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.cols() == 1 || a.rows() == 1 || a.memory_layout() == b.memory_layout());
}

// Y = alpha * op(A) * X + beta * D over every column of X. Accumulation per
// output element follows the stored order of row i, starting from the first
// product (no leading +0).
template <class T, class I, class O>
void multiply_impl(const execution_policy& policy, multiply_state_t& state,
                   const sparse_operand<T, I, O>& a, const dense_operand<T>& x,
                   const std::optional<dense_operand<T>>& d, const dense_view<T>& y) {
  const std::int64_t m = a.nrows();
  const std::int64_t k = a.ncols();
  require_dense_storage(x.view, "multiply: X");
  require_dense_storage(y, "multiply: Y");
  if (static_cast<std::int64_t>(x.view.rows()) != k ||
      static_cast<std::int64_t>(y.rows()) != m || x.view.cols() != y.cols()) {
    raise(error_category::shape_mismatch, "multiply: op(A) is " + std::to_string(m) + "x" +
                                              std::to_string(k) + ", X is " +
                                              std::to_string(x.view.rows()) + "x" +
                                              std::to_string(x.view.cols()) + ", Y is " +
                                              std::to_string(y.rows()) + "x" +
                                              std::to_string(y.cols()));
  }
  if (overlap(x.view, y)) raise(error_category::aliasing, "multiply: X overlaps Y");
  if (d) {
    require_dense_storage(d->view, "multiply: D");
    if (d->view.rows() != y.rows() || d->view.cols() != y.cols()) {
      raise(error_category::shape_mismatch, "multiply: D does not conform to Y");
    }
    if (overlap(d->view, y) && !same_dense(d->view, y)) {
      raise(error_category::aliasing, "multiply: D partially overlaps Y");
    }
  }

  const T alpha = a.alpha * x.alpha;
  const T beta = d ? d->alpha : T(0);
  const bool read_d = d.has_value() && beta != T(0);
  const std::int64_t ncol = static_cast<std::int64_t>(y.cols());

  if (alpha == T(0)) {
    for_each_row(policy, m, [&](std::int64_t i) {
      for (std::int64_t c = 0; c < ncol; ++c) {
        y(i, c) = read_d ? apply_scale(beta, d->view(i, c)) : T(0);
      }
    });
    state.advance(phase::executed);
    return;
  }

  row_scratch<T, I, O> scratch(state.resource());
  const auto rows = rows_of(a, scratch);
  const auto& xv = x.view;
  for_each_row(policy, m, [&](std::int64_t i) {
    const std::int64_t b = rows.begin(i);
    const std::int64_t e = rows.end(i);
    for (std::int64_t c = 0; c < ncol; ++c) {
      T sum(0);
      for (std::int64_t p = b; p < e; ++p) {
        const T term = rows.value(p) * xv(static_cast<std::size_t>(rows.col(p)), c);
        sum = p == b ? term : sum + term;
      }
      T out = apply_scale(alpha, sum);
      if (read_d) out = out + apply_scale(beta, d->view(i, c));
      y(i, c) = out;
    }
  });
  state.advance(phase::executed);
}

template <class T, class I, class O>
void inspect_rows(const sparse_operand<T, I, O>& a) {
  if (!a.store) return;
  cache_rows(a);
  auto& lengths = a.store->row_lengths[a.transpose ? 1 : 0];
  if (lengths) return;
  row_scratch<T, I, O> scratch(a.store->resource);
  const auto rows = rows_of(a, scratch);
  std::pmr::vector<O> counts(static_cast<std::size_t>(rows.nrows), O{0}, a.store->resource);
  for (std::int64_t i = 0; i < rows.nrows; ++i) counts[i] = static_cast<O>(rows.end(i) - rows.begin(i));
  lengths.emplace(std::move(counts));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// scale: A := alpha * A in place. The pattern never changes, including for
// entries that become numeric zero.

template <detail::sparse_argument A>
void scale_inspect(const execution_policy&, scale_state_t& state, const A& a) {
  (void)detail::to_operand(a);
  state.advance(phase::inspected);
}

template <detail::sparse_argument A>
void scale(const execution_policy& policy, scale_state_t& state, typename A::scalar_type alpha,
           const A& a) {
  auto op = detail::to_operand(a);
  using T = typename A::scalar_type;
  detail::require_writable(op.values(), "scale");
  // op(A) := alpha * op(A) means A := conj(alpha) * A under conjugation.
  const T factor = op.conjugate ? detail::conj_value(alpha) : alpha;
  if (factor != T(1)) {
    auto values = op.values().span();
    detail::for_each_block(policy, static_cast<std::int64_t>(values.size()), 4096,
                           [&](std::int64_t b, std::int64_t e) {
                             for (std::int64_t k = b; k < e; ++k) values[k] = factor * values[k];
                           });
  }
  state.advance(phase::executed);
}

// ---------------------------------------------------------------------------
// Norms of alpha * op(A). Implicit zeros contribute nothing; a NaN among the
// stored values propagates.

template <detail::sparse_argument A>
void matrix_inf_norm_inspect(const execution_policy&, matrix_inf_norm_state_t& state,
                             const A& a) {
  detail::inspect_rows(detail::to_operand(a));
  state.advance(phase::inspected);
}

template <detail::sparse_argument A>
real_t<typename A::scalar_type> matrix_inf_norm(const execution_policy& policy,
                                                matrix_inf_norm_state_t& state, const A& a) {
  using T = typename A::scalar_type;
  using R = real_t<T>;
  auto op = detail::to_operand(a);
  state.advance(phase::executed);
  if (op.alpha == T(0)) return R(0);
  using Op = decltype(op);
  detail::row_scratch<T, typename Op::index_type, typename Op::offset_type> scratch(
      state.resource());
  const auto rows = detail::rows_of(op, scratch);
  std::vector<R> row_sums(static_cast<std::size_t>(rows.nrows), R(0));
  detail::for_each_row(policy, rows.nrows, [&](std::int64_t i) {
    R s = 0;
    for (std::int64_t p = rows.begin(i); p < rows.end(i); ++p) s += std::abs(rows.value(p));
    row_sums[i] = s;
  });
  R best = 0;
  for (R s : row_sums) {
    if (std::isnan(s)) return s * std::abs(op.alpha);
    if (s > best) best = s;
  }
  return std::abs(op.alpha) * best;
}

template <detail::sparse_argument A>
real_t<typename A::scalar_type> matrix_inf_norm(matrix_inf_norm_state_t& state, const A& a) {
  return matrix_inf_norm(seq, state, a);
}

template <detail::sparse_argument A>
void matrix_frob_norm_inspect(const execution_policy&, matrix_frob_norm_state_t& state,
                              const A& a) {
  (void)detail::to_operand(a);
  state.advance(phase::inspected);
}

/// sqrt(sum |v|^2) over stored entries. deterministic_parallel or
/// strict_cnr use fixed 256-entry chunks combined pairwise whatever the
/// thread count; otherwise a sequential policy sums in storage order and a
/// parallel one sums one block per thread.
template <detail::sparse_argument A>
real_t<typename A::scalar_type> matrix_frob_norm(const execution_policy& policy,
                                                 matrix_frob_norm_state_t& state, const A& a) {
  using T = typename A::scalar_type;
  using R = real_t<T>;
  auto op = detail::to_operand(a);
  state.advance(phase::executed);
  if (op.alpha == T(0)) return R(0);
  const auto& values = op.values();
  const std::int64_t n = op.nnz();
  auto term = [&](std::int64_t k) { return detail::squared_magnitude(values[k]); };
  R sum = 0;
  if (policy.mode == execution_mode::deterministic_parallel ||
      detail::effective_cnr(policy) == cnr_property::strict_cnr) {
    sum = detail::chunked_tree_sum<R>(policy, n, term);
  } else if (!policy.is_parallel()) {
    for (std::int64_t k = 0; k < n; ++k) sum += term(k);
  } else {
    sum = detail::per_thread_sum<R>(policy, n, term);
  }
  return std::abs(op.alpha) * std::sqrt(sum);
}

template <detail::sparse_argument A>
real_t<typename A::scalar_type> matrix_frob_norm(matrix_frob_norm_state_t& state, const A& a) {
  return matrix_frob_norm(seq, state, a);
}

// ---------------------------------------------------------------------------
// multiply: y = alpha * op(A) * x (three operands) or Y = op(A) * X + D
// (four operands, alpha and beta supplied through scaled wrappers). D may be
// Y itself. alpha == 0 reads neither A nor X; beta == 0 never reads D.

template <detail::sparse_argument A, detail::dense_argument X, class T>
void multiply_inspect(const execution_policy&, multiply_state_t& state, const A& a, const X&,
                      const dense_view<T>&) {
  detail::inspect_rows(detail::to_operand(a));
  state.advance(phase::inspected);
}

template <detail::sparse_argument A, detail::dense_argument X, detail::dense_argument D, class T>
void multiply_inspect(const execution_policy&, multiply_state_t& state, const A& a, const X&,
                      const D&, const dense_view<T>&) {
  detail::inspect_rows(detail::to_operand(a));
  state.advance(phase::inspected);
}

template <detail::sparse_argument A, detail::dense_argument X, class T>
void multiply(const execution_policy& policy, multiply_state_t& state, const A& a, const X& x,
              const dense_view<T>& y) {
  detail::multiply_impl(policy, state, detail::to_operand(a), detail::to_dense_operand(x),
                        std::optional<detail::dense_operand<T>>{}, y);
}

template <detail::sparse_argument A, detail::dense_argument X, detail::dense_argument D, class T>
void multiply(const execution_policy& policy, multiply_state_t& state, const A& a, const X& x,
              const D& d, const dense_view<T>& y) {
  detail::multiply_impl(policy, state, detail::to_operand(a), detail::to_dense_operand(x),
                        std::optional<detail::dense_operand<T>>(detail::to_dense_operand(d)), y);
}

// ---------------------------------------------------------------------------
// triangular_solve: T x = b with T stored physically lower or upper
// triangular; the orientation is read from the pattern. Every diagonal
// entry must be stored and nonzero.

namespace detail {

struct triangle_info {
  bool lower = true;
  std::vector<std::int64_t> diagonal;  // access position of each diagonal entry
};

template <class T, class I, class O>
triangle_info analyze_triangle(const row_access<T, I, O>& rows) {
  triangle_info info;
  bool lower = true;
  bool upper = true;
  info.diagonal.assign(static_cast<std::size_t>(rows.nrows), -1);
  for (std::int64_t i = 0; i < rows.nrows; ++i) {
    for (std::int64_t p = rows.begin(i); p < rows.end(i); ++p) {
      const std::int64_t j = rows.col(p);
      if (j > i) lower = false;
      if (j < i) upper = false;
      if (j == i) info.diagonal[i] = p;
    }
  }
  if (!lower && !upper) {
    raise(error_category::pattern, "triangular_solve: stored pattern is neither lower nor upper");
  }
  info.lower = lower;
  for (std::int64_t i = 0; i < rows.nrows; ++i) {
    if (info.diagonal[i] < 0) {
      raise(error_category::singular_structure,
            "triangular_solve: no stored diagonal entry in row " + std::to_string(i));
    }
    if (rows.value(info.diagonal[i]) == T(0)) {
      raise(error_category::numeric_singularity,
            "triangular_solve: zero diagonal entry in row " + std::to_string(i));
    }
  }
  return info;
}

template <class T, class I, class O>
void build_levels(const row_access<T, I, O>& rows, bool lower, level_schedule<I, O>& out) {
  const std::int64_t n = rows.nrows;
  std::vector<std::int64_t> level(static_cast<std::size_t>(n), 0);
  std::int64_t depth = 0;
  for (std::int64_t s = 0; s < n; ++s) {
    const std::int64_t i = lower ? s : n - 1 - s;
    std::int64_t l = 0;
    for (std::int64_t p = rows.begin(i); p < rows.end(i); ++p) {
      const std::int64_t j = rows.col(p);
      if (j != i) l = std::max(l, level[j] + 1);
    }
    level[i] = l;
    depth = std::max(depth, l + 1);
  }
  out.lower = lower;
  out.level_offsets.assign(static_cast<std::size_t>(depth) + 1, O{0});
  for (std::int64_t i = 0; i < n; ++i) ++out.level_offsets[level[i] + 1];
  for (std::int64_t l = 0; l < depth; ++l) out.level_offsets[l + 1] += out.level_offsets[l];
  out.rows.resize(static_cast<std::size_t>(n));
  std::vector<O> cursor(out.level_offsets.begin(), out.level_offsets.end() - 1);
  for (std::int64_t i = 0; i < n; ++i) out.rows[cursor[level[i]]++] = static_cast<I>(i);
}

template <class T, class I, class O>
void solve_row(const row_access<T, I, O>& rows, std::int64_t i, std::int64_t diag,
               const dense_view<T>& b, const dense_view<T>& x) {
  T s = b[static_cast<std::size_t>(i)];
  for (std::int64_t p = rows.begin(i); p < rows.end(i); ++p) {
    if (p == diag) continue;
    s -= rows.value(p) * x[static_cast<std::size_t>(rows.col(p))];
  }
  x[static_cast<std::size_t>(i)] = s / rows.value(diag);
}

}  // namespace detail

template <detail::sparse_argument A, class T>
void triangular_solve_inspect(const execution_policy&, triangular_solve_state_t& state,
                              const A& t, const dense_view<T>&, const dense_view<T>&) {
  auto op = detail::to_operand(t);
  using Op = decltype(op);
  if (op.store) {
    detail::cache_rows(op);
    auto& slot = op.store->levels[op.transpose ? 1 : 0];
    if (!slot && op.nrows() == op.ncols()) {
      detail::row_scratch<T, typename Op::index_type, typename Op::offset_type> scratch(
          op.store->resource);
      const auto rows = detail::rows_of(op, scratch);
      const auto info = detail::analyze_triangle(rows);
      detail::level_schedule<typename Op::index_type, typename Op::offset_type> levels(
          op.store->resource);
      detail::build_levels(rows, info.lower, levels);
      slot.emplace(std::move(levels));
    }
  }
  state.advance(phase::inspected);
}

template <detail::sparse_argument A, class T>
void triangular_solve(const execution_policy& policy, triangular_solve_state_t& state,
                      const A& t, const dense_view<T>& b, const dense_view<T>& x) {
  auto op = detail::to_operand(t);
  using I = typename decltype(op)::index_type;
  using O = typename decltype(op)::offset_type;
  if (op.alpha != T(1)) {
    raise(error_category::unsupported, "triangular_solve: scaled operand");
  }
  const std::int64_t n = op.nrows();
  if (op.ncols() != n) raise(error_category::shape_mismatch, "triangular_solve: T is not square");
  detail::require_vector_length(b, n, "triangular_solve: b");
  detail::require_vector_length(x, n, "triangular_solve: x");
  if (detail::overlap(b, x)) raise(error_category::aliasing, "triangular_solve: b overlaps x");

  detail::row_scratch<T, I, O> scratch(state.resource());
  const auto rows = detail::rows_of(op, scratch);
  const auto info = detail::analyze_triangle(rows);

  if (!policy.is_parallel()) {
    for (std::int64_t s = 0; s < n; ++s) {
      const std::int64_t i = info.lower ? s : n - 1 - s;
      detail::solve_row(rows, i, info.diagonal[i], b, x);
    }
    state.advance(phase::executed);
    return;
  }

  // Level by level; rows of one level are independent. Each row performs
  // the same operations as in the sequential order.
  const detail::level_schedule<I, O>* levels = nullptr;
  std::optional<detail::level_schedule<I, O>> local;
  if (op.store) {
    const auto& cached = op.store->levels[op.transpose ? 1 : 0];
    if (cached && cached->lower == info.lower) levels = &*cached;
  }
  if (!levels) {
    local.emplace(state.resource());
    detail::build_levels(rows, info.lower, *local);
    levels = &*local;
  }
  const std::int64_t depth = static_cast<std::int64_t>(levels->level_offsets.size()) - 1;
  for (std::int64_t l = 0; l < depth; ++l) {
    const std::int64_t lb = levels->level_offsets[l];
    const std::int64_t le = levels->level_offsets[l + 1];
    detail::for_each_row(policy, le - lb, [&](std::int64_t r) {
      const std::int64_t i = levels->rows[lb + r];
      detail::solve_row(rows, i, info.diagonal[i], b, x);
    });
  }
  state.advance(phase::executed);
}

// ---------------------------------------------------------------------------
// sampled_multiply: for every stored (i, j) of C, C(i, j) = sum_t X(i, t) Y(t, j).
// The pattern of C is the mask; positions outside it are untouched.

template <detail::dense_argument X, detail::dense_argument Y, detail::sparse_argument C>
void sampled_multiply_inspect(const execution_policy&, sampled_multiply_state_t& state,
                              const X&, const Y&, const C& c) {
  (void)detail::to_operand(c);
  state.advance(phase::inspected);
}

template <detail::dense_argument X, detail::dense_argument Y, detail::sparse_argument C>
void sampled_multiply(const execution_policy& policy, sampled_multiply_state_t& state,
                      const X& x_arg, const Y& y_arg, const C& c_arg) {
  using T = typename C::scalar_type;
  auto c = detail::to_operand(c_arg);
  const auto x = detail::to_dense_operand(x_arg);
  const auto y = detail::to_dense_operand(y_arg);
  if (c.transpose || c.conjugate || c.alpha != T(1)) {
    raise(error_category::unsupported, "sampled_multiply: output must be a plain view");
  }
  detail::require_dense_storage(x.view, "sampled_multiply: X");
  detail::require_dense_storage(y.view, "sampled_multiply: Y");
  const std::int64_t m = c.nrows();
  const std::int64_t n = c.ncols();
  const std::int64_t k = static_cast<std::int64_t>(x.view.cols());
  if (static_cast<std::int64_t>(x.view.rows()) != m ||
      static_cast<std::int64_t>(y.view.rows()) != k ||
      static_cast<std::int64_t>(y.view.cols()) != n) {
    raise(error_category::shape_mismatch, "sampled_multiply: X, Y and C do not conform");
  }
  detail::require_writable(c.values(), "sampled_multiply");
  const auto out = c.values().span();
  const T alpha = x.alpha * y.alpha;
  const auto& xv = x.view;
  const auto& yv = y.view;

  auto dot = [&](std::int64_t i, std::int64_t j) {
    T s(0);
    for (std::int64_t t = 0; t < k; ++t) {
      const T term = xv(i, t) * yv(t, j);
      s = t == 0 ? term : s + term;
    }
    return detail::apply_scale(alpha, s);
  };

  std::visit(
      [&](const auto& v) {
        using V = std::decay_t<decltype(v)>;
        const std::int64_t base = static_cast<int>(v.base());
        if constexpr (V::storage == format::coo) {
          const auto ri = v.row_indices();
          const auto ci = v.col_indices();
          detail::for_each_block(policy, v.nnz(), 256, [&](std::int64_t b, std::int64_t e) {
            for (std::int64_t p = b; p < e; ++p) out[p] = dot(ri[p] - base, ci[p] - base);
          });
        } else {
          // CSR rows, or CSC columns read as rows of the transpose.
          const auto rows = [&] {
            if constexpr (V::storage == format::csr) {
              return detail::borrow(v);
            } else {
              return detail::borrow_as_transpose(v);
            }
          }();
          constexpr bool by_rows = V::storage == format::csr;
          detail::for_each_row(policy, rows.nrows, [&](std::int64_t r) {
            for (std::int64_t p = rows.begin(r); p < rows.end(r); ++p) {
              out[p] = by_rows ? dot(r, rows.col(p)) : dot(rows.col(p), r);
            }
          });
        }
      },
      c.view);
  state.advance(phase::executed);
}

}  // namespace spblas
