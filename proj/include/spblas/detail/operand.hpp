#pragma once

#include <cstdint>
#include <memory_resource>
#include <optional>
#include <variant>

#include <spblas/detail/row_form.hpp>
#include <spblas/formats.hpp>
#include <spblas/handle.hpp>
#include <spblas/validate.hpp>

namespace spblas::detail {

// Every sparse argument (plain view, handle, scaled or transposed wrapper)
// collapses into this descriptor before a kernel runs: the result is
// alpha * op(view) with op given by the two flags.
template <class T, class I, class O>
struct sparse_operand {
  using scalar_type = T;
  using index_type = I;
  using offset_type = O;

  std::variant<csr_view<T, I, O>, csc_view<T, I, O>, coo_view<T, I, O>> view;
  T alpha = T(1);
  bool transpose = false;
  bool conjugate = false;
  optimization_store<T, I, O>* store = nullptr;

  std::int64_t stored_rows() const {
    return std::visit([](const auto& v) -> std::int64_t { return v.nrows(); }, view);
  }
  std::int64_t stored_cols() const {
    return std::visit([](const auto& v) -> std::int64_t { return v.ncols(); }, view);
  }
  std::int64_t nrows() const { return transpose ? stored_cols() : stored_rows(); }
  std::int64_t ncols() const { return transpose ? stored_rows() : stored_cols(); }
  std::int64_t nnz() const {
    return std::visit([](const auto& v) -> std::int64_t { return v.nnz(); }, view);
  }
  format storage() const {
    return std::visit([](const auto& v) { return std::decay_t<decltype(v)>::storage; }, view);
  }
  const value_array<T>& values() const {
    return std::visit([](const auto& v) -> const value_array<T>& { return v.values(); }, view);
  }
};

template <class X>
struct operand_traits;

template <class T, class I, class O>
struct operand_traits<csr_view<T, I, O>> {
  using type = sparse_operand<T, I, O>;
  static type make(const csr_view<T, I, O>& v) {
    require_valid(v);
    return type{v};
  }
};

template <class T, class I, class O>
struct operand_traits<csc_view<T, I, O>> {
  using type = sparse_operand<T, I, O>;
  static type make(const csc_view<T, I, O>& v) {
    require_valid(v);
    return type{v};
  }
};

template <class T, class I, class O>
struct operand_traits<coo_view<T, I, O>> {
  using type = sparse_operand<T, I, O>;
  static type make(const coo_view<T, I, O>& v) {
    require_valid(v);
    return type{v};
  }
};

// Handles were validated on construction.
template <class V>
struct operand_traits<matrix_handle<V>> {
  using type = sparse_operand<typename V::scalar_type, typename V::index_type,
                              typename V::offset_type>;
  static type make(const matrix_handle<V>& h) {
    type op{h.view()};
    op.store = &h.optimization_data();
    return op;
  }
};

// Wrappers are sparse arguments only when what they wrap is one; the
// constraints keep the concepts below from hard-erroring on dense inners.
template <class V>
concept has_operand_traits = requires { typename operand_traits<V>::type; };

template <class T, has_operand_traits V>
struct operand_traits<scaled_view<T, V>> {
  using type = typename operand_traits<V>::type;
  static type make(const scaled_view<T, V>& s) {
    auto op = operand_traits<V>::make(s.inner);
    op.alpha = s.alpha * op.alpha;
    return op;
  }
};

template <has_operand_traits V>
struct operand_traits<transposed_view<V>> {
  using type = typename operand_traits<V>::type;
  static type make(const transposed_view<V>& t) {
    auto op = operand_traits<V>::make(t.inner);
    op.transpose = op.transpose != t.transpose;
    if (t.conjugate) {
      op.conjugate = !op.conjugate;
      op.alpha = conj_value(op.alpha);
    }
    return op;
  }
};

template <class X>
auto to_operand(const X& x) {
  return operand_traits<X>::make(x);
}

template <class X>
concept sparse_argument = requires(const X& x) { operand_traits<X>::make(x); };

// Dense operands: a view times a scalar.
template <class T>
struct dense_operand {
  dense_view<T> view;
  T alpha = T(1);
};

template <class X>
struct dense_traits;

template <class T>
struct dense_traits<dense_view<T>> {
  static dense_operand<T> make(const dense_view<T>& v) { return {v, T(1)}; }
};

template <class T, class V>
  requires requires(const V& v) { dense_traits<V>::make(v); }
struct dense_traits<scaled_view<T, V>> {
  static auto make(const scaled_view<T, V>& s) {
    auto op = dense_traits<V>::make(s.inner);
    op.alpha = s.alpha * op.alpha;
    return op;
  }
};

template <class X>
auto to_dense_operand(const X& x) {
  return dense_traits<X>::make(x);
}

template <class X>
concept dense_argument = requires(const X& x) { dense_traits<X>::make(x); };

// Scratch owned by one kernel call when an operand has to be reorganized
// into rows. Memory comes from the caller-supplied resource.
template <class T, class I, class O>
struct row_scratch {
  std::pmr::vector<O> coo_offsets;
  row_store<T, I, O> store;

  explicit row_scratch(std::pmr::memory_resource* r) : coo_offsets(r), store(r) {}
};

// Row access to op(view) ignoring alpha, before any cache lookup.
template <class T, class I, class O>
row_access<T, I, O> build_rows(const sparse_operand<T, I, O>& op, std::pmr::vector<O>& coo_offsets,
                               row_store<T, I, O>& store) {
  const bool c = op.conjugate;
  switch (op.view.index()) {
    case 0: {
      const auto& a = std::get<0>(op.view);
      auto rows = borrow(a, c);
      return op.transpose ? transpose_into(rows, store) : rows;
    }
    case 1: {
      const auto& a = std::get<1>(op.view);
      auto rows_of_transpose = borrow_as_transpose(a, c);
      return op.transpose ? rows_of_transpose : transpose_into(rows_of_transpose, store);
    }
    default: {
      const auto& a = std::get<2>(op.view);
      auto rows = borrow_coo(a, coo_offsets, c);
      return op.transpose ? transpose_into(rows, store) : rows;
    }
  }
}

// True when op(view) can be read row by row without reorganizing data.
template <class T, class I, class O>
bool natively_row_accessible(const sparse_operand<T, I, O>& op) {
  return (op.view.index() == 0 && !op.transpose) || (op.view.index() == 1 && op.transpose);
}

/// Row access to op(view), preferring rows cached in a handle by inspect.
template <class T, class I, class O>
row_access<T, I, O> rows_of(const sparse_operand<T, I, O>& op, row_scratch<T, I, O>& scratch) {
  if (op.store && !natively_row_accessible(op)) {
    const auto& cached = op.store->rows[op.transpose ? 1 : 0];
    if (cached) return borrow(*cached, op.values(), op.conjugate);
  }
  return build_rows(op, scratch.coo_offsets, scratch.store);
}

// Caches a row-wise copy in the handle when the format needs one.
template <class T, class I, class O>
void cache_rows(const sparse_operand<T, I, O>& op) {
  if (!op.store || natively_row_accessible(op)) return;
  auto& slot = op.store->rows[op.transpose ? 1 : 0];
  if (slot) return;
  auto* r = op.store->resource;
  std::pmr::vector<O> coo_offsets(r);
  row_store<T, I, O> scratch(r);
  auto rows = build_rows(op, coo_offsets, scratch);
  row_store<T, I, O> owned(r);
  owned.nrows = rows.nrows;
  owned.ncols = rows.ncols;
  owned.offsets.resize(static_cast<std::size_t>(rows.nrows) + 1);
  owned.indices.resize(static_cast<std::size_t>(rows.nnz()));
  owned.source.resize(static_cast<std::size_t>(rows.nnz()));
  owned.offsets[0] = 0;
  for (std::int64_t i = 0; i < rows.nrows; ++i) {
    owned.offsets[i + 1] = static_cast<O>(rows.end(i));
    for (std::int64_t k = rows.begin(i); k < rows.end(i); ++k) {
      owned.indices[k] = static_cast<I>(rows.col(k));
      owned.source[k] = static_cast<O>(rows.position(k));
    }
  }
  slot.emplace(std::move(owned));
}

template <class T>
T apply_scale(T alpha, T v) noexcept {
  return alpha == T(1) ? v : alpha * v;
}

// Structural fingerprint of op(view): extents, flags and index arrays.
template <class T, class I, class O>
void mix_structure(structure_hash& h, const sparse_operand<T, I, O>& op) {
  h.mix(static_cast<std::int64_t>(op.view.index()));
  h.mix(op.transpose ? 1 : 0);
  h.mix(op.stored_rows());
  h.mix(op.stored_cols());
  h.mix(op.nnz());
  std::visit(
      [&](const auto& v) {
        using V = std::decay_t<decltype(v)>;
        const std::int64_t base = static_cast<int>(v.base());
        if constexpr (V::storage == format::csr) {
          const auto off = v.row_offsets();
          for (auto o : off) h.mix(static_cast<std::int64_t>(o) - off[0]);
          for (auto j : v.col_indices()) h.mix(static_cast<std::int64_t>(j) - base);
        } else if constexpr (V::storage == format::csc) {
          const auto off = v.col_offsets();
          for (auto o : off) h.mix(static_cast<std::int64_t>(o) - off[0]);
          for (auto i : v.row_indices()) h.mix(static_cast<std::int64_t>(i) - base);
        } else {
          for (auto i : v.row_indices()) h.mix(static_cast<std::int64_t>(i) - base);
          for (auto j : v.col_indices()) h.mix(static_cast<std::int64_t>(j) - base);
        }
      },
      op.view);
}

inline bool ranges_overlap(const void* a, std::size_t abytes, const void* b,
                           std::size_t bbytes) noexcept {
  if (abytes == 0 || bbytes == 0) return false;
  auto pa = reinterpret_cast<std::uintptr_t>(a);
  auto pb = reinterpret_cast<std::uintptr_t>(b);
  return pa < pb + bbytes && pb < pa + abytes;
}

template <class T>
bool overlap(const dense_view<T>& a, const dense_view<T>& b) noexcept {
  return ranges_overlap(a.data().data(), a.data().size_bytes(), b.data().data(),
                        b.data().size_bytes());
}

}  // namespace spblas::detail
