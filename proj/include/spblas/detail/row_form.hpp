#pragma once

#include <complex>
#include <cstdint>
#include <memory_resource>
#include <span>
#include <vector>

#include <spblas/formats.hpp>

namespace spblas::detail {

template <class T>
T conj_if(T v, bool conjugate) noexcept {
  if constexpr (is_complex_v<T>) {
    return conjugate ? std::conj(v) : v;
  } else {
    (void)conjugate;
    return v;
  }
}

template <class T>
T conj_value(T v) noexcept {
  if constexpr (is_complex_v<T>) {
    return std::conj(v);
  } else {
    return v;
  }
}

/// Library-owned 0-based row structure, allocated from a memory resource.
/// Values are never copied: `source` maps each entry to its position in
/// the caller's values array, so later value updates stay visible.
template <class T, class I, class O>
struct row_store {
  std::int64_t nrows = 0;
  std::int64_t ncols = 0;
  std::pmr::vector<O> offsets;
  std::pmr::vector<I> indices;
  std::pmr::vector<O> source;

  explicit row_store(std::pmr::memory_resource* r) : offsets(r), indices(r), source(r) {}
};

/// Read-only row-wise access to a matrix in 0-based logical coordinates,
/// whatever the array base or offset origin of the underlying storage.
template <class T, class I, class O>
struct row_access {
  std::int64_t nrows = 0;
  std::int64_t ncols = 0;
  const O* offsets = nullptr;  // length nrows + 1
  const I* indices = nullptr;
  const O* source = nullptr;  // null: entry k is values[k]
  value_array<T> values;
  std::int64_t first = 0;  // offsets[0]
  std::int64_t base = 0;   // subtracted from indices
  bool conjugate = false;

  std::int64_t begin(std::int64_t i) const noexcept {
    return static_cast<std::int64_t>(offsets[i]) - first;
  }
  std::int64_t end(std::int64_t i) const noexcept {
    return static_cast<std::int64_t>(offsets[i + 1]) - first;
  }
  std::int64_t col(std::int64_t k) const noexcept {
    return static_cast<std::int64_t>(indices[k]) - base;
  }
  std::int64_t position(std::int64_t k) const noexcept {
    return source ? static_cast<std::int64_t>(source[k]) : k;
  }
  T value(std::int64_t k) const noexcept { return conj_if(values[position(k)], conjugate); }
  std::int64_t nnz() const noexcept { return nrows == 0 ? 0 : end(nrows - 1); }
};

template <class T, class I, class O>
row_access<T, I, O> borrow(const row_store<T, I, O>& s, const value_array<T>& values,
                           bool conjugate = false) {
  row_access<T, I, O> r;
  r.nrows = s.nrows;
  r.ncols = s.ncols;
  r.offsets = s.offsets.data();
  r.indices = s.indices.data();
  r.source = s.source.data();
  r.values = values;
  r.first = 0;
  r.base = 0;
  r.conjugate = conjugate;
  return r;
}

template <class T, class I, class O>
row_access<T, I, O> borrow(const csr_view<T, I, O>& a, bool conjugate = false) {
  row_access<T, I, O> r;
  r.nrows = a.nrows();
  r.ncols = a.ncols();
  r.offsets = a.row_offsets().data();
  r.indices = a.col_indices().data();
  r.values = a.values();
  r.first = a.row_offsets().empty() ? 0 : a.row_offsets()[0];
  r.base = static_cast<int>(a.base());
  r.conjugate = conjugate;
  return r;
}

// The CSC arrays of A are the CSR arrays of A^T.
template <class T, class I, class O>
row_access<T, I, O> borrow_as_transpose(const csc_view<T, I, O>& a, bool conjugate = false) {
  row_access<T, I, O> r;
  r.nrows = a.ncols();
  r.ncols = a.nrows();
  r.offsets = a.col_offsets().data();
  r.indices = a.row_indices().data();
  r.values = a.values();
  r.first = a.col_offsets().empty() ? 0 : a.col_offsets()[0];
  r.base = static_cast<int>(a.base());
  r.conjugate = conjugate;
  return r;
}

// Canonical COO is already row-ordered; only row offsets are built.
template <class T, class I, class O>
row_access<T, I, O> borrow_coo(const coo_view<T, I, O>& a, std::pmr::vector<O>& offsets,
                               bool conjugate = false) {
  const std::int64_t base = static_cast<int>(a.base());
  offsets.assign(static_cast<std::size_t>(a.nrows()) + 1, O{0});
  for (auto i : a.row_indices()) {
    ++offsets[static_cast<std::size_t>(static_cast<std::int64_t>(i) - base) + 1];
  }
  for (std::int64_t i = 0; i < a.nrows(); ++i) offsets[i + 1] += offsets[i];
  row_access<T, I, O> r;
  r.nrows = a.nrows();
  r.ncols = a.ncols();
  r.offsets = offsets.data();
  r.indices = a.col_indices().data();
  r.values = a.values();
  r.first = 0;
  r.base = base;
  r.conjugate = conjugate;
  return r;
}

/// Counting-sort transpose of `src` into `out`. Stable, so every output
/// row comes out sorted by column. The returned access reads src's values
/// array and carries its conjugation flag.
template <class T, class I, class O>
row_access<T, I, O> transpose_into(const row_access<T, I, O>& src, row_store<T, I, O>& out) {
  out.nrows = src.ncols;
  out.ncols = src.nrows;
  const std::int64_t nnz = src.nnz();
  out.offsets.assign(static_cast<std::size_t>(out.nrows) + 1, O{0});
  out.indices.resize(static_cast<std::size_t>(nnz));
  out.source.resize(static_cast<std::size_t>(nnz));
  for (std::int64_t k = 0; k < nnz; ++k) ++out.offsets[src.col(k) + 1];
  for (std::int64_t j = 0; j < out.nrows; ++j) out.offsets[j + 1] += out.offsets[j];
  std::pmr::vector<O> cursor(out.offsets.begin(), out.offsets.end() - 1,
                             out.offsets.get_allocator());
  for (std::int64_t i = 0; i < src.nrows; ++i) {
    for (std::int64_t k = src.begin(i); k < src.end(i); ++k) {
      const auto dst = static_cast<std::size_t>(cursor[src.col(k)]++);
      out.indices[dst] = static_cast<I>(i);
      out.source[dst] = static_cast<O>(src.position(k));
    }
  }
  return borrow(out, src.values, src.conjugate);
}

// FNV-1a over 64-bit words.
class structure_hash {
public:
  void mix(std::int64_t v) noexcept {
    auto u = static_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      h_ ^= (u >> (8 * b)) & 0xffu;
      h_ *= 0x100000001b3ull;
    }
  }
  std::uint64_t value() const noexcept { return h_; }

private:
  std::uint64_t h_ = 0xcbf29ce484222325ull;
};

}  // namespace spblas::detail
