#pragma once

#include <complex>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <type_traits>

#include <spblas/errors.hpp>

namespace spblas {

enum class index_base : int { zero = 0, one = 1 };

enum class layout { row_major, col_major };

enum class format { csr, csc, coo };

namespace detail {

template <class T>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};

template <class T>
struct real_of {
  using type = T;
};
template <class T>
struct real_of<std::complex<T>> {
  using type = T;
};

}  // namespace detail

template <class T>
inline constexpr bool is_complex_v = detail::is_complex<T>::value;

template <class T>
using real_t = typename detail::real_of<T>::type;

template <class T>
concept scalar =
    std::same_as<T, float> || std::same_as<T, double> ||
    std::same_as<T, std::complex<float>> || std::same_as<T, std::complex<double>>;

/// A values array whose every position holds the same value. Readable
/// anywhere a values array is read; never writable.
template <class T>
struct iso_value {
  T value{};
  std::int64_t count = 0;
};

/// Values of a sparse matrix: either a span over caller memory or an iso
/// constant. Reading never allocates.
template <class T>
class value_array {
public:
  value_array() = default;
  value_array(std::span<T> data) : data_(data) {}
  value_array(iso_value<T> iso) : iso_(iso.value), iso_count_(iso.count), is_iso_(true) {}

  std::size_t size() const noexcept {
    return is_iso_ ? static_cast<std::size_t>(iso_count_) : data_.size();
  }
  bool is_iso() const noexcept { return is_iso_; }
  bool writable() const noexcept { return !is_iso_; }

  T operator[](std::size_t k) const noexcept { return is_iso_ ? iso_ : data_[k]; }

  // Writable storage. Iso arrays have none.
  std::span<T> span() const {
    if (is_iso_) {
      raise(error_category::read_only_values, "iso-valued array cannot be written");
    }
    return data_;
  }

  const T* address() const noexcept { return is_iso_ ? nullptr : data_.data(); }

private:
  std::span<T> data_;
  T iso_{};
  std::int64_t iso_count_ = 0;
  bool is_iso_ = false;
};

/// Compressed sparse row view over caller-owned arrays. Never frees,
/// reallocates or resizes them. Entry k of row i lives at array position
/// row_offsets[i] - row_offsets[0] + k.
template <scalar T, std::integral I = std::int32_t, std::integral O = std::int64_t>
class csr_view {
public:
  using scalar_type = T;
  using index_type = I;
  using offset_type = O;
  static constexpr format storage = format::csr;

  csr_view() = default;

  // Output shell: extents only; arrays are bound later with update().
  csr_view(I nrows, I ncols, index_base base = index_base::zero)
      : nrows_(nrows), ncols_(ncols), base_(base) {}

  csr_view(value_array<T> values, std::span<O> row_offsets, std::span<I> col_indices,
           I nrows, I ncols, O nnz, index_base base = index_base::zero)
      : values_(values), row_offsets_(row_offsets), col_indices_(col_indices),
        nrows_(nrows), ncols_(ncols), nnz_(nnz), base_(base) {}

  void update(value_array<T> values, std::span<O> row_offsets, std::span<I> col_indices) {
    values_ = values;
    row_offsets_ = row_offsets;
    col_indices_ = col_indices;
  }
  void set_nnz(O nnz) noexcept { nnz_ = nnz; }

  I nrows() const noexcept { return nrows_; }
  I ncols() const noexcept { return ncols_; }
  O nnz() const noexcept { return nnz_; }
  index_base base() const noexcept { return base_; }
  std::span<O> row_offsets() const noexcept { return row_offsets_; }
  std::span<I> col_indices() const noexcept { return col_indices_; }
  const value_array<T>& values() const noexcept { return values_; }

private:
  value_array<T> values_;
  std::span<O> row_offsets_;
  std::span<I> col_indices_;
  I nrows_ = 0;
  I ncols_ = 0;
  O nnz_ = 0;
  index_base base_ = index_base::zero;
};

/// Compressed sparse column view; column-major analog of csr_view.
template <scalar T, std::integral I = std::int32_t, std::integral O = std::int64_t>
class csc_view {
public:
  using scalar_type = T;
  using index_type = I;
  using offset_type = O;
  static constexpr format storage = format::csc;

  csc_view() = default;
  csc_view(I nrows, I ncols, index_base base = index_base::zero)
      : nrows_(nrows), ncols_(ncols), base_(base) {}

  csc_view(value_array<T> values, std::span<O> col_offsets, std::span<I> row_indices,
           I nrows, I ncols, O nnz, index_base base = index_base::zero)
      : values_(values), col_offsets_(col_offsets), row_indices_(row_indices),
        nrows_(nrows), ncols_(ncols), nnz_(nnz), base_(base) {}

  void update(value_array<T> values, std::span<O> col_offsets, std::span<I> row_indices) {
    values_ = values;
    col_offsets_ = col_offsets;
    row_indices_ = row_indices;
  }
  void set_nnz(O nnz) noexcept { nnz_ = nnz; }

  I nrows() const noexcept { return nrows_; }
  I ncols() const noexcept { return ncols_; }
  O nnz() const noexcept { return nnz_; }
  index_base base() const noexcept { return base_; }
  std::span<O> col_offsets() const noexcept { return col_offsets_; }
  std::span<I> row_indices() const noexcept { return row_indices_; }
  const value_array<T>& values() const noexcept { return values_; }

private:
  value_array<T> values_;
  std::span<O> col_offsets_;
  std::span<I> row_indices_;
  I nrows_ = 0;
  I ncols_ = 0;
  O nnz_ = 0;
  index_base base_ = index_base::zero;
};

/// Coordinate view. Canonical COO is sorted by (row, column) without
/// duplicates.
template <scalar T, std::integral I = std::int32_t, std::integral O = std::int64_t>
class coo_view {
public:
  using scalar_type = T;
  using index_type = I;
  using offset_type = O;
  static constexpr format storage = format::coo;

  coo_view() = default;
  coo_view(I nrows, I ncols, index_base base = index_base::zero)
      : nrows_(nrows), ncols_(ncols), base_(base) {}

  coo_view(value_array<T> values, std::span<I> row_indices, std::span<I> col_indices,
           I nrows, I ncols, O nnz, index_base base = index_base::zero)
      : values_(values), row_indices_(row_indices), col_indices_(col_indices),
        nrows_(nrows), ncols_(ncols), nnz_(nnz), base_(base) {}

  void update(value_array<T> values, std::span<I> row_indices, std::span<I> col_indices) {
    values_ = values;
    row_indices_ = row_indices;
    col_indices_ = col_indices;
  }
  void set_nnz(O nnz) noexcept { nnz_ = nnz; }

  I nrows() const noexcept { return nrows_; }
  I ncols() const noexcept { return ncols_; }
  O nnz() const noexcept { return nnz_; }
  index_base base() const noexcept { return base_; }
  std::span<I> row_indices() const noexcept { return row_indices_; }
  std::span<I> col_indices() const noexcept { return col_indices_; }
  const value_array<T>& values() const noexcept { return values_; }

private:
  value_array<T> values_;
  std::span<I> row_indices_;
  std::span<I> col_indices_;
  I nrows_ = 0;
  I ncols_ = 0;
  O nnz_ = 0;
  index_base base_ = index_base::zero;
};

/// Contiguous dense vector (order 1) or matrix (order 2). A vector behaves
/// as an n x 1 column wherever a matrix is expected.
template <scalar T>
class dense_view {
public:
  using scalar_type = T;

  dense_view() = default;
  dense_view(std::span<T> data, std::size_t n) : data_(data), rows_(n), cols_(1), order_(1) {}
  dense_view(std::span<T> data, std::size_t rows, std::size_t cols,
             layout l = layout::row_major)
      : data_(data), rows_(rows), cols_(cols), layout_(l), order_(2) {}

  int order() const noexcept { return order_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return rows_ * cols_; }
  layout memory_layout() const noexcept { return layout_; }
  std::span<T> data() const noexcept { return data_; }

  std::size_t row_stride() const noexcept { return layout_ == layout::row_major ? cols_ : 1; }
  std::size_t col_stride() const noexcept { return layout_ == layout::row_major ? 1 : rows_; }

  T& operator()(std::size_t i, std::size_t j) const noexcept {
    return data_[i * row_stride() + j * col_stride()];
  }
  T& operator[](std::size_t i) const noexcept { return data_[i]; }

private:
  std::span<T> data_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  layout layout_ = layout::row_major;
  int order_ = 1;
};

template <class V>
concept sparse_view_type = requires {
  typename V::scalar_type;
  typename V::index_type;
  typename V::offset_type;
  { V::storage } -> std::convertible_to<format>;
};

template <class V>
struct is_dense_view : std::false_type {};
template <class T>
struct is_dense_view<dense_view<T>> : std::true_type {};

// Symbolic wrappers. Constructing them never touches element data.

template <class T, class Inner>
struct scaled_view {
  using scalar_type = typename Inner::scalar_type;
  T alpha;
  Inner inner;
};

/// op(inner): transposition and conjugation flags are independent so that
/// nesting always collapses into one wrapper.
template <class Inner>
struct transposed_view {
  using scalar_type = typename Inner::scalar_type;
  bool transpose = true;
  bool conjugate = false;
  Inner inner;
};

template <class V>
scaled_view<typename V::scalar_type, V> scaled(typename V::scalar_type alpha, V v) {
  return {alpha, std::move(v)};
}

// scaled(a, scaled(b, v)) == scaled(a * b, v)
template <class T, class V>
scaled_view<T, V> scaled(std::type_identity_t<T> alpha, scaled_view<T, V> v) {
  return {alpha * v.alpha, std::move(v.inner)};
}

template <class V>
transposed_view<V> transposed(V v, bool conjugate = false) {
  return {true, conjugate, std::move(v)};
}

template <class V>
transposed_view<V> transposed(transposed_view<V> v, bool conjugate = false) {
  return {!v.transpose, v.conjugate != conjugate, std::move(v.inner)};
}

}  // namespace spblas
