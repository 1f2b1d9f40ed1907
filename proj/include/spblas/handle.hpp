#pragma once

#include <array>
#include <memory>
#include <memory_resource>
#include <optional>

#include <spblas/detail/row_form.hpp>
#include <spblas/formats.hpp>
#include <spblas/runtime.hpp>
#include <spblas/validate.hpp>

namespace spblas {

namespace detail {

// Level-set schedule for triangular solves: rows grouped so that every row
// depends only on rows of earlier levels.
template <class I, class O>
struct level_schedule {
  std::pmr::vector<I> rows;
  std::pmr::vector<O> level_offsets;
  bool lower = true;

  explicit level_schedule(std::pmr::memory_resource* r) : rows(r), level_offsets(r) {}
};

/// Library-owned optimization data attached to a matrix handle. Every
/// allocation comes from the handle's resource.
template <class T, class I, class O>
struct optimization_store {
  std::pmr::memory_resource* resource;
  // Row-wise copies of the matrix for formats that are not natively
  // row-accessible, indexed by the transpose flag.
  std::array<std::optional<row_store<T, I, O>>, 2> rows;
  // Per-row stored-entry counts of op(A), indexed by the transpose flag.
  std::array<std::optional<std::pmr::vector<O>>, 2> row_lengths;
  std::array<std::optional<level_schedule<I, O>>, 2> levels;

  explicit optimization_store(std::pmr::memory_resource* r) : resource(r) {}

  bool empty() const noexcept {
    for (int t = 0; t < 2; ++t) {
      if (rows[t] || row_lengths[t] || levels[t]) return false;
    }
    return true;
  }
};

}  // namespace detail

/// Pairs a non-owning view with opaque, library-owned optimization data.
/// Copies share the same optimization data. The user's arrays are never
/// modified by construction, inspection or destruction.
template <sparse_view_type V>
class matrix_handle {
public:
  using view_type = V;
  using scalar_type = typename V::scalar_type;
  using index_type = typename V::index_type;
  using offset_type = typename V::offset_type;
  using store_type = detail::optimization_store<scalar_type, index_type, offset_type>;

  explicit matrix_handle(V view, memory_resource* resource = default_resource())
      : view_(std::move(view)) {
    require_valid(view_);
    store_ = std::allocate_shared<store_type>(std::pmr::polymorphic_allocator<store_type>(resource),
                                              resource);
  }

  const V& view() const noexcept { return view_; }
  memory_resource* resource() const noexcept { return store_->resource; }

  // Library internals; not part of the stable surface.
  store_type& optimization_data() const noexcept { return *store_; }

private:
  V view_;
  std::shared_ptr<store_type> store_;
};

template <sparse_view_type V>
matrix_handle<V> make_handle(V view, memory_resource* resource = default_resource()) {
  return matrix_handle<V>(std::move(view), resource);
}

}  // namespace spblas
