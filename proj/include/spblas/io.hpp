#pragma once

// Matrix Market exchange format and plain-text vectors.

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <spblas/formats.hpp>

namespace spblas::io {

enum class mm_field { real, integer, complex, pattern };
enum class mm_symmetry { general, symmetric, skew_symmetric, hermitian };
enum class mm_layout { coordinate, array };

std::string_view field_name(mm_field f) noexcept;
std::string_view symmetry_name(mm_symmetry s) noexcept;

struct mm_header {
  mm_layout layout = mm_layout::coordinate;
  mm_field field = mm_field::real;
  mm_symmetry symmetry = mm_symmetry::general;
  std::int64_t nrows = 0;
  std::int64_t ncols = 0;
  std::int64_t entries = 0;  // as declared in the size line
};

/// Owned canonical COO buffers. view() hands out a non-owning coo_view
/// over them; pattern files are backed by iso_value(1).
template <class T, class I = std::int32_t, class O = std::int64_t>
struct coo_matrix {
  mm_header header;
  I nrows = 0;
  I ncols = 0;
  index_base base = index_base::zero;
  std::vector<I> rows;
  std::vector<I> cols;
  std::vector<T> values;
  bool iso = false;
  T iso_value = T(1);

  O nnz() const noexcept { return static_cast<O>(rows.size()); }

  coo_view<T, I, O> view() {
    value_array<T> v = iso ? value_array<T>(spblas::iso_value<T>{iso_value, nnz()})
                           : value_array<T>(std::span<T>(values));
    return coo_view<T, I, O>(v, std::span<I>(rows), std::span<I>(cols), nrows, ncols, nnz(),
                             base);
  }
};

/// Parses a Matrix Market stream. Symmetric, skew-symmetric and hermitian
/// inputs are expanded to general storage; entries come out sorted by
/// (row, column). Duplicate coordinates raise duplicate_entry.
template <class T>
coo_matrix<T> mm_read(std::istream& in, index_base base = index_base::zero);

template <class T>
coo_matrix<T> mm_read_file(const std::string& path, index_base base = index_base::zero);

/// Reads only the banner and size line.
mm_header mm_read_header(const std::string& path);

/// Coordinate, general, 1-based. Every value is printed in the shortest
/// decimal form that parses back to the same bits. An iso array of ones is
/// written with the pattern field.
template <class T>
void mm_write(std::ostream& out, const coo_view<T>& a);
template <class T>
void mm_write(std::ostream& out, const csr_view<T>& a);
template <class T>
void mm_write(std::ostream& out, const csc_view<T>& a);

template <class V>
void mm_write_file(const std::string& path, const V& a);

/// One value per line ("re im" for complex); blank lines and lines
/// starting with '%' are ignored.
template <class T>
std::vector<T> read_vector(std::istream& in);
template <class T>
std::vector<T> read_vector_file(const std::string& path);
template <class T>
void write_vector(std::ostream& out, std::span<const T> v);

/// Shortest round-trip decimal text of one scalar.
template <class T>
std::string format_scalar(T v);

}  // namespace spblas::io
