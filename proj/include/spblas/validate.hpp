#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <spblas/errors.hpp>
#include <spblas/formats.hpp>

namespace spblas {

enum class violation_kind {
  negative_extent,
  array_length,
  offsets_not_monotone,
  offsets_nnz_mismatch,
  index_out_of_range,
  unsorted,
  duplicate_index,
};

std::string_view violation_name(violation_kind k) noexcept;

struct violation {
  violation_kind kind;
  // First offending position: a row/column for offsets and ordering, an
  // entry position for index range.
  std::int64_t index;
};

/// Outcome of validate(): at most one violation per kind, in the order
/// checked.
struct validation_report {
  std::vector<violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  bool has(violation_kind k) const noexcept {
    for (const auto& v : violations) {
      if (v.kind == k) return true;
    }
    return false;
  }
  std::string describe() const;
};

class validation_error : public sparse_error {
public:
  explicit validation_error(validation_report report)
      : sparse_error(error_category::validation, report.describe()),
        report_(std::move(report)) {}

  const validation_report& report() const noexcept { return report_; }
  violation_kind kind() const noexcept { return report_.violations.front().kind; }

private:
  validation_report report_;
};

namespace detail {

class report_builder {
public:
  void add(violation_kind k, std::int64_t index) {
    if (!report_.has(k)) report_.violations.push_back({k, index});
  }
  validation_report take() { return std::move(report_); }

private:
  validation_report report_;
};

// Shared checks for the compressed formats: offsets of length `outer + 1`,
// inner indices in [base, base + inner_extent), strictly increasing per
// outer slice.
template <class I, class O>
void check_compressed(report_builder& rb, std::int64_t outer, std::int64_t inner_extent,
                      std::int64_t nnz, std::span<O> offsets, std::span<I> indices,
                      std::size_t nvalues, std::int64_t base) {
  if (offsets.size() != static_cast<std::size_t>(outer + 1)) {
    rb.add(violation_kind::array_length, static_cast<std::int64_t>(offsets.size()));
    return;
  }
  if (indices.size() != static_cast<std::size_t>(nnz)) {
    rb.add(violation_kind::array_length, static_cast<std::int64_t>(indices.size()));
    return;
  }
  if (nvalues != static_cast<std::size_t>(nnz)) {
    rb.add(violation_kind::array_length, static_cast<std::int64_t>(nvalues));
    return;
  }
  bool monotone = true;
  for (std::int64_t r = 0; r < outer; ++r) {
    if (offsets[r + 1] < offsets[r]) {
      rb.add(violation_kind::offsets_not_monotone, r);
      monotone = false;
      break;
    }
  }
  if (static_cast<std::int64_t>(offsets[outer]) - static_cast<std::int64_t>(offsets[0]) != nnz) {
    rb.add(violation_kind::offsets_nnz_mismatch, outer);
    return;
  }
  if (!monotone) return;
  const std::int64_t first = offsets[0];
  for (std::int64_t r = 0; r < outer; ++r) {
    const std::int64_t begin = offsets[r] - first;
    const std::int64_t end = offsets[r + 1] - first;
    for (std::int64_t k = begin; k < end; ++k) {
      const std::int64_t j = static_cast<std::int64_t>(indices[k]) - base;
      if (j < 0 || j >= inner_extent) {
        rb.add(violation_kind::index_out_of_range, k);
      }
      if (k > begin) {
        const std::int64_t prev = static_cast<std::int64_t>(indices[k - 1]) - base;
        if (prev == j) {
          rb.add(violation_kind::duplicate_index, r);
        } else if (prev > j) {
          rb.add(violation_kind::unsorted, r);
        }
      }
    }
  }
}

}  // namespace detail

template <class T, class I, class O>
validation_report validate(const csr_view<T, I, O>& a) {
  detail::report_builder rb;
  if (a.nrows() < 0 || a.ncols() < 0 || a.nnz() < 0) {
    rb.add(violation_kind::negative_extent, 0);
    return rb.take();
  }
  detail::check_compressed(rb, a.nrows(), a.ncols(), a.nnz(), a.row_offsets(),
                           a.col_indices(), a.values().size(), static_cast<int>(a.base()));
  return rb.take();
}

template <class T, class I, class O>
validation_report validate(const csc_view<T, I, O>& a) {
  detail::report_builder rb;
  if (a.nrows() < 0 || a.ncols() < 0 || a.nnz() < 0) {
    rb.add(violation_kind::negative_extent, 0);
    return rb.take();
  }
  detail::check_compressed(rb, a.ncols(), a.nrows(), a.nnz(), a.col_offsets(),
                           a.row_indices(), a.values().size(), static_cast<int>(a.base()));
  return rb.take();
}

template <class T, class I, class O>
validation_report validate(const coo_view<T, I, O>& a) {
  detail::report_builder rb;
  if (a.nrows() < 0 || a.ncols() < 0 || a.nnz() < 0) {
    rb.add(violation_kind::negative_extent, 0);
    return rb.take();
  }
  const auto nnz = static_cast<std::size_t>(a.nnz());
  if (a.row_indices().size() != nnz || a.col_indices().size() != nnz ||
      a.values().size() != nnz) {
    rb.add(violation_kind::array_length, 0);
    return rb.take();
  }
  const std::int64_t base = static_cast<int>(a.base());
  const auto rows = a.row_indices();
  const auto cols = a.col_indices();
  for (std::size_t k = 0; k < nnz; ++k) {
    const std::int64_t i = static_cast<std::int64_t>(rows[k]) - base;
    const std::int64_t j = static_cast<std::int64_t>(cols[k]) - base;
    if (i < 0 || i >= a.nrows() || j < 0 || j >= a.ncols()) {
      rb.add(violation_kind::index_out_of_range, static_cast<std::int64_t>(k));
    }
    if (k > 0) {
      const std::int64_t pi = rows[k - 1];
      const std::int64_t pj = cols[k - 1];
      const std::int64_t ci = rows[k];
      const std::int64_t cj = cols[k];
      if (pi == ci && pj == cj) {
        rb.add(violation_kind::duplicate_index, static_cast<std::int64_t>(k));
      } else if (pi > ci || (pi == ci && pj > cj)) {
        rb.add(violation_kind::unsorted, static_cast<std::int64_t>(k));
      }
    }
  }
  return rb.take();
}

template <class V>
void require_valid(const V& v) {
  auto report = validate(v);
  if (!report.ok()) throw validation_error(std::move(report));
}

}  // namespace spblas
