#pragma once

#include <cstdint>
#include <initializer_list>
#include <memory_resource>
#include <string>
#include <string_view>

#include <spblas/errors.hpp>
#include <spblas/runtime.hpp>

namespace spblas {

enum class op_kind {
  scale,
  matrix_inf_norm,
  matrix_frob_norm,
  multiply,
  triangular_solve,
  sampled_multiply,
  sparse_multiply,
  add,
  multiply_elementwise,
  convert,
  filter,
  transpose,
};

std::string_view op_kind_name(op_kind k) noexcept;

enum class phase {
  created,
  inspected,
  executed,  // a single-stage kernel has run
  computed,
  filled,
  symbolic_computed,
  symbolic_filled,
  numeric_computed,
  numeric_filled,
};

std::string_view phase_name(phase p) noexcept;

namespace detail {

// Staged data carried between phases.
struct staged_data {
  std::pmr::vector<std::int64_t> row_offsets;  // 0-based output row offsets
  std::pmr::vector<std::uint8_t> keep;         // filter decisions per input entry
  std::int64_t out_nrows = 0;
  std::int64_t out_ncols = 0;
  std::uint64_t fingerprint = 0;
  bool has_fingerprint = false;

  explicit staged_data(std::pmr::memory_resource* r) : row_offsets(r), keep(r) {}
};

}  // namespace detail

/// Per-operation opaque state. Bound to one operation family at compile
/// time; never shared between concurrent calls.
class state_base {
public:
  state_base(op_kind kind, memory_resource* resource)
      : kind_(kind), resource_(resource), data_(resource) {}

  state_base(const state_base&) = delete;
  state_base& operator=(const state_base&) = delete;

  op_kind kind() const noexcept { return kind_; }
  phase current_phase() const noexcept { return phase_; }
  memory_resource* resource() const noexcept { return resource_; }

  // Exact structural nnz of the staged output; requires a compute phase.
  std::int64_t get_result_nnz() const {
    switch (phase_) {
      case phase::computed:
      case phase::filled:
      case phase::symbolic_computed:
      case phase::symbolic_filled:
      case phase::numeric_computed:
      case phase::numeric_filled:
        return result_nnz_;
      default:
        raise(error_category::phase, std::string(op_kind_name(kind_)) +
                                         ": result nnz requested in phase " +
                                         std::string(phase_name(phase_)));
    }
  }

  // Back to `created`, releasing all staged memory.
  void reset() {
    phase_ = phase::created;
    result_nnz_ = -1;
    data_ = detail::staged_data(resource_);
  }

  // Number of structural analyses performed; lets callers observe reuse.
  std::int64_t analysis_count() const noexcept { return analyses_; }

  // Library internals.
  detail::staged_data& staged() noexcept { return data_; }
  void advance(phase p) noexcept { phase_ = p; }
  void set_result_nnz(std::int64_t n) noexcept { result_nnz_ = n; }
  void count_analysis() noexcept { ++analyses_; }

  void require_phase(std::initializer_list<phase> allowed, std::string_view call) const {
    for (auto p : allowed) {
      if (p == phase_) return;
    }
    raise(error_category::phase, std::string(call) + " not allowed in phase " +
                                     std::string(phase_name(phase_)));
  }

private:
  op_kind kind_;
  phase phase_ = phase::created;
  std::int64_t result_nnz_ = -1;
  std::int64_t analyses_ = 0;
  memory_resource* resource_;
  detail::staged_data data_;
};

template <op_kind K>
class operation_state : public state_base {
public:
  static constexpr op_kind kind_value = K;
  explicit operation_state(memory_resource* resource = default_resource())
      : state_base(K, resource) {}
};

using scale_state_t = operation_state<op_kind::scale>;
using matrix_inf_norm_state_t = operation_state<op_kind::matrix_inf_norm>;
using matrix_frob_norm_state_t = operation_state<op_kind::matrix_frob_norm>;
using multiply_state_t = operation_state<op_kind::multiply>;
using triangular_solve_state_t = operation_state<op_kind::triangular_solve>;
using sampled_multiply_state_t = operation_state<op_kind::sampled_multiply>;
using sparse_multiply_state_t = operation_state<op_kind::sparse_multiply>;
using add_state_t = operation_state<op_kind::add>;
using multiply_elementwise_state_t = operation_state<op_kind::multiply_elementwise>;
using convert_state_t = operation_state<op_kind::convert>;
using filter_state_t = operation_state<op_kind::filter>;
using transpose_state_t = operation_state<op_kind::transpose>;

inline std::int64_t state_result_nnz(const state_base& s) { return s.get_result_nnz(); }

}  // namespace spblas
