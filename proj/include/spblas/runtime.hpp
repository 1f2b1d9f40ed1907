#pragma once

#include <cstdint>
#include <memory>
#include <memory_resource>
#include <optional>
#include <string_view>

#include <spblas/errors.hpp>

namespace spblas {

// ---------------------------------------------------------------------------
// Conditional numerical reproducibility

// `default` is a keyword in C++, so the no-guarantee property is spelled
// `none`; both share the numeric value 0.
enum class cnr_property : int {
  none = 0,
  cnr = 1,
  strict_cnr = 2,
};

// Process-global. Kernels read it once at entry.
void set_cnr_property(cnr_property prop) noexcept;
cnr_property get_cnr_property() noexcept;

std::string_view cnr_name(cnr_property p) noexcept;

// ---------------------------------------------------------------------------
// Execution policies

enum class execution_mode {
  sequential,
  deterministic_parallel,
  parallel,
};

struct execution_policy {
  execution_mode mode = execution_mode::sequential;
  int threads = 1;
  // Implementation-defined extension: an explicit algorithm choice. When
  // set it wins over the global cnr property.
  std::optional<cnr_property> algorithm = std::nullopt;

  bool is_parallel() const noexcept {
    return mode != execution_mode::sequential && threads > 1;
  }
};

inline constexpr execution_policy seq{};

inline execution_policy par(int threads) {
  return {execution_mode::parallel, threads < 1 ? 1 : threads};
}

inline execution_policy detpar(int threads) {
  return {execution_mode::deterministic_parallel, threads < 1 ? 1 : threads};
}

// Thread count used when the caller does not choose one: SPBLAS_NUM_THREADS
// if set to a positive integer, otherwise the hardware concurrency.
int default_thread_count() noexcept;

inline constexpr std::string_view thread_count_env = "SPBLAS_NUM_THREADS";

namespace detail {

// The property a kernel honors for one call.
inline cnr_property effective_cnr(const execution_policy& p) noexcept {
  return p.algorithm.value_or(get_cnr_property());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Memory

// The library's memory resource abstraction is std::pmr::memory_resource.
using memory_resource = std::pmr::memory_resource;

inline memory_resource* default_resource() noexcept {
  return std::pmr::new_delete_resource();
}

}  // namespace spblas
