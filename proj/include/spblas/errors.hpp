#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spblas {

// Every failure the library reports falls in exactly one category. The
// categories are stable: the CLI prints them and bindings map them 1:1.
enum class error_category {
  validation,
  shape_mismatch,
  aliasing,
  read_only_values,
  phase,
  stale_structure,
  output_length,
  singular_structure,
  numeric_singularity,
  pattern,
  unsupported,
  parse,
  duplicate_entry,
  io,
};

std::string_view category_name(error_category c) noexcept;

class sparse_error : public std::runtime_error {
public:
  sparse_error(error_category category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  error_category category() const noexcept { return category_; }

private:
  error_category category_;
};

[[noreturn]] inline void raise(error_category c, const std::string& what) {
  throw sparse_error(c, what);
}

}  // namespace spblas
