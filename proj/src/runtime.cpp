#include <atomic>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <string>
#include <thread>

#include <spblas/errors.hpp>
#include <spblas/runtime.hpp>
#include <spblas/state.hpp>
#include <spblas/validate.hpp>

namespace spblas {

namespace {
std::atomic<int> g_cnr{static_cast<int>(cnr_property::none)};
}

void set_cnr_property(cnr_property prop) noexcept {
  g_cnr.store(static_cast<int>(prop), std::memory_order_seq_cst);
}

cnr_property get_cnr_property() noexcept {
  return static_cast<cnr_property>(g_cnr.load(std::memory_order_seq_cst));
}

std::string_view cnr_name(cnr_property p) noexcept {
  switch (p) {
    case cnr_property::none: return "default";
    case cnr_property::cnr: return "cnr";
    case cnr_property::strict_cnr: return "strict_cnr";
  }
  return "unknown";
}

int default_thread_count() noexcept {
  if (const char* env = std::getenv(thread_count_env.data())) {
    int n = 0;
    const char* end = env + std::strlen(env);
    auto [ptr, ec] = std::from_chars(env, end, n);
    if (ec == std::errc() && ptr == end && n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::string_view category_name(error_category c) noexcept {
  switch (c) {
    case error_category::validation: return "validation";
    case error_category::shape_mismatch: return "shape_mismatch";
    case error_category::aliasing: return "aliasing";
    case error_category::read_only_values: return "read_only_values";
    case error_category::phase: return "phase";
    case error_category::stale_structure: return "stale_structure";
    case error_category::output_length: return "output_length";
    case error_category::singular_structure: return "singular_structure";
    case error_category::numeric_singularity: return "numeric_singularity";
    case error_category::pattern: return "pattern";
    case error_category::unsupported: return "unsupported";
    case error_category::parse: return "parse";
    case error_category::duplicate_entry: return "duplicate_entry";
    case error_category::io: return "io";
  }
  return "unknown";
}

std::string_view violation_name(violation_kind k) noexcept {
  switch (k) {
    case violation_kind::negative_extent: return "negative_extent";
    case violation_kind::array_length: return "array_length";
    case violation_kind::offsets_not_monotone: return "offsets_not_monotone";
    case violation_kind::offsets_nnz_mismatch: return "offsets_nnz_mismatch";
    case violation_kind::index_out_of_range: return "index_out_of_range";
    case violation_kind::unsorted: return "unsorted";
    case violation_kind::duplicate_index: return "duplicate_index";
  }
  return "unknown";
}

std::string validation_report::describe() const {
  if (violations.empty()) return "ok";
  std::string s;
  for (const auto& v : violations) {
    if (!s.empty()) s += "; ";
    s += violation_name(v.kind);
    s += " at ";
    s += std::to_string(v.index);
  }
  return s;
}

std::string_view op_kind_name(op_kind k) noexcept {
  switch (k) {
    case op_kind::scale: return "scale";
    case op_kind::matrix_inf_norm: return "matrix_inf_norm";
    case op_kind::matrix_frob_norm: return "matrix_frob_norm";
    case op_kind::multiply: return "multiply";
    case op_kind::triangular_solve: return "triangular_solve";
    case op_kind::sampled_multiply: return "sampled_multiply";
    case op_kind::sparse_multiply: return "sparse_multiply";
    case op_kind::add: return "add";
    case op_kind::multiply_elementwise: return "multiply_elementwise";
    case op_kind::convert: return "convert";
    case op_kind::filter: return "filter";
    case op_kind::transpose: return "transpose";
  }
  return "unknown";
}

std::string_view phase_name(phase p) noexcept {
  switch (p) {
    case phase::created: return "created";
    case phase::inspected: return "inspected";
    case phase::executed: return "executed";
    case phase::computed: return "computed";
    case phase::filled: return "filled";
    case phase::symbolic_computed: return "symbolic_computed";
    case phase::symbolic_filled: return "symbolic_filled";
    case phase::numeric_computed: return "numeric_computed";
    case phase::numeric_filled: return "numeric_filled";
  }
  return "unknown";
}

}  // namespace spblas
