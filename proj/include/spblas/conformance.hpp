#pragma once

// Numerical conformance harness: runs every kernel family against the
// reference oracles and reports one record per case.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <spblas/runtime.hpp>

namespace spblas::conformance {

struct case_record {
  std::string family;
  std::string case_id;
  std::string scalar;
  bool pass = true;
  double slack = 0;            // worst error / bound over the case
  std::int64_t mismatches = 0;  // pattern positions that differ from the oracle
  std::string detail;
};

struct report {
  std::vector<case_record> records;

  void add(case_record r) { records.push_back(std::move(r)); }
  void append(const report& other);
  std::size_t failures() const;
  std::size_t count(const std::string& family) const;
  double max_slack() const;
  std::int64_t total_mismatches() const;
  // One JSON object per line: family, case, scalar, verdict, slack,
  // mismatches, detail.
  void write_jsonl(std::ostream& out) const;
};

struct options {
  std::vector<std::string> families;  // empty: every family of the suite
  int cases_per_family = 200;
  std::uint64_t seed = 20240611;
  int max_dim = 64;
  std::vector<double> densities{0.01, 0.1, 0.3};
  std::vector<std::string> scalars{"float", "double"};
};

const std::vector<std::string>& value_families();
const std::vector<std::string>& pattern_families();
const std::vector<std::string>& exact_families();

/// Values within the dot-product error bound f(m) eps sum|x||y| + g(m) UN
/// with f(m) = m, g(m) = 2m, plus exact patterns.
report value_suite(const options& opt);

/// Output patterns against the boolean oracles on inputs rich in explicit
/// zeros and cancellation.
report pattern_suite(const options& opt);

/// Integer-valued inputs whose intermediates are exactly representable:
/// results must equal the oracle bitwise.
report exact_integer_suite(const options& opt);

/// The eight exception-propagation cases.
report exception_matrix_suite();

struct reproducibility_options {
  std::vector<std::string> families;  // empty: every family
  cnr_property property = cnr_property::strict_cnr;
  std::vector<int> threads{1, 2, 4, 8};
  int repeats = 1;
  std::uint64_t seed = 7;
  int dim = 1200;
};

const std::vector<std::string>& reproducibility_families();

/// Byte-compares outputs across repeats and thread counts. Under the
/// default property nothing is promised: differences are recorded, never
/// failed.
report reproducibility_suite(const reproducibility_options& opt);

}  // namespace spblas::conformance
