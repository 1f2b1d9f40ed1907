#include <doctest.h>

#include <sstream>

#include <json.hpp>
#include <spblas/conformance.hpp>

using namespace spblas::conformance;

TEST_CASE("small value run covers every family") {
  options o;
  o.cases_per_family = 4;
  const auto r = value_suite(o);
  CHECK(r.failures() == 0);
  for (const auto& f : value_families()) CHECK(r.count(f) == 8);
}

TEST_CASE("families can be selected") {
  options o;
  o.cases_per_family = 3;
  o.families = {"spgemm"};
  o.scalars = {"double"};
  const auto r = pattern_suite(o);
  CHECK(r.records.size() == 3);
  CHECK(r.total_mismatches() == 0);
}

TEST_CASE("same seed, same records") {
  options o;
  o.cases_per_family = 2;
  o.families = {"add", "sddmm"};
  const auto a = exact_integer_suite(o);
  const auto b = exact_integer_suite(o);
  std::ostringstream sa, sb;
  a.write_jsonl(sa);
  b.write_jsonl(sb);
  CHECK(sa.str() == sb.str());
}

TEST_CASE("JSON lines report") {
  const auto r = exception_matrix_suite();
  CHECK(r.records.size() == 8);
  std::ostringstream os;
  r.write_jsonl(os);
  std::istringstream in(os.str());
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("family"));
    CHECK(j.contains("case"));
    CHECK(j["verdict"] == "pass");
    CHECK(j.contains("slack"));
    ++n;
  }
  CHECK(n == 8);
}

TEST_CASE("default property records differences without failing") {
  reproducibility_options o;
  o.property = spblas::cnr_property::none;
  o.threads = {1, 3};
  o.dim = 200;
  o.families = {"spmv", "frob_norm"};
  const auto r = reproducibility_suite(o);
  CHECK(r.records.size() == 2);
  CHECK(r.failures() == 0);
}
