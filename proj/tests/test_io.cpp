#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>
#include <vector>

#include <spblas/io.hpp>
#include <spblas/spblas.hpp>
#include <spblas/oracle/corpus.hpp>

using namespace spblas;
using namespace spblas::io;

namespace {

template <class T>
coo_matrix<T> parse(const std::string& text, index_base base = index_base::zero) {
  std::istringstream in(text);
  return mm_read<T>(in, base);
}

template <class F>
error_category category_of(F&& f) {
  try {
    f();
  } catch (const sparse_error& e) {
    return e.category();
  }
  FAIL("no error raised");
  return error_category::validation;
}

template <class T>
bool same_bits(T a, T b) {
  return std::memcmp(&a, &b, sizeof(T)) == 0;
}

}  // namespace

TEST_CASE("identity coordinate file") {
  auto m = parse<double>(
      "%%MatrixMarket matrix coordinate real general\n% comment\n3 3 3\n1 1 1\n2 2 1\n3 3 1\n");
  CHECK(m.nnz() == 3);
  CHECK(m.header.field == mm_field::real);
  CHECK(validate(m.view()).ok());
  CHECK(m.rows == std::vector<std::int32_t>{0, 1, 2});
}

TEST_CASE("symmetric expansion") {
  auto m = parse<double>(
      "%%MatrixMarket matrix coordinate real symmetric\n3 3 2\n2 1 7.5\n3 3 -1\n");
  CHECK(m.nnz() == 3);
  CHECK(m.rows == std::vector<std::int32_t>{0, 1, 2});
  CHECK(m.cols == std::vector<std::int32_t>{1, 0, 2});
  CHECK(m.values == std::vector<double>{7.5, 7.5, -1});

  auto s = parse<double>(
      "%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n2 1 3\n");
  CHECK(s.values == std::vector<double>{-3, 3});
}

TEST_CASE("pattern files are iso valued") {
  auto m = parse<float>("%%MatrixMarket matrix coordinate pattern general\n2 3 2\n1 3\n2 1\n",
                        index_base::one);
  CHECK(m.iso);
  auto v = m.view();
  CHECK(v.values().is_iso());
  CHECK(v.base() == index_base::one);
  CHECK(v.col_indices()[0] == 3);
  CHECK(validate(v).ok());
}

TEST_CASE("malformed input") {
  CHECK(category_of([] {
          (void)parse<double>("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n1 1 2\n");
        }) == error_category::duplicate_entry);
  CHECK(category_of([] { (void)parse<double>("hello\n"); }) == error_category::parse);
  CHECK(category_of([] {
          (void)parse<double>("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n");
        }) == error_category::parse);
  CHECK(category_of([] {
          (void)parse<double>("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n");
        }) == error_category::parse);
  CHECK(category_of([] { (void)mm_read_file<double>("/nonexistent/file.mtx"); }) ==
        error_category::io);
}

TEST_CASE("array format") {
  auto m = parse<double>("%%MatrixMarket matrix array real general\n2 2\n1\n0\n3\n4\n");
  // Column-major; zeros are kept as explicit entries.
  CHECK(m.nnz() == 4);
  CHECK(m.values == std::vector<double>{1, 3, 0, 4});
}

TEST_CASE("bitwise round trip of awkward values") {
  const double pi = std::numbers::pi;
  std::vector<oracle::triple<double>> t{{0, 0, pi}, {0, 2, 1e-300}, {1, 1, -0.0},
                                        {2, 0, 4.9406564584124654e-324}, {2, 2, -1.7976931348623157e308}};
  auto m = oracle::from_triples<double>(3, 3, t, index_base::one);
  std::stringstream ss;
  mm_write(ss, m.csc());
  auto back = mm_read<double>(ss);
  REQUIRE(back.nnz() == 5);
  for (std::size_t k = 0; k < t.size(); ++k) CHECK(same_bits(back.values[k], t[k].v));
  CHECK(std::signbit(back.values[2]));

  auto f = oracle::from_triples<float>(1, 2, {{0, 0, 3.14159274f}, {0, 1, 1e-45f}});
  std::stringstream fs;
  mm_write(fs, f.coo());
  auto fb = mm_read<float>(fs);
  CHECK(same_bits(fb.values[0], 3.14159274f));
  CHECK(same_bits(fb.values[1], 1e-45f));
}

TEST_CASE("empty matrix round trip") {
  auto e = oracle::from_triples<double>(4, 6, {});
  std::stringstream ss;
  mm_write(ss, e.csr());
  auto back = mm_read<double>(ss);
  CHECK(back.nrows == 4);
  CHECK(back.ncols == 6);
  CHECK(back.nnz() == 0);
}

TEST_CASE("complex values") {
  using C = std::complex<double>;
  auto m = parse<C>("%%MatrixMarket matrix coordinate complex hermitian\n2 2 2\n1 1 2 0\n2 1 1 -1\n");
  CHECK(m.values == std::vector<C>{C(2, 0), C(1, 1), C(1, -1)});
  CHECK(category_of([] {
          (void)parse<double>("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 1\n");
        }) == error_category::unsupported);
}

TEST_CASE("vectors") {
  std::istringstream in("% rhs\n1.5\n\n-2\n1e-300\n");
  auto v = read_vector<double>(in);
  CHECK(v == std::vector<double>{1.5, -2, 1e-300});
  std::ostringstream out;
  write_vector<double>(out, v);
  std::istringstream again(out.str());
  CHECK(read_vector<double>(again) == v);
  CHECK(format_scalar(0.1) == "0.1");
}
