#include <spblas/io.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <tuple>

#include <spblas/errors.hpp>

namespace spblas::io {

namespace {

std::string lower(std::string_view s) {
  std::string r(s);
  for (auto& c : r) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return r;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

[[noreturn]] void parse_fail(std::int64_t line_no, const std::string& msg) {
  raise(error_category::parse, "line " + std::to_string(line_no) + ": " + msg);
}

std::int64_t parse_int(std::string_view tok, std::int64_t line_no) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    parse_fail(line_no, "expected an integer, got '" + std::string(tok) + "'");
  }
  return v;
}

template <class R>
R parse_real(std::string_view tok, std::int64_t line_no) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  R v{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec == std::errc::result_out_of_range) {
    // from_chars leaves v untouched on overflow/underflow; fall back to the
    // C library, which rounds to +-inf or a (sub)normal/zero.
    std::string s(tok);
    if constexpr (std::is_same_v<R, float>) {
      return std::strtof(s.c_str(), nullptr);
    } else {
      return std::strtod(s.c_str(), nullptr);
    }
  }
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    parse_fail(line_no, "expected a number, got '" + std::string(tok) + "'");
  }
  return v;
}

mm_header parse_banner(std::string_view line) {
  const auto tok = split(line);
  if (tok.size() != 5 || lower(tok[0]) != "%%matrixmarket") {
    raise(error_category::parse, "line 1: missing %%MatrixMarket banner");
  }
  if (lower(tok[1]) != "matrix") {
    raise(error_category::parse, "line 1: unsupported object '" + std::string(tok[1]) + "'");
  }
  mm_header h;
  const auto layout = lower(tok[2]);
  if (layout == "coordinate") {
    h.layout = mm_layout::coordinate;
  } else if (layout == "array") {
    h.layout = mm_layout::array;
  } else {
    raise(error_category::parse, "line 1: unknown format '" + std::string(tok[2]) + "'");
  }
  const auto field = lower(tok[3]);
  if (field == "real" || field == "double") {
    h.field = mm_field::real;
  } else if (field == "integer") {
    h.field = mm_field::integer;
  } else if (field == "complex") {
    h.field = mm_field::complex;
  } else if (field == "pattern") {
    h.field = mm_field::pattern;
  } else {
    raise(error_category::parse, "line 1: unknown field '" + std::string(tok[3]) + "'");
  }
  const auto sym = lower(tok[4]);
  if (sym == "general") {
    h.symmetry = mm_symmetry::general;
  } else if (sym == "symmetric") {
    h.symmetry = mm_symmetry::symmetric;
  } else if (sym == "skew-symmetric") {
    h.symmetry = mm_symmetry::skew_symmetric;
  } else if (sym == "hermitian") {
    h.symmetry = mm_symmetry::hermitian;
  } else {
    raise(error_category::parse, "line 1: unknown symmetry '" + std::string(tok[4]) + "'");
  }
  if (h.layout == mm_layout::array && h.field == mm_field::pattern) {
    raise(error_category::parse, "line 1: array format cannot have pattern field");
  }
  if (h.symmetry == mm_symmetry::hermitian && h.field != mm_field::complex) {
    raise(error_category::parse, "line 1: hermitian requires complex field");
  }
  return h;
}

// Reads lines, skipping comments and blank lines, tracking line numbers.
class line_reader {
public:
  explicit line_reader(std::istream& in) : in_(in) {}

  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '%' || blank(line)) continue;
      return true;
    }
    return false;
  }

  bool raw(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  std::int64_t line_no() const noexcept { return line_no_; }

private:
  std::istream& in_;
  std::int64_t line_no_ = 0;
};

template <class T>
T read_value(const std::vector<std::string_view>& tok, std::size_t at, mm_field field,
             std::int64_t line_no) {
  using R = real_t<T>;
  const std::size_t need = at + (field == mm_field::complex ? 2 : 1);
  if (tok.size() != need) parse_fail(line_no, "wrong number of fields");
  if (field == mm_field::complex) {
    if constexpr (is_complex_v<T>) {
      return T(parse_real<R>(tok[at], line_no), parse_real<R>(tok[at + 1], line_no));
    } else {
      raise(error_category::unsupported, "complex file read into a real scalar type");
    }
  } else {
    return T(parse_real<R>(tok[at], line_no));
  }
}

template <class T>
T mirror(T v, mm_symmetry s) {
  switch (s) {
    case mm_symmetry::skew_symmetric: return -v;
    case mm_symmetry::hermitian:
      if constexpr (is_complex_v<T>) return std::conj(v);
      return v;
    default: return v;
  }
}

template <class T>
std::string scalar_text(T v) {
  if constexpr (is_complex_v<T>) {
    return format_scalar(v.real()) + " " + format_scalar(v.imag());
  } else {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
  }
}

struct triple_order {
  const std::vector<std::int64_t>* r;
  const std::vector<std::int64_t>* c;
  bool operator()(std::size_t a, std::size_t b) const {
    return std::tie((*r)[a], (*c)[a]) < std::tie((*r)[b], (*c)[b]);
  }
};

template <class T>
void write_triples(std::ostream& out, std::int64_t nrows, std::int64_t ncols,
                   std::vector<std::int64_t> rows, std::vector<std::int64_t> cols,
                   const value_array<T>& values, const std::vector<std::int64_t>& position) {
  const bool pattern = values.is_iso() && values.size() > 0 && values[0] == T(1);
  const bool iso_empty_pattern = values.is_iso() && values.size() == 0;
  const char* field = (pattern || iso_empty_pattern) ? "pattern"
                      : is_complex_v<T>             ? "complex"
                                                    : "real";
  out << "%%MatrixMarket matrix coordinate " << field << " general\n";
  out << nrows << ' ' << ncols << ' ' << rows.size() << '\n';
  std::vector<std::size_t> perm(rows.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::stable_sort(perm.begin(), perm.end(), triple_order{&rows, &cols});
  std::string line;
  for (auto k : perm) {
    line.clear();
    line += std::to_string(rows[k] + 1);
    line += ' ';
    line += std::to_string(cols[k] + 1);
    if (!(pattern || iso_empty_pattern)) {
      line += ' ';
      line += scalar_text(values[static_cast<std::size_t>(position[k])]);
    }
    line += '\n';
    out << line;
  }
  if (!out) raise(error_category::io, "write failed");
}

}  // namespace

std::string_view field_name(mm_field f) noexcept {
  switch (f) {
    case mm_field::real: return "real";
    case mm_field::integer: return "integer";
    case mm_field::complex: return "complex";
    case mm_field::pattern: return "pattern";
  }
  return "unknown";
}

std::string_view symmetry_name(mm_symmetry s) noexcept {
  switch (s) {
    case mm_symmetry::general: return "general";
    case mm_symmetry::symmetric: return "symmetric";
    case mm_symmetry::skew_symmetric: return "skew-symmetric";
    case mm_symmetry::hermitian: return "hermitian";
  }
  return "unknown";
}

template <class T>
std::string format_scalar(T v) {
  return scalar_text(v);
}

template <class T>
coo_matrix<T> mm_read(std::istream& in, index_base base) {
  line_reader reader(in);
  std::string line;
  if (!reader.raw(line)) raise(error_category::parse, "empty input");
  mm_header h = parse_banner(line);

  if (!reader.next(line)) parse_fail(reader.line_no(), "missing size line");
  const auto size_tok = split(line);
  const std::size_t size_fields = h.layout == mm_layout::coordinate ? 3 : 2;
  if (size_tok.size() != size_fields) parse_fail(reader.line_no(), "malformed size line");
  h.nrows = parse_int(size_tok[0], reader.line_no());
  h.ncols = parse_int(size_tok[1], reader.line_no());
  if (h.nrows < 0 || h.ncols < 0) parse_fail(reader.line_no(), "negative extent");
  if (h.nrows > INT32_MAX || h.ncols > INT32_MAX) {
    raise(error_category::unsupported, "extents exceed 32-bit indices");
  }
  const bool symmetric_kind = h.symmetry != mm_symmetry::general;
  if (symmetric_kind && h.nrows != h.ncols) {
    parse_fail(reader.line_no(), "symmetric storage requires a square matrix");
  }
  if (h.layout == mm_layout::coordinate) {
    h.entries = parse_int(size_tok[2], reader.line_no());
    if (h.entries < 0) parse_fail(reader.line_no(), "negative entry count");
  } else if (!symmetric_kind) {
    h.entries = h.nrows * h.ncols;
  } else if (h.symmetry == mm_symmetry::skew_symmetric) {
    h.entries = h.nrows * (h.nrows - 1) / 2;
  } else {
    h.entries = h.nrows * (h.nrows + 1) / 2;
  }

  std::vector<std::int64_t> ri;
  std::vector<std::int64_t> ci;
  std::vector<T> vals;
  const bool pattern = h.field == mm_field::pattern;
  const auto reserve = static_cast<std::size_t>(symmetric_kind ? 2 * h.entries : h.entries);
  ri.reserve(reserve);
  ci.reserve(reserve);
  if (!pattern) vals.reserve(reserve);

  auto push = [&](std::int64_t i, std::int64_t j, T v) {
    ri.push_back(i);
    ci.push_back(j);
    if (!pattern) vals.push_back(v);
    if (symmetric_kind && i != j) {
      ri.push_back(j);
      ci.push_back(i);
      if (!pattern) vals.push_back(mirror(v, h.symmetry));
    }
  };

  if (h.layout == mm_layout::coordinate) {
    for (std::int64_t k = 0; k < h.entries; ++k) {
      if (!reader.next(line)) {
        parse_fail(reader.line_no(), "expected " + std::to_string(h.entries) + " entries, found " +
                                         std::to_string(k));
      }
      const auto tok = split(line);
      if (tok.size() < 2) parse_fail(reader.line_no(), "wrong number of fields");
      const std::int64_t i = parse_int(tok[0], reader.line_no()) - 1;
      const std::int64_t j = parse_int(tok[1], reader.line_no()) - 1;
      if (i < 0 || i >= h.nrows || j < 0 || j >= h.ncols) {
        parse_fail(reader.line_no(), "index (" + std::to_string(i + 1) + ", " +
                                         std::to_string(j + 1) + ") outside declared " +
                                         std::to_string(h.nrows) + "x" + std::to_string(h.ncols));
      }
      if (symmetric_kind && j > i) {
        parse_fail(reader.line_no(), "entry above the diagonal in symmetric storage");
      }
      if (h.symmetry == mm_symmetry::skew_symmetric && i == j) {
        parse_fail(reader.line_no(), "diagonal entry in skew-symmetric storage");
      }
      if (pattern) {
        if (tok.size() != 2) parse_fail(reader.line_no(), "wrong number of fields");
        push(i, j, T(1));
      } else {
        push(i, j, read_value<T>(tok, 2, h.field, reader.line_no()));
      }
    }
  } else {
    // Column-major; symmetric kinds store the lower triangle only.
    for (std::int64_t j = 0; j < h.ncols; ++j) {
      const std::int64_t first = !symmetric_kind                               ? 0
                                 : h.symmetry == mm_symmetry::skew_symmetric ? j + 1
                                                                               : j;
      for (std::int64_t i = first; i < h.nrows; ++i) {
        if (!reader.next(line)) parse_fail(reader.line_no(), "too few array entries");
        push(i, j, read_value<T>(split(line), 0, h.field, reader.line_no()));
      }
    }
  }
  if (reader.next(line)) parse_fail(reader.line_no(), "unexpected data after the last entry");

  std::vector<std::size_t> perm(ri.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::stable_sort(perm.begin(), perm.end(), triple_order{&ri, &ci});

  coo_matrix<T> m;
  m.header = h;
  m.nrows = static_cast<std::int32_t>(h.nrows);
  m.ncols = static_cast<std::int32_t>(h.ncols);
  m.base = base;
  m.iso = pattern;
  m.rows.resize(perm.size());
  m.cols.resize(perm.size());
  if (!pattern) m.values.resize(perm.size());
  const std::int64_t b = static_cast<int>(base);
  for (std::size_t k = 0; k < perm.size(); ++k) {
    const auto src = perm[k];
    if (k > 0 && ri[src] == ri[perm[k - 1]] && ci[src] == ci[perm[k - 1]]) {
      raise(error_category::duplicate_entry, "duplicate entry (" + std::to_string(ri[src] + 1) +
                                                 ", " + std::to_string(ci[src] + 1) + ")");
    }
    m.rows[k] = static_cast<std::int32_t>(ri[src] + b);
    m.cols[k] = static_cast<std::int32_t>(ci[src] + b);
    if (!pattern) m.values[k] = vals[src];
  }
  return m;
}

template <class T>
coo_matrix<T> mm_read_file(const std::string& path, index_base base) {
  std::ifstream in(path);
  if (!in) raise(error_category::io, "cannot open '" + path + "'");
  return mm_read<T>(in, base);
}

mm_header mm_read_header(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(error_category::io, "cannot open '" + path + "'");
  line_reader reader(in);
  std::string line;
  if (!reader.raw(line)) raise(error_category::parse, "empty input");
  mm_header h = parse_banner(line);
  if (!reader.next(line)) parse_fail(reader.line_no(), "missing size line");
  const auto tok = split(line);
  if (tok.size() < 2) parse_fail(reader.line_no(), "malformed size line");
  h.nrows = parse_int(tok[0], reader.line_no());
  h.ncols = parse_int(tok[1], reader.line_no());
  h.entries = tok.size() > 2 ? parse_int(tok[2], reader.line_no()) : h.nrows * h.ncols;
  return h;
}

template <class T>
void mm_write(std::ostream& out, const coo_view<T>& a) {
  const std::int64_t base = static_cast<int>(a.base());
  const auto n = static_cast<std::size_t>(a.nnz());
  std::vector<std::int64_t> r(n), c(n), pos(n);
  for (std::size_t k = 0; k < n; ++k) {
    r[k] = a.row_indices()[k] - base;
    c[k] = a.col_indices()[k] - base;
    pos[k] = static_cast<std::int64_t>(k);
  }
  write_triples(out, a.nrows(), a.ncols(), std::move(r), std::move(c), a.values(), pos);
}

template <class T>
void mm_write(std::ostream& out, const csr_view<T>& a) {
  const std::int64_t base = static_cast<int>(a.base());
  const auto off = a.row_offsets();
  const std::int64_t first = off.empty() ? 0 : off[0];
  std::vector<std::int64_t> r, c, pos;
  for (std::int64_t i = 0; i < a.nrows(); ++i) {
    for (std::int64_t k = off[i] - first; k < off[i + 1] - first; ++k) {
      r.push_back(i);
      c.push_back(a.col_indices()[k] - base);
      pos.push_back(k);
    }
  }
  write_triples(out, a.nrows(), a.ncols(), std::move(r), std::move(c), a.values(), pos);
}

template <class T>
void mm_write(std::ostream& out, const csc_view<T>& a) {
  const std::int64_t base = static_cast<int>(a.base());
  const auto off = a.col_offsets();
  const std::int64_t first = off.empty() ? 0 : off[0];
  std::vector<std::int64_t> r, c, pos;
  for (std::int64_t j = 0; j < a.ncols(); ++j) {
    for (std::int64_t k = off[j] - first; k < off[j + 1] - first; ++k) {
      r.push_back(a.row_indices()[k] - base);
      c.push_back(j);
      pos.push_back(k);
    }
  }
  write_triples(out, a.nrows(), a.ncols(), std::move(r), std::move(c), a.values(), pos);
}

template <class V>
void mm_write_file(const std::string& path, const V& a) {
  std::ofstream out(path);
  if (!out) raise(error_category::io, "cannot open '" + path + "' for writing");
  mm_write(out, a);
}

template <class T>
std::vector<T> read_vector(std::istream& in) {
  using R = real_t<T>;
  line_reader reader(in);
  std::string line;
  std::vector<T> v;
  while (reader.next(line)) {
    const auto tok = split(line);
    if constexpr (is_complex_v<T>) {
      if (tok.size() == 1) {
        v.emplace_back(parse_real<R>(tok[0], reader.line_no()), R(0));
      } else if (tok.size() == 2) {
        v.emplace_back(parse_real<R>(tok[0], reader.line_no()),
                       parse_real<R>(tok[1], reader.line_no()));
      } else {
        parse_fail(reader.line_no(), "expected one or two numbers");
      }
    } else {
      if (tok.size() != 1) parse_fail(reader.line_no(), "expected one number per line");
      v.push_back(parse_real<R>(tok[0], reader.line_no()));
    }
  }
  return v;
}

template <class T>
std::vector<T> read_vector_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(error_category::io, "cannot open '" + path + "'");
  return read_vector<T>(in);
}

template <class T>
void write_vector(std::ostream& out, std::span<const T> v) {
  for (const auto& x : v) out << scalar_text(x) << '\n';
  if (!out) raise(error_category::io, "write failed");
}

#define SPBLAS_IO_INSTANTIATE(T)                                                        \
  template std::string format_scalar<T>(T);                                             \
  template coo_matrix<T> mm_read<T>(std::istream&, index_base);                         \
  template coo_matrix<T> mm_read_file<T>(const std::string&, index_base);               \
  template void mm_write<T>(std::ostream&, const coo_view<T>&);                         \
  template void mm_write<T>(std::ostream&, const csr_view<T>&);                         \
  template void mm_write<T>(std::ostream&, const csc_view<T>&);                         \
  template void mm_write_file<coo_view<T>>(const std::string&, const coo_view<T>&);     \
  template void mm_write_file<csr_view<T>>(const std::string&, const csr_view<T>&);     \
  template void mm_write_file<csc_view<T>>(const std::string&, const csc_view<T>&);     \
  template std::vector<T> read_vector<T>(std::istream&);                                \
  template std::vector<T> read_vector_file<T>(const std::string&);                      \
  template void write_vector<T>(std::ostream&, std::span<const T>);

SPBLAS_IO_INSTANTIATE(float)
SPBLAS_IO_INSTANTIATE(double)
SPBLAS_IO_INSTANTIATE(std::complex<float>)
SPBLAS_IO_INSTANTIATE(std::complex<double>)

#undef SPBLAS_IO_INSTANTIATE

}  // namespace spblas::io
