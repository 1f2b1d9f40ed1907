#include <spblas/conformance.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "conformance_internal.hpp"

namespace spblas::conformance {

using namespace internal;

void report::append(const report& other) {
  records.insert(records.end(), other.records.begin(), other.records.end());
}

std::size_t report::failures() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const case_record& r) { return !r.pass; }));
}

std::size_t report::count(const std::string& family) const {
  return static_cast<std::size_t>(std::count_if(
      records.begin(), records.end(), [&](const case_record& r) { return r.family == family; }));
}

double report::max_slack() const {
  double s = 0;
  for (const auto& r : records) s = std::max(s, r.slack);
  return s;
}

std::int64_t report::total_mismatches() const {
  std::int64_t n = 0;
  for (const auto& r : records) n += r.mismatches;
  return n;
}

void report::write_jsonl(std::ostream& out) const {
  for (const auto& r : records) {
    nlohmann::json j{{"family", r.family},   {"case", r.case_id},
                     {"scalar", r.scalar},   {"verdict", r.pass ? "pass" : "fail"},
                     {"slack", r.slack},     {"mismatches", r.mismatches},
                     {"detail", r.detail}};
    out << j.dump() << '\n';
  }
}

const std::vector<std::string>& value_families() {
  static const std::vector<std::string> f{"scale",  "inf_norm", "frob_norm", "spmv",   "spmm",
                                          "trisolve", "sddmm",  "spgemm",    "add",    "hadamard",
                                          "convert", "filter",  "transpose"};
  return f;
}

const std::vector<std::string>& pattern_families() {
  static const std::vector<std::string> f{"spgemm", "add",     "hadamard",
                                          "filter", "convert", "transpose"};
  return f;
}

const std::vector<std::string>& exact_families() {
  static const std::vector<std::string> f{"spmv", "spmm",     "spgemm",   "add",  "hadamard",
                                          "sddmm", "trisolve", "inf_norm", "scale"};
  return f;
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::mt19937_64 case_rng(std::uint64_t seed, mode kind, const std::string& family,
                         const std::string& scalar, std::int64_t index, int attempt) {
  const std::uint64_t f = fnv1a(family + "/" + scalar);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(kind), static_cast<std::uint32_t>(f),
                    static_cast<std::uint32_t>(f >> 32), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(attempt)};
  return std::mt19937_64(seq);
}

case_record failed(const std::string& family, const std::string& scalar, std::int64_t index,
                   const std::string& why) {
  case_record r;
  r.family = family;
  r.scalar = scalar;
  r.case_id = family + "/" + scalar + "/" + std::to_string(index);
  r.pass = false;
  r.detail = why;
  return r;
}

template <class T>
void run_family(report& out, const options& opt, const case_config& cfg,
                const std::string& family) {
  const auto fn = find_family<T>(family);
  const std::string scalar = scalar_name<T>();
  if (!fn) {
    out.add(failed(family, scalar, 0, "unknown family"));
    return;
  }
  // Integer mode redraws inputs whose intermediates would not be exact.
  constexpr int max_attempts = 64;
  for (std::int64_t i = 0; i < opt.cases_per_family; ++i) {
    std::optional<case_record> rec;
    for (int attempt = 0; attempt < max_attempts && !rec; ++attempt) {
      auto rng = case_rng(opt.seed, cfg.kind, family, scalar, i, attempt);
      rec = fn(rng, cfg, i);
    }
    out.add(rec ? std::move(*rec)
                : failed(family, scalar, i, "no exactly representable input drawn"));
  }
}

report run_suite(const options& opt, const std::vector<std::string>& all, mode kind,
                 int dim_cap) {
  case_config cfg;
  cfg.kind = kind;
  cfg.max_dim = std::min(opt.max_dim, dim_cap);
  cfg.densities = opt.densities.empty() ? std::vector<double>{0.1} : opt.densities;
  std::vector<std::string> families;
  for (const auto& f : opt.families.empty() ? all : opt.families) {
    if (std::find(all.begin(), all.end(), f) != all.end() || !opt.families.empty()) {
      families.push_back(f);
    }
  }
  report out;
  for (const auto& scalar : opt.scalars) {
    for (const auto& family : families) {
      if (std::find(all.begin(), all.end(), family) == all.end()) {
        out.add(failed(family, scalar, 0, "family not part of this suite"));
      } else if (scalar == "float") {
        run_family<float>(out, opt, cfg, family);
      } else if (scalar == "double") {
        run_family<double>(out, opt, cfg, family);
      } else {
        out.add(failed(family, scalar, 0, "scalar type not covered by the harness"));
      }
    }
  }
  return out;
}

}  // namespace

report value_suite(const options& opt) {
  return run_suite(opt, value_families(), mode::values, std::numeric_limits<int>::max());
}

report pattern_suite(const options& opt) {
  return run_suite(opt, pattern_families(), mode::patterns, std::numeric_limits<int>::max());
}

report exact_integer_suite(const options& opt) {
  return run_suite(opt, exact_families(), mode::integers, 32);
}

// ---- exception propagation -------------------------------------------------

namespace {

using D = double;

struct small_csr {
  std::vector<D> values;
  std::vector<std::int64_t> offsets;
  std::vector<std::int32_t> cols;
  std::int32_t nrows;
  std::int32_t ncols;

  csr_view<D> view() {
    return {std::span<D>(values), std::span<std::int64_t>(offsets), std::span<std::int32_t>(cols),
            nrows, ncols, static_cast<std::int64_t>(values.size())};
  }
};

case_record exception_case(const std::string& name, bool pass, const std::vector<D>& y) {
  case_record r;
  r.family = "exceptions";
  r.scalar = "double";
  r.case_id = "exceptions/" + name;
  r.pass = pass;
  std::string s = "y = [";
  for (std::size_t k = 0; k < y.size(); ++k) s += (k ? ", " : "") + std::to_string(y[k]);
  r.detail = s + "]";
  return r;
}

// y = alpha * A * x (+ beta * y when beta is given).
std::vector<D> spmv(small_csr& a, std::vector<D> x, std::vector<D> y, D alpha,
                    std::optional<D> beta = std::nullopt) {
  multiply_state_t st;
  dense_view<D> xv(std::span<D>(x), x.size());
  dense_view<D> yv(std::span<D>(y), y.size());
  if (beta) {
    multiply(seq, st, scaled(alpha, a.view()), xv, scaled(*beta, yv), yv);
  } else {
    multiply(seq, st, scaled(alpha, a.view()), xv, yv);
  }
  return y;
}

}  // namespace

report exception_matrix_suite() {
  const D nan = std::numeric_limits<D>::quiet_NaN();
  const D inf = std::numeric_limits<D>::infinity();
  auto nonfinite = [](D v) { return std::isnan(v) || std::isinf(v); };
  report out;

  auto guard = [&](const std::string& name, auto&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      case_record r = exception_case(name, false, {});
      r.detail = std::string("exception: ") + e.what();
      out.add(r);
    }
  };

  guard("stored_nan", [&] {
    small_csr a{{nan, 2.0}, {0, 1, 2}, {0, 1}, 2, 2};
    auto y = spmv(a, {1.0, 1.0}, {0.0, 0.0}, 1.0);
    out.add(exception_case("stored_nan", nonfinite(y[0]) && y[1] == 2.0, y));
  });
  guard("stored_inf", [&] {
    small_csr a{{inf, 1.0, 3.0}, {0, 2, 3}, {0, 1, 1}, 2, 2};
    auto y = spmv(a, {1.0, 1.0}, {0.0, 0.0}, 1.0);
    out.add(exception_case("stored_inf", nonfinite(y[0]) && y[1] == 3.0, y));
  });
  guard("x_nan_implicit_zero", [&] {
    // Column 1 holds no stored entry at all.
    small_csr a{{1.0, 2.0}, {0, 1, 2}, {0, 0}, 2, 2};
    auto y = spmv(a, {1.0, nan}, {0.0, 0.0}, 1.0);
    // And a row that skips the NaN column while another row reads it.
    small_csr b{{1.0, 1.0}, {0, 1, 2}, {0, 1}, 2, 2};
    auto z = spmv(b, {1.0, inf}, {0.0, 0.0}, 1.0);
    const bool pass = y[0] == 1.0 && y[1] == 2.0 && z[0] == 1.0 && std::isinf(z[1]);
    y.insert(y.end(), z.begin(), z.end());
    out.add(exception_case("x_nan_implicit_zero", pass, y));
  });
  guard("x_inf_explicit_zero", [&] {
    small_csr a{{1.0, 0.0, 1.0}, {0, 2, 3}, {0, 1, 0}, 2, 2};
    auto y = spmv(a, {1.0, inf}, {0.0, 0.0}, 1.0);
    out.add(exception_case("x_inf_explicit_zero", std::isnan(y[0]) && y[1] == 1.0, y));
  });
  guard("alpha_zero", [&] {
    small_csr a{{nan, nan, nan}, {0, 2, 3}, {0, 1, 1}, 2, 2};
    auto y = spmv(a, {inf, nan}, {3.0, 4.0}, 0.0, 1.0);
    out.add(exception_case("alpha_zero", y[0] == 3.0 && y[1] == 4.0, y));
  });
  guard("beta_zero", [&] {
    small_csr a{{1.0, 2.0, 3.0}, {0, 2, 3}, {0, 1, 1}, 2, 2};
    auto y = spmv(a, {1.0, 1.0}, {nan, inf}, 1.0, 0.0);
    out.add(exception_case("beta_zero", y[0] == 3.0 && y[1] == 3.0, y));
  });
  guard("alpha_beta_zero", [&] {
    small_csr a{{nan, inf, nan}, {0, 2, 3}, {0, 1, 1}, 2, 2};
    auto y = spmv(a, {nan, inf}, {nan, -inf}, 0.0, 0.0);
    const bool pass = y[0] == 0.0 && y[1] == 0.0 && !std::signbit(y[0]) && !std::signbit(y[1]);
    out.add(exception_case("alpha_beta_zero", pass, y));
  });
  guard("inf_cancellation", [&] {
    // Summands z, z, -z, -z with z above half the overflow threshold: any of
    // NaN, +Inf, -Inf or 0 is a legal result.
    const D z = std::numeric_limits<D>::max() * 0.75;
    small_csr a{{1.0, 1.0, 1.0, 1.0}, {0, 4}, {0, 1, 2, 3}, 1, 4};
    auto y = spmv(a, {z, z, -z, -z}, {0.0}, 1.0);
    out.add(exception_case("inf_cancellation", nonfinite(y[0]) || y[0] == 0.0, y));
  });
  return out;
}

// ---- reproducibility ---------------------------------------------------------

const std::vector<std::string>& reproducibility_families() {
  static const std::vector<std::string> f{"scale",  "inf_norm", "frob_norm", "spmv",
                                          "spmm",   "trisolve", "sddmm",     "spgemm",
                                          "add",    "hadamard", "convert",   "filter",
                                          "transpose"};
  return f;
}

namespace {

using bytes = std::vector<unsigned char>;

template <class X>
void put(bytes& b, const X* p, std::size_t n) {
  const auto* c = reinterpret_cast<const unsigned char*>(p);
  b.insert(b.end(), c, c + n * sizeof(X));
}

struct repro_inputs {
  owned_matrix<D> a;
  owned_matrix<D> b;
  owned_matrix<D> lower;
  dense_matrix<D> x;  // dim x 8
  dense_matrix<D> y;  // 8 x dim
};

repro_inputs make_inputs(std::uint64_t seed, int dim) {
  std::mt19937_64 rng(seed);
  repro_inputs in;
  // Roughly 12 stored entries per row keeps SpGEMM cheap at this size.
  const double density = std::min(1.0, 12.0 / dim);
  random_params p{dim, dim, density, value_kind::uniform, 1024, 0.0};
  in.a = from_triples<D>(dim, dim, random_triples<D>(rng, p));
  in.b = from_triples<D>(dim, dim, random_triples<D>(rng, p));
  auto t = random_triples<D>(rng, p);
  std::erase_if(t, [](const triple<D>& e) { return e.j >= e.i; });
  std::vector<double> row_abs(static_cast<std::size_t>(dim), 0.0);
  for (const auto& e : t) row_abs[e.i] += std::abs(e.v);
  for (int i = 0; i < dim; ++i) t.push_back({i, i, 1.0 + row_abs[i]});
  in.lower = from_triples<D>(dim, dim, std::move(t));
  random_params dp{};
  in.x = random_dense<D>(rng, dim, 8, dp);
  in.y = random_dense<D>(rng, 8, dim, dp);
  return in;
}

template <class V>
void put_sparse(bytes& b, const V& v) {
  const auto t = triples_of(v);
  for (const auto& e : t) {
    put(b, &e.i, 1);
    put(b, &e.j, 1);
    put(b, &e.v, 1);
  }
}

template <class Compute, class Fill>
bytes staged_bytes(state_base& st, std::int64_t r, std::int64_t c, Compute&& compute, Fill&& fill) {
  csr_view<D> shell(static_cast<std::int32_t>(r), static_cast<std::int32_t>(c));
  compute(shell);
  output_store<D> store;
  store.bind(shell, st.get_result_nnz());
  fill(shell);
  bytes b;
  put_sparse(b, shell);
  return b;
}

bytes run_family_bytes(const std::string& family, repro_inputs& in,
                       const execution_policy& pol) {
  bytes out;
  auto a = in.a.csr();
  auto bm = in.b.csr();
  const std::int64_t n = a.nrows();
  if (family == "scale") {
    auto copy = in.a;
    scale_state_t st;
    scale(pol, st, 1.0 / 3.0, copy.csr());
    put(out, copy.csr_vals.data(), copy.csr_vals.size());
  } else if (family == "inf_norm") {
    matrix_inf_norm_state_t st;
    const D v = matrix_inf_norm(pol, st, transposed(a));
    put(out, &v, 1);
  } else if (family == "frob_norm") {
    matrix_frob_norm_state_t st;
    const D v = matrix_frob_norm(pol, st, a);
    put(out, &v, 1);
  } else if (family == "spmv" || family == "spmm") {
    const std::size_t k = family == "spmv" ? 1 : 8;
    std::vector<D> x(static_cast<std::size_t>(n) * k);
    for (std::int64_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < k; ++j) x[i * k + j] = in.x(i, static_cast<std::int64_t>(j));
    }
    std::vector<D> y(x.size(), 1.0);
    dense_view<D> xv = k == 1 ? dense_view<D>(std::span<D>(x), x.size())
                              : dense_view<D>(std::span<D>(x), n, k);
    dense_view<D> yv = k == 1 ? dense_view<D>(std::span<D>(y), y.size())
                              : dense_view<D>(std::span<D>(y), n, k);
    multiply_state_t st;
    multiply(pol, st, scaled(0.5, transposed(a)), xv, scaled(0.25, yv), yv);
    put(out, y.data(), y.size());
  } else if (family == "trisolve") {
    std::vector<D> b(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) b[i] = in.x(i, 0);
    std::vector<D> x(b.size());
    triangular_solve_state_t st;
    triangular_solve(pol, st, in.lower.csr(), dense_view<D>(std::span<D>(b), b.size()),
                     dense_view<D>(std::span<D>(x), x.size()));
    put(out, x.data(), x.size());
  } else if (family == "sddmm") {
    auto copy = in.a;
    dense_view<D> xv(std::span<D>(in.x.data), n, 8);
    dense_view<D> yv(std::span<D>(in.y.data), 8, n);
    sampled_multiply_state_t st;
    sampled_multiply(pol, st, xv, yv, copy.csr());
    put(out, copy.csr_vals.data(), copy.csr_vals.size());
  } else if (family == "spgemm") {
    sparse_multiply_state_t st;
    out = staged_bytes(
        st, n, n, [&](auto& c) { sparse_multiply_compute(pol, st, a, bm, c); },
        [&](auto& c) { sparse_multiply_fill(pol, st, a, bm, c); });
  } else if (family == "add") {
    add_state_t st;
    const auto sb = scaled(-0.75, bm);
    out = staged_bytes(
        st, n, n, [&](auto& c) { add_compute(pol, st, a, sb, c); },
        [&](auto& c) { add_fill(pol, st, a, sb, c); });
  } else if (family == "hadamard") {
    multiply_elementwise_state_t st;
    out = staged_bytes(
        st, n, n, [&](auto& c) { multiply_elementwise_compute(pol, st, a, a, c); },
        [&](auto& c) { multiply_elementwise_fill(pol, st, a, a, c); });
  } else if (family == "convert") {
    convert_state_t st;
    out = staged_bytes(
        st, n, n, [&](auto& c) { convert_compute(pol, st, in.a.coo(), c); },
        [&](auto& c) { convert_fill(pol, st, in.a.coo(), c); });
  } else if (family == "filter") {
    filter_state_t st;
    auto pred = [](std::int64_t, std::int64_t, D v) { return std::abs(v) > 1.0; };
    out = staged_bytes(
        st, n, n, [&](auto& c) { filter_compute(pol, st, a, c, pred); },
        [&](auto& c) { filter_fill(pol, st, a, c, pred); });
  } else if (family == "transpose") {
    transpose_state_t st;
    out = staged_bytes(
        st, n, n, [&](auto& c) { transpose_compute(pol, st, a, c); },
        [&](auto& c) { transpose_fill(pol, st, a, c); });
  } else {
    raise(error_category::unsupported, "unknown family " + family);
  }
  return out;
}

std::string first_difference(const bytes& a, const bytes& b) {
  if (a.size() != b.size()) {
    return "lengths differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size());
  }
  const auto it = std::mismatch(a.begin(), a.end(), b.begin());
  if (it.first == a.end()) return {};
  return "first diverging byte at " + std::to_string(it.first - a.begin());
}

// Restores the process-wide property however the suite exits.
class cnr_scope {
public:
  explicit cnr_scope(cnr_property p) : saved_(get_cnr_property()) { set_cnr_property(p); }
  ~cnr_scope() { set_cnr_property(saved_); }
  cnr_scope(const cnr_scope&) = delete;
  cnr_scope& operator=(const cnr_scope&) = delete;

private:
  cnr_property saved_;
};

}  // namespace

report reproducibility_suite(const reproducibility_options& opt) {
  report out;
  const auto& all = reproducibility_families();
  const auto& families = opt.families.empty() ? all : opt.families;
  auto in = make_inputs(opt.seed, opt.dim);
  cnr_scope scope(opt.property);
  const std::string prop(cnr_name(opt.property));

  // strict_cnr compares across thread counts; cnr and the default compare
  // repeated runs at each thread count.
  for (const auto& family : families) {
    case_record r;
    r.family = "reproducibility";
    r.scalar = "double";
    r.case_id = "reproducibility/" + family + "/" + prop;
    try {
      std::string diff;
      if (opt.property == cnr_property::strict_cnr) {
        bytes first;
        for (std::size_t k = 0; k < opt.threads.size() && diff.empty(); ++k) {
          for (int rep = 0; rep < std::max(opt.repeats, 1) && diff.empty(); ++rep) {
            auto b = run_family_bytes(family, in, par(opt.threads[k]));
            if (k == 0 && rep == 0) {
              first = std::move(b);
            } else {
              diff = first_difference(first, b);
              if (!diff.empty()) diff += " (threads " + std::to_string(opt.threads[k]) + ")";
            }
          }
        }
      } else {
        for (int threads : opt.threads) {
          bytes first;
          for (int rep = 0; rep < std::max(opt.repeats, 1) && diff.empty(); ++rep) {
            auto b = run_family_bytes(family, in, par(threads));
            if (rep == 0) {
              first = std::move(b);
            } else {
              diff = first_difference(first, b);
              if (!diff.empty()) diff += " (threads " + std::to_string(threads) + ")";
            }
          }
          if (!diff.empty()) break;
        }
      }
      r.mismatches = diff.empty() ? 0 : 1;
      // The default property promises nothing: differences are recorded only.
      r.pass = diff.empty() || opt.property == cnr_property::none;
      r.detail = diff.empty() ? "identical" : diff;
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    out.add(std::move(r));
  }
  return out;
}

}  // namespace spblas::conformance
