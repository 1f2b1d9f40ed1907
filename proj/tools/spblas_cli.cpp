#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spblas/conformance.hpp>
#include <spblas/io.hpp>
#include <spblas/spblas.hpp>

namespace {

using namespace spblas;
using I = std::int32_t;
using O = std::int64_t;

struct global_flags {
  std::string policy = "seq";
  int threads = 0;
  std::string cnr = "default";
  std::uint64_t seed = 1;
};

// A CSR matrix owning its arrays.
struct owned_csr {
  std::vector<double> values;
  std::vector<O> offsets;
  std::vector<I> cols;
  csr_view<double> view;

  owned_csr(I r, I c) : view(r, c) {}

  void bind(std::int64_t nnz) {
    values.assign(static_cast<std::size_t>(nnz), 0.0);
    offsets.assign(static_cast<std::size_t>(view.nrows()) + 1, 0);
    cols.assign(static_cast<std::size_t>(nnz), 0);
    view.update(std::span<double>(values), std::span<O>(offsets), std::span<I>(cols));
  }
};

execution_policy make_policy(const global_flags& g) {
  const int n = g.threads > 0 ? g.threads : default_thread_count();
  if (g.policy == "seq") return seq;
  if (g.policy == "par") return par(n);
  return detpar(n);
}

cnr_property parse_cnr(const std::string& s) {
  if (s == "cnr") return cnr_property::cnr;
  if (s == "strict") return cnr_property::strict_cnr;
  return cnr_property::none;
}

owned_csr load_csr(const std::string& path, const execution_policy& pol) {
  auto coo = io::mm_read_file<double>(path);
  owned_csr out(coo.nrows, coo.ncols);
  convert_state_t st;
  convert_compute(pol, st, coo.view(), out.view);
  out.bind(st.get_result_nnz());
  convert_fill(pol, st, coo.view(), out.view);
  return out;
}

template <class V>
void emit_matrix(const std::string& path, const V& v) {
  if (path.empty() || path == "-") {
    io::mm_write(std::cout, v);
  } else {
    io::mm_write_file(path, v);
  }
}

void emit_vector(const std::string& path, const std::vector<double>& v) {
  const std::span<const double> s(v);
  if (path.empty() || path == "-") {
    io::write_vector<double>(std::cout, s);
  } else {
    std::ofstream f(path);
    if (!f) raise(error_category::io, "cannot open " + path + " for writing");
    io::write_vector<double>(f, s);
  }
}

int run_info(const std::string& path) {
  const auto h = io::mm_read_header(path);
  auto m = io::mm_read_file<double>(path);
  std::cout << "rows " << h.nrows << "\ncols " << h.ncols << "\nstored " << h.entries
            << "\nnnz " << m.nnz() << "\nfield " << io::field_name(h.field) << "\nsymmetry "
            << io::symmetry_name(h.symmetry) << "\nlayout "
            << (h.layout == io::mm_layout::array ? "array" : "coordinate") << '\n';
  return 0;
}

int run_validate(const std::string& path) {
  auto m = io::mm_read_file<double>(path);
  const auto r = validate(m.view());
  if (r.ok()) {
    std::cout << "valid\n";
    return 0;
  }
  for (const auto& v : r.violations) {
    std::cout << violation_name(v.kind) << " at " << v.index << '\n';
  }
  return 1;
}

int run_convert(const std::string& in, const std::string& out, const std::string& fmt,
                const execution_policy& pol) {
  auto coo = io::mm_read_file<double>(in);
  std::vector<double> values;
  std::vector<O> offsets;
  std::vector<I> first, second;
  auto stage = [&](auto shell) {
    convert_state_t st;
    convert_compute(pol, st, coo.view(), shell);
    const auto nnz = static_cast<std::size_t>(st.get_result_nnz());
    values.assign(nnz, 0.0);
    first.assign(nnz, 0);
    second.assign(nnz, 0);
    if constexpr (std::is_same_v<decltype(shell), coo_view<double>>) {
      shell.update(std::span<double>(values), std::span<I>(first), std::span<I>(second));
    } else {
      const auto lead = std::is_same_v<decltype(shell), csr_view<double>> ? shell.nrows() : shell.ncols();
      offsets.assign(static_cast<std::size_t>(lead) + 1, 0);
      shell.update(std::span<double>(values), std::span<O>(offsets), std::span<I>(first));
    }
    convert_fill(pol, st, coo.view(), shell);
    emit_matrix(out, shell);
  };
  if (fmt == "csr") {
    stage(csr_view<double>(coo.nrows, coo.ncols));
  } else if (fmt == "csc") {
    stage(csc_view<double>(coo.nrows, coo.ncols));
  } else {
    stage(coo_view<double>(coo.nrows, coo.ncols));
  }
  return 0;
}

int run_spmv(const std::string& a_path, const std::string& x_path, const std::string& y_path,
             double alpha, double beta, bool transpose, const std::string& out,
             const execution_policy& pol) {
  auto a = load_csr(a_path, pol);
  auto x = io::read_vector_file<double>(x_path);
  const auto m = transpose ? a.view.ncols() : a.view.nrows();
  std::vector<double> y(static_cast<std::size_t>(m), 0.0);
  if (!y_path.empty()) y = io::read_vector_file<double>(y_path);
  const dense_view<double> xv(std::span<double>(x), x.size());
  const dense_view<double> yv(std::span<double>(y), y.size());
  multiply_state_t st;
  if (transpose) {
    if (y_path.empty()) {
      multiply(pol, st, scaled(alpha, transposed(a.view)), xv, yv);
    } else {
      multiply(pol, st, scaled(alpha, transposed(a.view)), xv, scaled(beta, yv), yv);
    }
  } else if (y_path.empty()) {
    multiply(pol, st, scaled(alpha, a.view), xv, yv);
  } else {
    multiply(pol, st, scaled(alpha, a.view), xv, scaled(beta, yv), yv);
  }
  emit_vector(out, y);
  return 0;
}

int run_spgemm(const std::string& a_path, const std::string& b_path, const std::string& out,
               bool split, const execution_policy& pol) {
  auto a = load_csr(a_path, pol);
  auto b = load_csr(b_path, pol);
  owned_csr c(a.view.nrows(), b.view.ncols());
  sparse_multiply_state_t st;
  if (split) {
    sparse_multiply_symbolic_compute(pol, st, a.view, b.view, c.view);
    c.bind(st.get_result_nnz());
    sparse_multiply_symbolic_fill(pol, st, a.view, b.view, c.view);
    sparse_multiply_numeric_compute(pol, st, a.view, b.view, c.view);
    sparse_multiply_numeric_fill(pol, st, a.view, b.view, c.view);
  } else {
    sparse_multiply_compute(pol, st, a.view, b.view, c.view);
    c.bind(st.get_result_nnz());
    sparse_multiply_fill(pol, st, a.view, b.view, c.view);
  }
  emit_matrix(out, c.view);
  return 0;
}

int run_trisolve(const std::string& t_path, const std::string& b_path, bool transpose,
                 const std::string& out, const execution_policy& pol) {
  auto t = load_csr(t_path, pol);
  auto b = io::read_vector_file<double>(b_path);
  std::vector<double> x(b.size(), 0.0);
  const dense_view<double> bv(std::span<double>(b), b.size());
  const dense_view<double> xv(std::span<double>(x), x.size());
  triangular_solve_state_t st;
  if (transpose) {
    triangular_solve(pol, st, transposed(t.view), bv, xv);
  } else {
    triangular_solve(pol, st, t.view, bv, xv);
  }
  emit_vector(out, x);
  return 0;
}

int run_norm(const std::string& path, const std::string& kind, const execution_policy& pol) {
  auto a = load_csr(path, pol);
  double r = 0;
  if (kind == "inf") {
    matrix_inf_norm_state_t st;
    r = matrix_inf_norm(pol, st, a.view);
  } else {
    matrix_frob_norm_state_t st;
    r = matrix_frob_norm(pol, st, a.view);
  }
  std::cout << io::format_scalar(r) << '\n';
  return 0;
}

int run_filter(const std::string& path, double min_abs, const std::string& out,
               const execution_policy& pol) {
  auto a = load_csr(path, pol);
  owned_csr c(a.view.nrows(), a.view.ncols());
  auto keep = [min_abs](std::int64_t, std::int64_t, double v) { return std::abs(v) >= min_abs; };
  filter_state_t st;
  filter_compute(pol, st, a.view, c.view, keep);
  c.bind(st.get_result_nnz());
  filter_fill(pol, st, a.view, c.view, keep);
  emit_matrix(out, c.view);
  return 0;
}

int run_bench(const std::string& path, int threads, int repeat, const global_flags& g) {
  global_flags local = g;
  if (threads > 0) local.threads = threads;
  if (local.policy == "seq" && threads > 1) local.policy = "par";
  const auto pol = make_policy(local);
  auto a = load_csr(path, pol);
  std::vector<double> x(static_cast<std::size_t>(a.view.ncols()), 1.0);
  std::vector<double> y(static_cast<std::size_t>(a.view.nrows()), 0.0);
  const dense_view<double> xv(std::span<double>(x), x.size());
  const dense_view<double> yv(std::span<double>(y), y.size());
  multiply_state_t st;
  multiply_inspect(pol, st, a.view, xv, yv);
  std::vector<double> secs;
  for (int r = 0; r < std::max(repeat, 1); ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    multiply(pol, st, a.view, xv, yv);
    secs.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  std::sort(secs.begin(), secs.end());
  const double median = secs[secs.size() / 2];
  std::cout << "kernel spmv\nthreads " << pol.threads << "\nrepeat " << secs.size() << "\nnnz "
            << a.view.nnz() << "\nmin_s " << secs.front() << "\nmedian_s " << median
            << "\nnnz_per_s " << (median > 0 ? static_cast<double>(a.view.nnz()) / median : 0.0)
            << '\n';
  return 0;
}

int run_conformance(const std::string& suite, const std::vector<std::string>& families,
                    int cases, const global_flags& g) {
  conformance::report r;
  if (suite == "exceptions") {
    r = conformance::exception_matrix_suite();
  } else if (suite == "repro") {
    conformance::reproducibility_options o;
    o.families = families;
    o.seed = g.seed;
    o.property = parse_cnr(g.cnr);
    if (g.threads > 0) o.threads = {1, g.threads};
    r = conformance::reproducibility_suite(o);
  } else {
    conformance::options o;
    o.families = families;
    o.seed = g.seed;
    o.cases_per_family = cases;
    if (suite == "values") r = conformance::value_suite(o);
    if (suite == "patterns") r = conformance::pattern_suite(o);
    if (suite == "exact") r = conformance::exact_integer_suite(o);
  }
  r.write_jsonl(std::cout);
  std::cerr << r.records.size() << " cases, " << r.failures() << " failures\n";
  return r.failures() == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse BLAS reference command-line front end"};
  app.require_subcommand(1);
  global_flags g;
  app.add_option("--policy", g.policy, "Execution policy")
      ->check(CLI::IsMember({"seq", "par", "detpar"}));
  app.add_option("--threads", g.threads, "Thread count for parallel policies (0: environment)");
  app.add_option("--cnr", g.cnr, "Reproducibility property")
      ->check(CLI::IsMember({"default", "cnr", "strict"}));
  app.add_option("--seed", g.seed, "Seed for generated data");

  std::string in, in2, in3, out, fmt = "csr", kind = "frob", suite = "values";
  double alpha = 1.0, beta = 0.0, min_abs = 0.0;
  bool transpose = false, split = false;
  int threads = 0, repeat = 10, cases = 20;
  std::vector<std::string> families;

  auto* info = app.add_subcommand("info", "Print the header and entry count of a Matrix Market file");
  info->add_option("file", in)->required();

  auto* val = app.add_subcommand("validate", "Check a matrix against the format invariants");
  val->add_option("file", in)->required();

  auto* conv = app.add_subcommand("convert", "Convert through a storage format and write it back");
  conv->add_option("input", in)->required();
  conv->add_option("output", out, "Output file ('-' for stdout)");
  conv->add_option("--format", fmt)->check(CLI::IsMember({"csr", "csc", "coo"}));

  auto* spmv = app.add_subcommand("spmv", "y = alpha op(A) x + beta y");
  spmv->add_option("matrix", in)->required();
  spmv->add_option("x", in2)->required();
  spmv->add_option("--y", in3, "Initial y (enables beta)");
  spmv->add_option("--alpha", alpha);
  spmv->add_option("--beta", beta);
  spmv->add_flag("--transpose", transpose);
  spmv->add_option("-o,--output", out);

  auto* gemm = app.add_subcommand("spgemm", "C = A B");
  gemm->add_option("a", in)->required();
  gemm->add_option("b", in2)->required();
  gemm->add_option("-o,--output", out);
  gemm->add_flag("--symbolic-numeric", split, "Run the split symbolic/numeric phases");

  auto* tri = app.add_subcommand("trisolve", "Solve op(T) x = b");
  tri->add_option("matrix", in)->required();
  tri->add_option("b", in2)->required();
  tri->add_flag("--transpose", transpose);
  tri->add_option("-o,--output", out);

  auto* norm = app.add_subcommand("norm", "Matrix norm");
  norm->add_option("matrix", in)->required();
  norm->add_option("--kind", kind)->check(CLI::IsMember({"inf", "frob"}));

  auto* filt = app.add_subcommand("filter", "Keep entries with |a_ij| >= threshold");
  filt->add_option("matrix", in)->required();
  filt->add_option("--min-abs", min_abs);
  filt->add_option("-o,--output", out);

  auto* bench = app.add_subcommand("bench", "Time repeated SpMV");
  bench->add_option("matrix", in)->required();
  bench->add_option("--threads", threads);
  bench->add_option("--repeat", repeat);

  auto* conf = app.add_subcommand("conformance", "Run a conformance suite and print JSON lines");
  conf->add_option("--suite", suite)
      ->check(CLI::IsMember({"values", "patterns", "exact", "exceptions", "repro"}));
  conf->add_option("--families", families)->delimiter(',');
  conf->add_option("--cases", cases);

  CLI11_PARSE(app, argc, argv);

  try {
    set_cnr_property(parse_cnr(g.cnr));
    const auto pol = make_policy(g);
    if (*info) return run_info(in);
    if (*val) return run_validate(in);
    if (*conv) return run_convert(in, out, fmt, pol);
    if (*spmv) return run_spmv(in, in2, in3, alpha, beta, transpose, out, pol);
    if (*gemm) return run_spgemm(in, in2, out, split, pol);
    if (*tri) return run_trisolve(in, in2, transpose, out, pol);
    if (*norm) return run_norm(in, kind, pol);
    if (*filt) return run_filter(in, min_abs, out, pol);
    if (*bench) return run_bench(in, threads, repeat, g);
    if (*conf) return run_conformance(suite, families, cases, g);
  } catch (const sparse_error& e) {
    std::cerr << "error: " << category_name(e.category()) << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
