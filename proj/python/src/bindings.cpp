#include <cstdint>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <spblas/io.hpp>
#include <spblas/spblas.hpp>

namespace py = pybind11;
using namespace spblas;

namespace {

using I = std::int32_t;
using O = std::int64_t;
using farray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using iarray = py::array_t<I, py::array::c_style | py::array::forcecast>;
using oarray = py::array_t<O, py::array::c_style | py::array::forcecast>;
using csr_tuple = std::tuple<py::array_t<double>, py::array_t<O>, py::array_t<I>>;

template <class T>
std::vector<T> to_vector(const py::array_t<T, py::array::c_style | py::array::forcecast>& a) {
  return std::vector<T>(a.data(), a.data() + a.size());
}

template <class T>
py::array_t<T> to_numpy(const std::vector<T>& v) {
  py::array_t<T> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

// Owned CSR copy of the caller's arrays; views never point into Python memory.
struct csr_matrix {
  std::vector<double> values;
  std::vector<O> offsets;
  std::vector<I> cols;
  I nrows = 0;
  I ncols = 0;

  csr_matrix(I r, I c) : nrows(r), ncols(c) {}
  csr_matrix(const farray& data, const oarray& indptr, const iarray& indices,
             std::pair<I, I> shape)
      : values(to_vector(data)), offsets(to_vector(indptr)), cols(to_vector(indices)),
        nrows(shape.first), ncols(shape.second) {}

  csr_view<double> view() {
    return {std::span<double>(values), std::span<O>(offsets), std::span<I>(cols), nrows, ncols,
            static_cast<O>(values.size()), index_base::zero};
  }
  csr_tuple to_tuple() const { return {to_numpy(values), to_numpy(offsets), to_numpy(cols)}; }
};

execution_policy policy_of(const std::string& name, int threads) {
  const int n = threads > 0 ? threads : default_thread_count();
  if (name == "seq") return seq;
  if (name == "par") return par(n);
  if (name == "detpar") return detpar(n);
  raise(error_category::validation, "unknown policy '" + name + "'");
}

// Runs a compute/fill pair into a fresh CSR output.
template <class State, class Compute, class Fill>
csr_matrix staged(I r, I c, Compute&& compute, Fill&& fill) {
  State st;
  csr_matrix out(r, c);
  csr_view<double> shell(r, c);
  compute(st, shell);
  const auto nnz = static_cast<std::size_t>(st.get_result_nnz());
  out.values.assign(nnz, 0.0);
  out.cols.assign(nnz, 0);
  out.offsets.assign(static_cast<std::size_t>(r) + 1, 0);
  shell.update(std::span<double>(out.values), std::span<O>(out.offsets), std::span<I>(out.cols));
  fill(st, shell);
  return out;
}

dense_view<double> vec(std::vector<double>& v) { return {std::span<double>(v), v.size()}; }

}  // namespace

PYBIND11_MODULE(_spblas, m) {
  m.doc() = "Sparse BLAS reference kernels over CSR arrays";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const sparse_error& e) {
      const std::string msg = std::string(category_name(e.category())) + ": " + e.what();
      switch (e.category()) {
        case error_category::shape_mismatch:
        case error_category::output_length:
          PyErr_SetString(PyExc_ValueError, msg.c_str());
          break;
        case error_category::io:
          PyErr_SetString(PyExc_OSError, msg.c_str());
          break;
        default:
          PyErr_SetString(PyExc_RuntimeError, msg.c_str());
      }
    }
  });

  m.def("set_cnr", [](const std::string& s) {
    if (s == "default") set_cnr_property(cnr_property::none);
    else if (s == "cnr") set_cnr_property(cnr_property::cnr);
    else if (s == "strict" || s == "strict_cnr") set_cnr_property(cnr_property::strict_cnr);
    else raise(error_category::validation, "unknown reproducibility property '" + s + "'");
  });
  m.def("get_cnr", [] { return std::string(cnr_name(get_cnr_property())); });

  m.def(
      "validate",
      [](farray data, oarray indptr, iarray indices, std::pair<I, I> shape) {
        csr_matrix a(data, indptr, indices, shape);
        std::vector<std::pair<std::string, std::int64_t>> out;
        for (const auto& v : validate(a.view()).violations) {
          out.emplace_back(std::string(violation_name(v.kind)), v.index);
        }
        return out;
      },
      py::arg("data"), py::arg("indptr"), py::arg("indices"), py::arg("shape"));

  m.def(
      "spmv",
      [](farray data, oarray indptr, iarray indices, std::pair<I, I> shape, farray x,
         double alpha, double beta, std::optional<farray> y, bool transpose,
         const std::string& policy, int threads) {
        csr_matrix a(data, indptr, indices, shape);
        auto xs = to_vector(x);
        const auto rows = transpose ? a.ncols : a.nrows;
        std::vector<double> ys = y ? to_vector(*y) : std::vector<double>(static_cast<std::size_t>(rows), 0.0);
        const auto pol = policy_of(policy, threads);
        multiply_state_t st;
        const auto av = a.view();
        if (transpose) {
          if (y) multiply(pol, st, scaled(alpha, transposed(av)), vec(xs), scaled(beta, vec(ys)), vec(ys));
          else multiply(pol, st, scaled(alpha, transposed(av)), vec(xs), vec(ys));
        } else {
          if (y) multiply(pol, st, scaled(alpha, av), vec(xs), scaled(beta, vec(ys)), vec(ys));
          else multiply(pol, st, scaled(alpha, av), vec(xs), vec(ys));
        }
        return to_numpy(ys);
      },
      py::arg("data"), py::arg("indptr"), py::arg("indices"), py::arg("shape"), py::arg("x"),
      py::arg("alpha") = 1.0, py::arg("beta") = 0.0, py::arg("y") = py::none(),
      py::arg("transpose") = false, py::arg("policy") = "seq", py::arg("threads") = 0);

  m.def(
      "spmm",
      [](farray data, oarray indptr, iarray indices, std::pair<I, I> shape, farray x,
         double alpha, const std::string& policy, int threads) {
        if (x.ndim() != 2) raise(error_category::shape_mismatch, "spmm: X must be two-dimensional");
        csr_matrix a(data, indptr, indices, shape);
        auto xs = to_vector(x);
        const auto k = static_cast<std::size_t>(x.shape(0));
        const auto n = static_cast<std::size_t>(x.shape(1));
        std::vector<double> ys(static_cast<std::size_t>(a.nrows) * n, 0.0);
        multiply_state_t st;
        multiply(policy_of(policy, threads), st, scaled(alpha, a.view()),
                 dense_view<double>(std::span<double>(xs), k, n),
                 dense_view<double>(std::span<double>(ys), static_cast<std::size_t>(a.nrows), n));
        py::array_t<double> out({static_cast<py::ssize_t>(a.nrows), static_cast<py::ssize_t>(n)});
        std::copy(ys.begin(), ys.end(), out.mutable_data());
        return out;
      },
      py::arg("data"), py::arg("indptr"), py::arg("indices"), py::arg("shape"), py::arg("x"),
      py::arg("alpha") = 1.0, py::arg("policy") = "seq", py::arg("threads") = 0);

  m.def(
      "spgemm",
      [](farray ad, oarray ap, iarray ai, std::pair<I, I> ashape, farray bd, oarray bp,
         iarray bi, std::pair<I, I> bshape, const std::string& policy, int threads) {
        csr_matrix a(ad, ap, ai, ashape), b(bd, bp, bi, bshape);
        const auto pol = policy_of(policy, threads);
        const auto av = a.view();
        const auto bv = b.view();
        return staged<sparse_multiply_state_t>(
                   a.nrows, b.ncols,
                   [&](auto& st, auto& c) { sparse_multiply_compute(pol, st, av, bv, c); },
                   [&](auto& st, auto& c) { sparse_multiply_fill(pol, st, av, bv, c); })
            .to_tuple();
      },
      py::arg("a_data"), py::arg("a_indptr"), py::arg("a_indices"), py::arg("a_shape"),
      py::arg("b_data"), py::arg("b_indptr"), py::arg("b_indices"), py::arg("b_shape"),
      py::arg("policy") = "seq", py::arg("threads") = 0);

  m.def(
      "add",
      [](farray ad, oarray ap, iarray ai, farray bd, oarray bp, iarray bi,
         std::pair<I, I> shape, double alpha, double beta, const std::string& policy,
         int threads) {
        csr_matrix a(ad, ap, ai, shape), b(bd, bp, bi, shape);
        const auto pol = policy_of(policy, threads);
        const auto av = scaled(alpha, a.view());
        const auto bv = scaled(beta, b.view());
        return staged<add_state_t>(
                   a.nrows, a.ncols, [&](auto& st, auto& c) { add_compute(pol, st, av, bv, c); },
                   [&](auto& st, auto& c) { add_fill(pol, st, av, bv, c); })
            .to_tuple();
      },
      py::arg("a_data"), py::arg("a_indptr"), py::arg("a_indices"), py::arg("b_data"),
      py::arg("b_indptr"), py::arg("b_indices"), py::arg("shape"), py::arg("alpha") = 1.0,
      py::arg("beta") = 1.0, py::arg("policy") = "seq", py::arg("threads") = 0);

  m.def(
      "multiply_elementwise",
      [](farray ad, oarray ap, iarray ai, farray bd, oarray bp, iarray bi,
         std::pair<I, I> shape, const std::string& policy, int threads) {
        csr_matrix a(ad, ap, ai, shape), b(bd, bp, bi, shape);
        const auto pol = policy_of(policy, threads);
        const auto av = a.view();
        const auto bv = b.view();
        return staged<multiply_elementwise_state_t>(
                   a.nrows, a.ncols,
                   [&](auto& st, auto& c) { multiply_elementwise_compute(pol, st, av, bv, c); },
                   [&](auto& st, auto& c) { multiply_elementwise_fill(pol, st, av, bv, c); })
            .to_tuple();
      },
      py::arg("a_data"), py::arg("a_indptr"), py::arg("a_indices"), py::arg("b_data"),
      py::arg("b_indptr"), py::arg("b_indices"), py::arg("shape"), py::arg("policy") = "seq",
      py::arg("threads") = 0);

  m.def(
      "transpose",
      [](farray data, oarray indptr, iarray indices, std::pair<I, I> shape) {
        csr_matrix a(data, indptr, indices, shape);
        const auto av = a.view();
        return staged<transpose_state_t>(
                   a.ncols, a.nrows, [&](auto& st, auto& c) { transpose_compute(seq, st, av, c); },
                   [&](auto& st, auto& c) { transpose_fill(seq, st, av, c); })
            .to_tuple();
      },
      py::arg("data"), py::arg("indptr"), py::arg("indices"), py::arg("shape"));

  m.def(
      "from_dense",
      [](farray dense) {
        if (dense.ndim() != 2) raise(error_category::shape_mismatch, "from_dense: expected a matrix");
        auto d = to_vector(dense);
        const auto r = static_cast<I>(dense.shape(0));
        const auto c = static_cast<I>(dense.shape(1));
        const dense_view<double> dv(std::span<double>(d), static_cast<std::size_t>(r),
                                    static_cast<std::size_t>(c));
        return staged<convert_state_t>(
                   r, c, [&](auto& st, auto& out) { convert_compute(seq, st, dv, out); },
                   [&](auto& st, auto& out) { convert_fill(seq, st, dv, out); })
            .to_tuple();
      },
      py::arg("dense"));

  m.def(
      "triangular_solve",
      [](farray data, oarray indptr, iarray indices, std::pair<I, I> shape, farray b,
         bool transpose, const std::string& policy, int threads) {
        csr_matrix t(data, indptr, indices, shape);
        auto bs = to_vector(b);
        std::vector<double> x(bs.size(), 0.0);
        const auto pol = policy_of(policy, threads);
        triangular_solve_state_t st;
        if (transpose) triangular_solve(pol, st, transposed(t.view()), vec(bs), vec(x));
        else triangular_solve(pol, st, t.view(), vec(bs), vec(x));
        return to_numpy(x);
      },
      py::arg("data"), py::arg("indptr"), py::arg("indices"), py::arg("shape"), py::arg("b"),
      py::arg("transpose") = false, py::arg("policy") = "seq", py::arg("threads") = 0);

  m.def(
      "norm",
      [](farray data, oarray indptr, iarray indices, std::pair<I, I> shape,
         const std::string& kind, const std::string& policy, int threads) {
        csr_matrix a(data, indptr, indices, shape);
        const auto pol = policy_of(policy, threads);
        if (kind == "inf") {
          matrix_inf_norm_state_t st;
          return matrix_inf_norm(pol, st, a.view());
        }
        if (kind != "fro") raise(error_category::validation, "norm: kind must be 'inf' or 'fro'");
        matrix_frob_norm_state_t st;
        return matrix_frob_norm(pol, st, a.view());
      },
      py::arg("data"), py::arg("indptr"), py::arg("indices"), py::arg("shape"),
      py::arg("kind") = "fro", py::arg("policy") = "seq", py::arg("threads") = 0);

  m.def(
      "sddmm",
      [](farray x, farray y, oarray indptr, iarray indices, std::pair<I, I> shape, double alpha) {
        if (x.ndim() != 2 || y.ndim() != 2) {
          raise(error_category::shape_mismatch, "sddmm: X and Y must be two-dimensional");
        }
        auto xs = to_vector(x);
        auto ys = to_vector(y);
        csr_matrix c(farray(indices.size()), indptr, indices, shape);
        std::fill(c.values.begin(), c.values.end(), 0.0);
        sampled_multiply_state_t st;
        sampled_multiply(seq, st,
                         scaled(alpha, dense_view<double>(std::span<double>(xs),
                                                          static_cast<std::size_t>(x.shape(0)),
                                                          static_cast<std::size_t>(x.shape(1)))),
                         dense_view<double>(std::span<double>(ys), static_cast<std::size_t>(y.shape(0)),
                                            static_cast<std::size_t>(y.shape(1))),
                         c.view());
        return to_numpy(c.values);
      },
      py::arg("x"), py::arg("y"), py::arg("indptr"), py::arg("indices"), py::arg("shape"),
      py::arg("alpha") = 1.0);

  m.def(
      "mm_read",
      [](const std::string& path) {
        auto coo = io::mm_read_file<double>(path);
        std::vector<double> vals = coo.values;
        if (coo.iso) vals.assign(coo.rows.size(), coo.iso_value);
        return std::make_tuple(to_numpy(vals), to_numpy(coo.rows), to_numpy(coo.cols),
                               std::make_pair(coo.nrows, coo.ncols));
      },
      py::arg("path"));

  m.def(
      "mm_write",
      [](const std::string& path, farray data, oarray indptr, iarray indices,
         std::pair<I, I> shape) {
        csr_matrix a(data, indptr, indices, shape);
        io::mm_write_file(path, a.view());
      },
      py::arg("path"), py::arg("data"), py::arg("indptr"), py::arg("indices"), py::arg("shape"));
}
