#pragma once

// Seeded test matrices. Arrays for every format are built directly from
// canonical triples, without going through library kernels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <spblas/formats.hpp>
#include <spblas/oracle/oracle.hpp>

namespace spblas::oracle {

/// Owned storage for one matrix in all three formats.
template <class T, class I = std::int32_t, class O = std::int64_t>
struct owned_matrix {
  I nrows = 0;
  I ncols = 0;
  index_base base = index_base::zero;
  std::vector<triple<T>> triples;  // canonical, 0-based

  std::vector<O> csr_offsets;
  std::vector<I> csr_cols;
  std::vector<T> csr_vals;
  std::vector<O> csc_offsets;
  std::vector<I> csc_rows;
  std::vector<T> csc_vals;
  std::vector<I> coo_rows;
  std::vector<I> coo_cols;
  std::vector<T> coo_vals;

  O nnz() const noexcept { return static_cast<O>(triples.size()); }

  csr_view<T, I, O> csr() {
    return {std::span<T>(csr_vals), std::span<O>(csr_offsets), std::span<I>(csr_cols), nrows,
            ncols, nnz(), base};
  }
  csc_view<T, I, O> csc() {
    return {std::span<T>(csc_vals), std::span<O>(csc_offsets), std::span<I>(csc_rows), nrows,
            ncols, nnz(), base};
  }
  coo_view<T, I, O> coo() {
    return {std::span<T>(coo_vals), std::span<I>(coo_rows), std::span<I>(coo_cols), nrows,
            ncols, nnz(), base};
  }

  dense_mirror<T> mirror(bool transpose = false, bool conjugate = false) const {
    return mirror_of(triples, nrows, ncols, transpose, conjugate);
  }
};

/// Builds every format from triples. `origin` shifts the offset arrays so
/// that offsets[0] != 0, which views must accept.
template <class T, class I = std::int32_t, class O = std::int64_t>
owned_matrix<T, I, O> from_triples(std::int64_t nrows, std::int64_t ncols,
                                   std::vector<triple<T>> t,
                                   index_base base = index_base::zero, O origin = 0) {
  owned_matrix<T, I, O> m;
  m.nrows = static_cast<I>(nrows);
  m.ncols = static_cast<I>(ncols);
  m.base = base;
  m.triples = canonical(std::move(t));
  const I b = static_cast<I>(static_cast<int>(base));
  const auto nnz = m.triples.size();

  m.csr_offsets.assign(static_cast<std::size_t>(nrows) + 1, 0);
  m.coo_rows.reserve(nnz);
  for (const auto& e : m.triples) {
    ++m.csr_offsets[e.i + 1];
    m.csr_cols.push_back(static_cast<I>(e.j + b));
    m.csr_vals.push_back(e.v);
    m.coo_rows.push_back(static_cast<I>(e.i + b));
    m.coo_cols.push_back(static_cast<I>(e.j + b));
    m.coo_vals.push_back(e.v);
  }
  for (std::int64_t i = 0; i < nrows; ++i) m.csr_offsets[i + 1] += m.csr_offsets[i];

  auto by_col = m.triples;
  std::stable_sort(by_col.begin(), by_col.end(), [](const triple<T>& x, const triple<T>& y) {
    return x.j != y.j ? x.j < y.j : x.i < y.i;
  });
  m.csc_offsets.assign(static_cast<std::size_t>(ncols) + 1, 0);
  for (const auto& e : by_col) {
    ++m.csc_offsets[e.j + 1];
    m.csc_rows.push_back(static_cast<I>(e.i + b));
    m.csc_vals.push_back(e.v);
  }
  for (std::int64_t j = 0; j < ncols; ++j) m.csc_offsets[j + 1] += m.csc_offsets[j];

  for (auto& o : m.csr_offsets) o += origin;
  for (auto& o : m.csc_offsets) o += origin;
  return m;
}

enum class value_kind {
  uniform,      // magnitudes spread over a few binades, both signs
  integer,      // integers in [-bound, bound]
  signed_unit,  // -1, 0 or 1: provokes cancellation and explicit zeros
};

struct random_params {
  std::int64_t nrows = 0;
  std::int64_t ncols = 0;
  double density = 0.1;
  value_kind kind = value_kind::uniform;
  double int_bound = 1024;
  double explicit_zero_fraction = 0.0;
};

template <class T>
T random_value(std::mt19937_64& rng, const random_params& p) {
  using R = real_t<T>;
  auto one = [&]() -> R {
    switch (p.kind) {
      case value_kind::integer: {
        const auto b = static_cast<std::int64_t>(p.int_bound);
        return static_cast<R>(std::uniform_int_distribution<std::int64_t>(-b, b)(rng));
      }
      case value_kind::signed_unit:
        return static_cast<R>(std::uniform_int_distribution<int>(-1, 1)(rng));
      case value_kind::uniform:
      default: {
        const double u = std::uniform_real_distribution<double>(0.5, 1.0)(rng);
        const int e = std::uniform_int_distribution<int>(-4, 4)(rng);
        const double s = std::uniform_int_distribution<int>(0, 1)(rng) ? 1.0 : -1.0;
        return static_cast<R>(s * std::ldexp(u, e));
      }
    }
  };
  if (p.explicit_zero_fraction > 0 &&
      std::uniform_real_distribution<double>(0, 1)(rng) < p.explicit_zero_fraction) {
    return T(0);
  }
  if constexpr (is_complex_v<T>) {
    return T(one(), one());
  } else {
    return one();
  }
}

/// Each position is stored independently with probability `density`.
template <class T>
std::vector<triple<T>> random_triples(std::mt19937_64& rng, const random_params& p) {
  std::vector<triple<T>> t;
  if (p.density <= 0) return t;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (std::int64_t i = 0; i < p.nrows; ++i) {
    for (std::int64_t j = 0; j < p.ncols; ++j) {
      if (p.density >= 1.0 || coin(rng) < p.density) t.push_back({i, j, random_value<T>(rng, p)});
    }
  }
  return t;
}

template <class T>
dense_matrix<T> random_dense(std::mt19937_64& rng, std::int64_t rows, std::int64_t cols,
                             const random_params& p) {
  dense_matrix<T> d(rows, cols);
  for (auto& v : d.data) v = random_value<T>(rng, p);
  return d;
}

// Structured members of the corpus.
template <class T>
std::vector<triple<T>> identity_triples(std::int64_t n) {
  std::vector<triple<T>> t;
  for (std::int64_t i = 0; i < n; ++i) t.push_back({i, i, T(1)});
  return t;
}

template <class T>
std::vector<triple<T>> diagonal_triples(std::mt19937_64& rng, std::int64_t n) {
  std::vector<triple<T>> t;
  random_params p;
  for (std::int64_t i = 0; i < n; ++i) t.push_back({i, i, random_value<T>(rng, p)});
  return t;
}

template <class T>
std::vector<triple<T>> dense_row_triples(std::mt19937_64& rng, std::int64_t ncols,
                                         std::int64_t row) {
  std::vector<triple<T>> t;
  random_params p;
  for (std::int64_t j = 0; j < ncols; ++j) t.push_back({row, j, random_value<T>(rng, p)});
  return t;
}

template <class T>
std::vector<triple<T>> dense_col_triples(std::mt19937_64& rng, std::int64_t nrows,
                                         std::int64_t col) {
  std::vector<triple<T>> t;
  random_params p;
  for (std::int64_t i = 0; i < nrows; ++i) t.push_back({i, col, random_value<T>(rng, p)});
  return t;
}

/// Member k of the round-trip corpus: structured shapes first (identity,
/// diagonal, dense row, dense column, empty, 1 x n, n x 1, 0 x n), then
/// seeded random matrices cycling through densities {0, 0.01, 0.1, 0.3, 1}.
template <class T>
owned_matrix<T> corpus_matrix(std::int64_t k, std::uint64_t seed, std::string* name = nullptr) {
  std::mt19937_64 rng(seed * 1000003ull + static_cast<std::uint64_t>(k));
  auto label = [&](const std::string& s) {
    if (name) *name = s;
  };
  switch (k) {
    case 0: label("identity_17"); return from_triples<T>(17, 17, identity_triples<T>(17));
    case 1: label("diagonal_23"); return from_triples<T>(23, 23, diagonal_triples<T>(rng, 23));
    case 2: label("dense_row_9x31"); return from_triples<T>(9, 31, dense_row_triples<T>(rng, 31, 4));
    case 3: label("dense_col_29x7"); return from_triples<T>(29, 7, dense_col_triples<T>(rng, 29, 6));
    case 4: label("empty_12x15"); return from_triples<T>(12, 15, {});
    case 5: label("row_vector_1x40");
      return from_triples<T>(1, 40, random_triples<T>(rng, {1, 40, 0.5}));
    case 6: label("col_vector_40x1");
      return from_triples<T>(40, 1, random_triples<T>(rng, {40, 1, 0.5}));
    case 7: label("zero_rows_0x5"); return from_triples<T>(0, 5, {});
    default: break;
  }
  static constexpr double densities[] = {0.0, 0.01, 0.1, 0.3, 1.0};
  const double d = densities[(k - 8) % 5];
  std::uniform_int_distribution<std::int64_t> dim(1, 64);
  random_params p{dim(rng), dim(rng), d, value_kind::uniform, 1024, 0.05};
  label("random_" + std::to_string(p.nrows) + "x" + std::to_string(p.ncols) + "_d" +
        std::to_string(d).substr(0, 4));
  const auto base = (k % 2) ? index_base::one : index_base::zero;
  return from_triples<T>(p.nrows, p.ncols, random_triples<T>(rng, p), base);
}

}  // namespace spblas::oracle
