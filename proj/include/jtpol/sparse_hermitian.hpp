#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "jtpol/core.hpp"

namespace jtpol {

/// One stored element of the upper triangle, row <= col.
struct Triplet {
  std::size_t row;
  std::size_t col;
  cplx value;
};

/// Immutable sparse Hermitian matrix.
///
/// Only the upper triangle is stored; the lower triangle is implied by
/// conjugate symmetry. A full CSR copy is kept for the product kernel so
/// matvec touches each row once.
class SparseHermitian {
 public:
  /// Tolerance on the imaginary part of stored diagonal entries.
  static constexpr double kDiagonalImagTol = 1e-12;

  /// Builds from upper-triangle triplets. Duplicate positions are summed.
  /// Throws Error when dim == 0, an index is out of range, an entry lies
  /// below the diagonal, or a diagonal entry is not real.
  static SparseHermitian from_upper(std::size_t dim, std::vector<Triplet> entries) {
    if (dim == 0) throw Error("SparseHermitian: dimension must be positive");
    for (const auto& t : entries) {
      if (t.row >= dim || t.col >= dim) throw Error("SparseHermitian: index out of range");
      if (t.row > t.col) throw Error("SparseHermitian: entry below the diagonal");
    }
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<Triplet> merged;
    merged.reserve(entries.size());
    for (const auto& t : entries) {
      if (!merged.empty() && merged.back().row == t.row && merged.back().col == t.col) {
        merged.back().value += t.value;
      } else {
        merged.push_back(t);
      }
    }
    for (auto& t : merged) {
      if (t.row == t.col) {
        if (std::abs(t.value.imag()) > kDiagonalImagTol)
          throw Error("SparseHermitian: diagonal entry with nonzero imaginary part");
        t.value = cplx(t.value.real(), 0.0);
      }
    }
    SparseHermitian h;
    h.dim_ = dim;
    h.upper_ = std::move(merged);
    h.build_csr();
    return h;
  }

  /// Upper triangle of a dense Hermitian matrix, keeping entries with |a| > drop.
  static SparseHermitian from_dense(const CMatrix& a, double drop = 0.0) {
    if (a.rows() != a.cols()) throw Error("SparseHermitian: dense input not square");
    std::vector<Triplet> t;
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      for (Eigen::Index r = 0; r <= c; ++r)
        if (std::abs(a(r, c)) > drop || r == c)
          t.push_back({static_cast<std::size_t>(r), static_cast<std::size_t>(c), a(r, c)});
    return from_upper(static_cast<std::size_t>(a.rows()), std::move(t));
  }

  std::size_t dim() const noexcept { return dim_; }
  std::span<const Triplet> entries() const noexcept { return upper_; }
  std::size_t nonzeros() const noexcept { return values_.size(); }

  /// True when every stored value has zero imaginary part.
  bool is_real() const noexcept {
    return std::all_of(upper_.begin(), upper_.end(),
                       [](const Triplet& t) { return t.value.imag() == 0.0; });
  }

  /// Max absolute row sum; an upper bound on the spectral norm.
  double norm_bound() const noexcept { return row_sum_max_; }

  /// y = H x. Sizes must already match dim().
  void apply(std::span<const cplx> x, std::span<cplx> y) const noexcept {
    for (std::size_t r = 0; r < dim_; ++r) {
      cplx acc{};
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc += values_[k] * x[cols_[k]];
      y[r] = acc;
    }
  }

  /// y += s * H x.
  void apply_add(std::span<const cplx> x, std::span<cplx> y, cplx s) const noexcept {
    for (std::size_t r = 0; r < dim_; ++r) {
      cplx acc{};
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc += values_[k] * x[cols_[k]];
      y[r] += s * acc;
    }
  }

  /// Diagonal element (row, row).
  double diagonal(std::size_t row) const {
    for (std::size_t k = row_ptr_[row]; k < row_ptr_[row + 1]; ++k)
      if (cols_[k] == row) return values_[k].real();
    return 0.0;
  }

  CMatrix to_dense() const {
    CMatrix a = CMatrix::Zero(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
    for (const auto& t : upper_) {
      a(static_cast<Eigen::Index>(t.row), static_cast<Eigen::Index>(t.col)) += t.value;
      if (t.row != t.col)
        a(static_cast<Eigen::Index>(t.col), static_cast<Eigen::Index>(t.row)) += std::conj(t.value);
    }
    return a;
  }

 private:
  void build_csr() {
    std::vector<std::size_t> counts(dim_ + 1, 0);
    for (const auto& t : upper_) {
      ++counts[t.row + 1];
      if (t.row != t.col) ++counts[t.col + 1];
    }
    row_ptr_.assign(dim_ + 1, 0);
    for (std::size_t r = 0; r < dim_; ++r) row_ptr_[r + 1] = row_ptr_[r] + counts[r + 1];
    cols_.resize(row_ptr_[dim_]);
    values_.resize(row_ptr_[dim_]);
    std::vector<std::size_t> fill(row_ptr_.begin(), row_ptr_.end() - 1);
    for (const auto& t : upper_) {
      cols_[fill[t.row]] = t.col;
      values_[fill[t.row]++] = t.value;
      if (t.row != t.col) {
        cols_[fill[t.col]] = t.row;
        values_[fill[t.col]++] = std::conj(t.value);
      }
    }
    row_sum_max_ = 0.0;
    for (std::size_t r = 0; r < dim_; ++r) {
      double s = 0.0;
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += std::abs(values_[k]);
      row_sum_max_ = std::max(row_sum_max_, s);
    }
  }

  std::size_t dim_ = 0;
  std::vector<Triplet> upper_;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> cols_;
  std::vector<cplx> values_;
  double row_sum_max_ = 0.0;
};

/// Returns H x. Throws Error on a dimension mismatch.
inline CVector matvec(const SparseHermitian& h, const CVector& x) {
  if (static_cast<std::size_t>(x.size()) != h.dim())
    throw Error("matvec: vector length " + std::to_string(x.size()) + " does not match dimension " +
                std::to_string(h.dim()));
  CVector y(x.size());
  h.apply({x.data(), static_cast<std::size_t>(x.size())}, {y.data(), static_cast<std::size_t>(y.size())});
  return y;
}

}  // namespace jtpol
