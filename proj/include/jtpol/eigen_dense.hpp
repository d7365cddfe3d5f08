#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "jtpol/core.hpp"
#include "jtpol/lapack.hpp"
#include "jtpol/sparse_hermitian.hpp"

namespace jtpol {

/// Eigenvalues ascending (eV), optional orthonormal eigenvectors as columns,
/// and per-pair residual norms ||Hx - lambda x|| when vectors were computed.
struct EigenResult {
  std::vector<double> values;
  std::optional<CMatrix> vectors;
  std::vector<double> residuals;

  std::size_t size() const noexcept { return values.size(); }
};

struct DenseOptions {
  /// Largest dimension accepted by the dense path.
  std::size_t dense_limit = 12000;
  /// Restrict to eigenvalues in the half-open interval (lo, hi].
  std::optional<std::pair<double, double>> window;
};

namespace detail {

inline void check_lapack(lapack_int info, const char* routine) {
  if (info != 0) throw Error(std::string("eig_dense: ") + routine + " failed with info " + std::to_string(info));
}

// Divide and conquer on the full spectrum, then the window is cut out.
inline lapack_int tridiagonal_solve_dc(std::vector<double> d, std::vector<double> e, bool want_vectors,
                                       const std::optional<std::pair<double, double>>& window,
                                       std::vector<double>& w, std::vector<double>& z) {
  const lapack_int n = static_cast<lapack_int>(d.size());
  e.resize(d.size(), 0.0);
  std::vector<double> full;
  if (want_vectors) {
    full.assign(d.size() * d.size(), 0.0);
    check_lapack(LAPACKE_dstedc(LAPACK_COL_MAJOR, 'I', n, d.data(), e.data(), full.data(), n), "dstedc");
  } else {
    check_lapack(LAPACKE_dsterf(n, d.data(), e.data()), "dsterf");
  }
  w.clear();
  z.clear();
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (window && !(d[k] > window->first && d[k] <= window->second)) continue;
    w.push_back(d[k]);
    if (want_vectors) z.insert(z.end(), full.begin() + static_cast<std::ptrdiff_t>(k * d.size()),
                               full.begin() + static_cast<std::ptrdiff_t>((k + 1) * d.size()));
  }
  return static_cast<lapack_int>(w.size());
}

inline lapack_int tridiagonal_solve_mrrr(std::vector<double> d, std::vector<double> e, bool want_vectors,
                                         const std::optional<std::pair<double, double>>& window,
                                         std::vector<double>& w, std::vector<double>& z) {
  const lapack_int n = static_cast<lapack_int>(d.size());
  const char range = window ? 'V' : 'A';
  const double vl = window ? window->first : 0.0;
  const double vu = window ? window->second : 0.0;
  e.resize(d.size(), 0.0);
  w.assign(d.size(), 0.0);
  std::vector<lapack_int> isuppz(2 * d.size());
  lapack_logical tryrac = 1;
  lapack_int m = 0;
  if (!want_vectors) {
    double dummy = 0.0;
    check_lapack(LAPACKE_dstemr(LAPACK_COL_MAJOR, 'N', range, n, d.data(), e.data(), vl, vu, 0, 0, &m,
                                w.data(), &dummy, 1, 1, isuppz.data(), &tryrac),
                 "dstemr");
    w.resize(static_cast<std::size_t>(m));
    return m;
  }
  lapack_int nzc = n;
  if (window) {
    // Workspace query: first entry of z receives the number of columns needed.
    std::vector<double> dq = d, eq = e;
    double query = 0.0;
    check_lapack(LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', range, n, dq.data(), eq.data(), vl, vu, 0, 0, &m,
                                w.data(), &query, n, -1, isuppz.data(), &tryrac),
                 "dstemr(query)");
    nzc = std::max<lapack_int>(1, static_cast<lapack_int>(query));
    tryrac = 1;
  }
  z.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(nzc), 0.0);
  check_lapack(LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', range, n, d.data(), e.data(), vl, vu, 0, 0, &m, w.data(),
                              z.data(), n, nzc, isuppz.data(), &tryrac),
               "dstemr");
  w.resize(static_cast<std::size_t>(m));
  z.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(m));
  return m;
}

// Solves the real symmetric tridiagonal problem (d, e) on the requested range.
// On return w holds m eigenvalues and z (n x m, column major) the vectors.
// MRRR can fail on exactly degenerate splits; divide and conquer takes over then.
inline lapack_int tridiagonal_solve(const std::vector<double>& d, const std::vector<double>& e, bool want_vectors,
                                    const std::optional<std::pair<double, double>>& window,
                                    std::vector<double>& w, std::vector<double>& z) {
  try {
    return tridiagonal_solve_mrrr(d, e, want_vectors, window, w, z);
  } catch (const Error&) {
    return tridiagonal_solve_dc(d, e, want_vectors, window, w, z);
  }
}

inline void fill_residuals(const SparseHermitian& h, EigenResult& out) {
  const auto& v = *out.vectors;
  out.residuals.resize(out.values.size());
  CVector hx(v.rows());
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    CVector x = v.col(k);
    h.apply({x.data(), static_cast<std::size_t>(x.size())}, {hx.data(), static_cast<std::size_t>(hx.size())});
    out.residuals[static_cast<std::size_t>(k)] = (hx - out.values[static_cast<std::size_t>(k)] * x).norm();
  }
}

}  // namespace detail

/// Dense Hermitian eigendecomposition.
///
/// Real-valued matrices go through dsytrd/dstemr/dormtr, complex ones through
/// zhetrd/dstemr/zunmtr. With a window only the eigenpairs inside it are
/// back-transformed, which keeps the 11664-dimensional N=2 sector within a
/// few GB. Throws DenseLimitError above options.dense_limit.
inline EigenResult eig_dense(const SparseHermitian& h, bool want_vectors, const DenseOptions& options = {}) {
  const std::size_t n = h.dim();
  if (n > options.dense_limit) throw DenseLimitError(n, options.dense_limit);
  const lapack_int ln = static_cast<lapack_int>(n);
  EigenResult out;
  std::vector<double> d(n), e(n > 1 ? n - 1 : 1), w, z;

  if (h.is_real()) {
    std::vector<double> a(n * n, 0.0);
    for (const auto& t : h.entries()) a[t.col * n + t.row] = t.value.real();
    std::vector<double> tau(n > 1 ? n - 1 : 1);
    detail::check_lapack(LAPACKE_dsytrd(LAPACK_COL_MAJOR, 'U', ln, a.data(), ln, d.data(), e.data(), tau.data()),
                         "dsytrd");
    const lapack_int m = detail::tridiagonal_solve(d, e, want_vectors, options.window, w, z);
    if (want_vectors && m > 0) {
      detail::check_lapack(LAPACKE_dormtr(LAPACK_COL_MAJOR, 'L', 'U', 'N', ln, m, a.data(), ln, tau.data(),
                                          z.data(), ln),
                           "dormtr");
      a.clear();
      a.shrink_to_fit();
      CMatrix vecs(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
      vecs.real() = Eigen::Map<const Eigen::MatrixXd>(z.data(), static_cast<Eigen::Index>(n), m);
      vecs.imag().setZero();
      out.vectors = std::move(vecs);
    }
  } else {
    std::vector<cplx> a(n * n, cplx{});
    for (const auto& t : h.entries()) a[t.col * n + t.row] = t.value;
    std::vector<cplx> tau(n > 1 ? n - 1 : 1);
    detail::check_lapack(LAPACKE_zhetrd(LAPACK_COL_MAJOR, 'U', ln, a.data(), ln, d.data(), e.data(), tau.data()),
                         "zhetrd");
    const lapack_int m = detail::tridiagonal_solve(d, e, want_vectors, options.window, w, z);
    if (want_vectors && m > 0) {
      CMatrix vecs(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
      vecs.real() = Eigen::Map<const Eigen::MatrixXd>(z.data(), static_cast<Eigen::Index>(n), m);
      vecs.imag().setZero();
      z.clear();
      z.shrink_to_fit();
      detail::check_lapack(LAPACKE_zunmtr(LAPACK_COL_MAJOR, 'L', 'U', 'N', ln, m, a.data(), ln, tau.data(),
                                          vecs.data(), ln),
                           "zunmtr");
      out.vectors = std::move(vecs);
    }
  }
  out.values = std::move(w);
  if (out.vectors) detail::fill_residuals(h, out);
  return out;
}

}  // namespace jtpol
