#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "jtpol/core.hpp"
#include "jtpol/lapack.hpp"
#include "jtpol/sparse_hermitian.hpp"

namespace jtpol {

/// Eigen-decomposition of a real symmetric tridiagonal matrix.
/// Returns eigenvalues ascending; vectors (column major, m x m) when requested.
inline std::vector<double> tridiagonal_eigen(std::vector<double> diag, std::vector<double> offdiag,
                                             std::vector<double>* vectors) {
  const lapack_int m = static_cast<lapack_int>(diag.size());
  if (m == 0) return {};
  offdiag.resize(diag.size(), 0.0);
  std::vector<double> z(vectors ? diag.size() * diag.size() : 1);
  const lapack_int info =
      LAPACKE_dstev(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', m, diag.data(), offdiag.data(), z.data(), vectors ? m : 1);
  if (info != 0) throw Error("tridiagonal_eigen: dstev failed with info " + std::to_string(info));
  if (vectors) *vectors = std::move(z);
  return diag;
}

/// Local density of states of a seed vector: Ritz energies and their weights
/// |<seed|ritz_k>|^2.
struct SpectralMeasure {
  std::vector<double> energies;
  std::vector<double> weights;
  /// Ritz vectors (one column per energy) when requested.
  std::optional<CMatrix> ritz_vectors;
  /// True when the Krylov space became invariant before m steps.
  bool breakdown = false;
  std::size_t iterations = 0;
};

struct LanczosOptions {
  /// Breakdown threshold on beta_j, relative to max(1, ||H||).
  double breakdown_tol = 1e-14;
  bool ritz_vectors = false;
};

/// Lanczos tridiagonalization seeded with `seed` (normalized internally),
/// with full reorthogonalization against all previous vectors at every step.
/// The Ritz weights sum to one because the tridiagonal eigenvectors are
/// orthonormal.
inline SpectralMeasure lanczos_spectral_measure(const SparseHermitian& h, const CVector& seed, std::size_t m,
                                                const LanczosOptions& options = {}) {
  const std::size_t n = h.dim();
  if (static_cast<std::size_t>(seed.size()) != n) throw Error("lanczos: seed length does not match dimension");
  if (m == 0 || m > n) throw Error("lanczos: iteration count must lie in [1, dim]");
  const double seed_norm = seed.norm();
  if (!(seed_norm > 0.0)) throw Error("lanczos: zero seed vector");

  const double scale = std::max(1.0, h.norm_bound());
  CMatrix q(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  q.col(0) = seed / seed_norm;
  std::vector<double> alpha, beta;
  CVector w(static_cast<Eigen::Index>(n));
  SpectralMeasure out;

  for (std::size_t j = 0; j < m; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    h.apply({q.col(jj).data(), n}, {w.data(), n});
    alpha.push_back(q.col(jj).dot(w).real());
    // Two passes of classical Gram-Schmidt over the whole basis.
    for (int pass = 0; pass < 2; ++pass) {
      CVector overlaps = q.leftCols(jj + 1).adjoint() * w;
      w.noalias() -= q.leftCols(jj + 1) * overlaps;
    }
    out.iterations = j + 1;
    if (j + 1 == m) break;
    const double b = w.norm();
    if (b < options.breakdown_tol * scale) {
      out.breakdown = true;
      break;
    }
    beta.push_back(b);
    q.col(jj + 1) = w / b;
  }

  const std::size_t k = alpha.size();
  std::vector<double> s;
  out.energies = tridiagonal_eigen(alpha, beta, &s);
  out.weights.resize(k);
  for (std::size_t i = 0; i < k; ++i) out.weights[i] = s[i * k] * s[i * k];
  if (options.ritz_vectors) {
    Eigen::Map<const Eigen::MatrixXd> sm(s.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    out.ritz_vectors = q.leftCols(static_cast<Eigen::Index>(k)) * sm.cast<cplx>();
  }
  return out;
}

}  // namespace jtpol
