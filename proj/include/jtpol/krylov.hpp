#pragma once

#include <cmath>
#include <concepts>
#include <span>
#include <vector>

#include "jtpol/core.hpp"
#include "jtpol/lanczos.hpp"
#include "jtpol/sparse_hermitian.hpp"

namespace jtpol {

/// Anything that can apply a Hermitian H(t) to a vector.
template <class Op>
concept TimeDependentOperator = requires(const Op& op, double t, std::span<const cplx> x, std::span<cplx> y) {
  { op.dim() } -> std::convertible_to<std::size_t>;
  op.apply(t, x, y);
};

/// Time-independent adaptor around a SparseHermitian.
class StaticOperator {
 public:
  explicit StaticOperator(const SparseHermitian& h) : h_(&h) {}
  std::size_t dim() const noexcept { return h_->dim(); }
  void apply(double /*t*/, std::span<const cplx> x, std::span<cplx> y) const noexcept { h_->apply(x, y); }

 private:
  const SparseHermitian* h_;
};

struct KrylovStats {
  std::size_t dimension = 0;
  /// a-posteriori estimate of the step error norm, beta_m |[exp(-iT dt) e1]_m|
  double error_estimate = 0.0;
};

/// One short-time step psi -> exp(-i H(t + dt/2) dt / hbar) psi, evaluated in
/// a Krylov space of dimension kdim built with full reorthogonalization.
///
/// The midpoint sample makes the scheme second order for time-dependent H.
/// A negative dt propagates backwards. Throws PropagationError (step -1) on
/// non-finite input or output; callers attach their own step index.
template <TimeDependentOperator Op>
CVector krylov_step(const Op& h, const CVector& psi, double t, double dt, std::size_t kdim,
                    KrylovStats* stats = nullptr) {
  const std::size_t n = h.dim();
  if (static_cast<std::size_t>(psi.size()) != n) throw Error("krylov_step: state length does not match operator");
  if (!(dt != 0.0) || !std::isfinite(dt)) throw Error("krylov_step: dt must be finite and nonzero");
  if (kdim < 2) throw Error("krylov_step: kdim must be at least 2");
  const double beta0 = psi.norm();
  if (!std::isfinite(beta0)) throw PropagationError("krylov_step: non-finite state", -1);
  if (beta0 == 0.0) {
    if (stats) *stats = {};
    return psi;
  }
  const std::size_t m_max = std::min(kdim, n);
  const double t_mid = t + 0.5 * dt;

  CMatrix v(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m_max));
  v.col(0) = psi / beta0;
  std::vector<double> alpha, beta;
  CVector w(static_cast<Eigen::Index>(n));
  double beta_last = 0.0;
  std::size_t m = 0;
  for (std::size_t j = 0; j < m_max; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    h.apply(t_mid, {v.col(jj).data(), n}, {w.data(), n});
    alpha.push_back(v.col(jj).dot(w).real());
    for (int pass = 0; pass < 2; ++pass) {
      CVector overlaps = v.leftCols(jj + 1).adjoint() * w;
      w.noalias() -= v.leftCols(jj + 1) * overlaps;
    }
    m = j + 1;
    const double b = w.norm();
    if (!std::isfinite(b)) throw PropagationError("krylov_step: non-finite Krylov vector", -1);
    // Invariant subspace reached: the step is exact in this space.
    if (b <= 1e-14 * (std::abs(alpha.back()) + 1.0)) {
      beta_last = 0.0;
      break;
    }
    beta_last = b;
    if (j + 1 == m_max) break;
    beta.push_back(b);
    v.col(jj + 1) = w / b;
  }

  std::vector<double> s;
  const std::vector<double> lambda = tridiagonal_eigen(alpha, beta, &s);
  CVector y = CVector::Zero(static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k) {
    const cplx phase = std::exp(cplx(0.0, -lambda[k] * dt / kHbar)) * s[k * m];
    for (std::size_t r = 0; r < m; ++r) y[static_cast<Eigen::Index>(r)] += s[k * m + r] * phase;
  }
  y *= beta0;
  if (stats) {
    stats->dimension = m;
    stats->error_estimate = beta_last * std::abs(y[static_cast<Eigen::Index>(m - 1)]);
  }
  CVector out = v.leftCols(static_cast<Eigen::Index>(m)) * y;
  if (!out.allFinite()) throw PropagationError("krylov_step: non-finite result", -1);
  return out;
}

}  // namespace jtpol
