#pragma once

// Independent reference computations for the test suites. None of these
// call into the library's basis enumeration or assembly code.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <map>
#include <random>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
constexpr double kHbar = 0.6582119569;

/// Lowest excited-manifold level at omega = 0.08196, epsilon = 7,
/// kappa = 2.2 omega. Dense diagonalization of the full E+/E- product
/// basis at n_max = 18 gave 6.764031706992307 eV and at n_max = 24
/// 6.764031706992488 eV.
constexpr double kLowestExcitedLevel = 6.764031706992307;

/// Molecular basis states per vibronic number v, by looping over every
/// (s, n+, n-) with 0 <= n < n_max.
inline std::map<int, long> states_per_sector(int n_max) {
  std::map<int, long> out;
  for (int s = -1; s <= 1; ++s)
    for (int a = 0; a < n_max; ++a)
      for (int b = 0; b < n_max; ++b) ++out[2 * (a - b) + s];
  return out;
}

struct SectorCount {
  long excited_p0 = 0;
  long ground_lcp = 0;
  long ground_rcp = 0;
  long total() const { return excited_p0 + ground_lcp + ground_rcp; }
};

/// Size of sector (1, j) for N = 1 or 2 from level multiplicities alone.
inline SectorCount sector_count(int N, int j, int n_max) {
  const auto L = states_per_sector(n_max);
  auto count = [&](int v) {
    auto it = L.find(v);
    return it == L.end() ? 0L : it->second;
  };
  SectorCount c;
  if (N == 1) {
    if ((j % 2 + 2) % 2 == 1) {
      c.excited_p0 = count(j);
      c.ground_lcp = count(j - 1);
      c.ground_rcp = count(j + 1);
    }
    return c;
  }
  // Unordered pairs of levels {l1, l2}.
  auto ground_pairs = [&](int total) {
    long n = 0;
    for (const auto& [v1, n1] : L) {
      if (v1 % 2 != 0) continue;
      const int v2 = total - v1;
      if (v2 % 2 != 0 || v2 < v1) continue;
      n += v1 == v2 ? n1 * (n1 + 1) / 2 : n1 * count(v2);
    }
    return n;
  };
  for (const auto& [ve, ne] : L)
    if (ve % 2 != 0 && (j - ve) % 2 == 0) c.excited_p0 += ne * count(j - ve);
  c.ground_lcp = ground_pairs(j - 1);
  c.ground_rcp = ground_pairs(j + 1);
  return c;
}

inline Eigen::MatrixXcd random_hermitian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  Eigen::MatrixXcd a(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) a(r, c) = cplx(d(rng), d(rng));
  return 0.5 * (a + a.adjoint());
}

inline Eigen::MatrixXcd random_unitary(int n, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(random_hermitian(n, rng) + Eigen::MatrixXcd::Identity(n, n) * cplx(0, 1));
  return qr.householderQ();
}

/// exp(-i H t / hbar) psi for the 2x2 Hermitian H = [[e1, g], [conj g, e2]].
inline Eigen::Vector2cd two_level_evolution(double e1, double e2, cplx g, double t, const Eigen::Vector2cd& psi) {
  const double mean = 0.5 * (e1 + e2), half = 0.5 * (e1 - e2);
  const double w = std::sqrt(half * half + std::norm(g));
  Eigen::Matrix2cd k;
  k << half, g, std::conj(g), -half;
  const double phase = w * t / kHbar;
  Eigen::Matrix2cd u = std::cos(phase) * Eigen::Matrix2cd::Identity();
  if (w > 0) u -= cplx(0, std::sin(phase) / w) * k;
  return std::exp(cplx(0, -mean * t / kHbar)) * (u * psi);
}

/// Five-point central difference of f at x.
template <class F>
double derivative(F&& f, double x, double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

/// Sum of unit-area Lorentzians (FWHM w) integrated analytically over [a, b].
inline double lorentzian_mass(const std::vector<std::pair<double, double>>& sticks, double w, double a, double b) {
  double m = 0.0;
  const double g = 0.5 * w;
  for (const auto& [e, i] : sticks) m += i * (std::atan((b - e) / g) - std::atan((a - e) / g)) / M_PI;
  return m;
}

}  // namespace oracle
