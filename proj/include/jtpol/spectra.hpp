#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "jtpol/collective.hpp"
#include "jtpol/core.hpp"
#include "jtpol/eigen_dense.hpp"
#include "jtpol/lanczos.hpp"
#include "jtpol/molecule.hpp"

namespace jtpol {

/// Observables of one polaritonic eigenstate.
struct PolaritonRecord {
  std::size_t index = 0;
  double energy = 0.0;
  double intensity = 0.0;
  double pr = 1.0;
  double polarization = 0.0;
  std::map<int, double> sector_populations;
};

/// Basis index of the bright state: all molecules in the ground vibronic
/// level plus one photon (RCP for a j = -1 sector, LCP for j = +1).
inline std::size_t bright_index(const SectorBasis& basis, const MolecularSpectrum& spec) {
  int photon = 0;
  if (basis.has_sector({1, -1})) {
    photon = -1;
  } else if (basis.has_sector({1, 1})) {
    photon = 1;
  } else {
    throw Error("bright_state: basis has neither sector (1,-1) nor (1,+1)");
  }
  OccupationState s;
  s.occupations = {{spec.ground_level(), basis.molecules()}};
  s.photon = photon;
  auto idx = basis.find(s);
  if (!idx) throw Error("bright_state: bright state is not part of the basis");
  return *idx;
}

inline CVector bright_state(const SectorBasis& basis, const MolecularSpectrum& spec) {
  CVector b = CVector::Zero(static_cast<Eigen::Index>(basis.size()));
  b[static_cast<Eigen::Index>(bright_index(basis, spec))] = 1.0;
  return b;
}

/// I_n = |<bright|psi_n>|^2 for every computed eigenpair.
inline std::vector<Stick> stick_spectrum(const EigenResult& eig, std::size_t bright) {
  if (!eig.vectors) throw Error("stick_spectrum: eigenvectors are required (or use the Lanczos measure)");
  std::vector<Stick> out;
  out.reserve(eig.size());
  const auto& v = *eig.vectors;
  for (std::size_t k = 0; k < eig.size(); ++k)
    out.push_back({eig.values[k], std::norm(v(static_cast<Eigen::Index>(bright), static_cast<Eigen::Index>(k)))});
  return out;
}

inline std::vector<Stick> stick_spectrum(const SpectralMeasure& measure) {
  std::vector<Stick> out;
  for (std::size_t k = 0; k < measure.energies.size(); ++k) out.push_back({measure.energies[k], measure.weights[k]});
  return out;
}

struct SectorOccupation {
  double pr = 1.0;
  std::map<int, double> populations;
};

/// Single-molecule vibronic sector distribution of a basis vector,
/// P(v) = (1/N) sum_b |psi_b|^2 (number of molecules of b in sector v),
/// and its participation ratio 1 / sum_v P(v)^2.
inline SectorOccupation participation_ratio(const CVector& psi, const SectorBasis& basis,
                                            const MolecularSpectrum& spec) {
  if (static_cast<std::size_t>(psi.size()) != basis.size()) throw Error("participation_ratio: size mismatch");
  SectorOccupation out;
  const double inv_n = 1.0 / basis.molecules();
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const double w = std::norm(psi[static_cast<Eigen::Index>(k)]);
    if (w == 0.0) continue;
    for (const auto& [l, c] : basis.state(k).occupations) out.populations[spec.level(l).v] += w * c * inv_n;
  }
  double s2 = 0.0;
  for (const auto& [v, p] : out.populations) s2 += p * p;
  out.pr = s2 > 0.0 ? 1.0 / s2 : 0.0;
  return out;
}

/// <P> = sum_b p(b) |psi_b|^2.
inline double photon_polarization(const CVector& psi, const SectorBasis& basis) {
  if (static_cast<std::size_t>(psi.size()) != basis.size()) throw Error("photon_polarization: size mismatch");
  double p = 0.0;
  for (std::size_t k = 0; k < basis.size(); ++k)
    if (basis.state(k).photon != 0) p += basis.state(k).photon * std::norm(psi[static_cast<Eigen::Index>(k)]);
  return p;
}

/// Records for every eigenpair of `eig` (vectors required), in energy order.
inline std::vector<PolaritonRecord> polariton_records(const EigenResult& eig, const SectorBasis& basis,
                                                      const MolecularSpectrum& spec) {
  if (!eig.vectors) throw Error("polariton_records: eigenvectors are required");
  const std::size_t bright = bright_index(basis, spec);
  std::vector<PolaritonRecord> out;
  out.reserve(eig.size());
  for (std::size_t k = 0; k < eig.size(); ++k) {
    // Column copy keeps the per-state work streaming.
    const CVector psi = eig.vectors->col(static_cast<Eigen::Index>(k));
    PolaritonRecord r;
    r.index = k;
    r.energy = eig.values[k];
    r.intensity = std::norm(psi[static_cast<Eigen::Index>(bright)]);
    auto occ = participation_ratio(psi, basis, spec);
    r.pr = occ.pr;
    r.sector_populations = std::move(occ.populations);
    r.polarization = photon_polarization(psi, basis);
    out.push_back(std::move(r));
  }
  return out;
}

/// Unit-area Lorentzian of full width `fwhm` centered at zero.
inline double lorentzian(double x, double fwhm) {
  const double g = 0.5 * fwhm;
  return g / (kPi * (x * x + g * g));
}

/// Sum of unit-area Lorentzians weighted by stick intensity, on `grid`.
inline std::vector<double> broaden(const std::vector<Stick>& sticks, double fwhm, const std::vector<double>& grid) {
  if (!(fwhm > 0.0)) throw Error("broaden: fwhm must be positive");
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t g = 0; g < grid.size(); ++g)
    for (const auto& s : sticks) out[g] += s.intensity * lorentzian(grid[g] - s.energy, fwhm);
  return out;
}

/// Uniform grid lo, lo + step, ... up to and including hi (within rounding).
inline std::vector<double> energy_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw Error("energy_grid: invalid range");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) g[k] = lo + step * static_cast<double>(k);
  return g;
}

/// Distance between the outermost half-maximum crossings of `curve` inside
/// [lo, hi], with linear interpolation between grid points.
inline double envelope_fwhm(const std::vector<double>& grid, const std::vector<double>& curve, double lo, double hi) {
  double peak = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (grid[k] >= lo && grid[k] <= hi) peak = std::max(peak, curve[k]);
  if (peak <= 0.0) return 0.0;
  const double half = 0.5 * peak;
  std::optional<double> left, right;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (grid[k - 1] < lo || grid[k] > hi) continue;
    const double a = curve[k - 1] - half, b = curve[k] - half;
    if ((a < 0.0) != (b < 0.0)) {
      const double x = grid[k - 1] + (grid[k] - grid[k - 1]) * a / (a - b);
      if (!left) left = x;
      right = x;
    }
  }
  if (!left || *left == *right) return 0.0;
  return *right - *left;
}

/// Row-stochastic (state x v) table of single-molecule sector populations
/// over the v values in [v_min, v_max].
struct Heatmap {
  std::vector<int> v_values;
  std::vector<std::vector<double>> rows;
};

inline Heatmap heatmap_table(const std::vector<PolaritonRecord>& records, int v_min, int v_max) {
  Heatmap h;
  for (int v = v_min; v <= v_max; ++v) h.v_values.push_back(v);
  for (const auto& r : records) {
    std::vector<double> row(h.v_values.size(), 0.0);
    for (const auto& [v, p] : r.sector_populations) {
      if (v < v_min || v > v_max) throw Error("heatmap_table: population outside the v range");
      row[static_cast<std::size_t>(v - v_min)] = p;
    }
    h.rows.push_back(std::move(row));
  }
  return h;
}

}  // namespace jtpol
