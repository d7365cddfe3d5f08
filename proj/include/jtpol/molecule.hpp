#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "jtpol/core.hpp"
#include "jtpol/eigen_dense.hpp"
#include "jtpol/sparse_hermitian.hpp"

namespace jtpol {

/// Parameters of the linear E x e Jahn-Teller molecule.
struct ModelParams {
  double omega = 0.08196;         ///< vibrational quantum (eV)
  double epsilon = 7.0;           ///< A -> E electronic gap (eV)
  double kappa = 2.2 * 0.08196;   ///< linear JT coupling (eV)
  int n_max = 18;                 ///< Fock states per vibrational mode

  void validate() const {
    if (!(omega > 0.0)) throw Error("ModelParams: omega must be positive");
    if (!(epsilon > 0.0)) throw Error("ModelParams: epsilon must be positive");
    if (!(kappa >= 0.0)) throw Error("ModelParams: kappa must be non-negative");
    if (n_max < 1) throw Error("ModelParams: n_max must be at least 1");
  }

  bool operator==(const ModelParams&) const = default;
};

/// Electronic label; the underlying value is the electronic angular momentum.
enum class Electronic : int { EMinus = -1, A = 0, EPlus = 1 };

struct MolecularBasisState {
  Electronic s;
  int n_plus;
  int n_minus;

  auto operator<=>(const MolecularBasisState&) const = default;
};

/// Vibronic angular momentum 2(n+ - n-) + sigma.
constexpr int vibronic_number(const MolecularBasisState& st) noexcept {
  return 2 * (st.n_plus - st.n_minus) + static_cast<int>(st.s);
}

constexpr bool is_excited_sector(int v) noexcept { return v % 2 != 0; }

/// Basis states of sector v under the per-mode cutoff, in a fixed order:
/// A states by n-, or E+ states by n- followed by E- states by n-.
inline std::vector<MolecularBasisState> sector_states(int v, int n_max) {
  std::vector<MolecularBasisState> out;
  auto push_diff = [&](Electronic s, int diff) {
    for (int nm = 0; nm < n_max; ++nm) {
      const int np = nm + diff;
      if (np >= 0 && np < n_max) out.push_back({s, np, nm});
    }
  };
  if (!is_excited_sector(v)) {
    push_diff(Electronic::A, v / 2);
  } else {
    push_diff(Electronic::EPlus, (v - 1) / 2);
    push_diff(Electronic::EMinus, (v + 1) / 2);
  }
  return out;
}

/// All sectors with at least one state under the cutoff, ascending.
inline std::vector<int> representable_sectors(int n_max) {
  std::vector<int> out;
  for (int v = -(2 * n_max - 1); v <= 2 * n_max - 1; ++v)
    if (!sector_states(v, n_max).empty()) out.push_back(v);
  return out;
}

/// Matrix of the molecular Hamiltonian restricted to one vibronic sector.
struct SectorBlock {
  int v = 0;
  std::vector<MolecularBasisState> states;
  /// Empty when the sector has no states under the cutoff.
  std::optional<SparseHermitian> hamiltonian;
};

/// Builds H_m = omega (n+ + n-) + epsilon |E><E| + kappa[(b+^dag + b-)|E-><E+| + h.c.]
/// on the basis of sector v.
inline SectorBlock build_sector_block(int v, const ModelParams& params) {
  params.validate();
  SectorBlock block;
  block.v = v;
  block.states = sector_states(v, params.n_max);
  if (block.states.empty()) return block;

  auto find = [&](Electronic s, int np, int nm) -> std::optional<std::size_t> {
    for (std::size_t k = 0; k < block.states.size(); ++k)
      if (block.states[k] == MolecularBasisState{s, np, nm}) return k;
    return std::nullopt;
  };

  std::vector<Triplet> t;
  for (std::size_t a = 0; a < block.states.size(); ++a) {
    const auto& st = block.states[a];
    const double diag =
        params.omega * (st.n_plus + st.n_minus) + (st.s == Electronic::A ? 0.0 : params.epsilon);
    t.push_back({a, a, diag});
    if (st.s != Electronic::EPlus) continue;
    // kappa b+^dag |E-><E+|
    if (auto b = find(Electronic::EMinus, st.n_plus + 1, st.n_minus)) {
      const double el = params.kappa * std::sqrt(static_cast<double>(st.n_plus + 1));
      t.push_back({std::min(a, *b), std::max(a, *b), el});
    }
    // kappa b- |E-><E+|
    if (st.n_minus > 0) {
      if (auto b = find(Electronic::EMinus, st.n_plus, st.n_minus - 1)) {
        const double el = params.kappa * std::sqrt(static_cast<double>(st.n_minus));
        t.push_back({std::min(a, *b), std::max(a, *b), el});
      }
    }
  }
  block.hamiltonian = SparseHermitian::from_upper(block.states.size(), std::move(t));
  return block;
}

/// One vibronic eigenstate lambda_i^v.
struct VibronicLevel {
  int v = 0;
  int i = 0;
  double energy = 0.0;
  /// Amplitudes over the sector basis (sector_states(v, n_max) order).
  std::vector<cplx> coeffs;
  /// Coefficient of |E-,0,0> (RCP-reachable from |A,0,0>).
  cplx bright_amplitude_rcp{};
  /// Coefficient of |E+,0,0> (LCP-reachable from |A,0,0>).
  cplx bright_amplitude_lcp{};
};

/// Entry of the alpha or beta table: ground level index, excited level index, value.
struct CouplingEntry {
  std::size_t ground;
  std::size_t excited;
  cplx value;
};

/// alpha_{i,j} = sum conj(U_{A,n,i}) U_{E+,n,j}; beta with E-.
/// Indices refer to the global level list. Entries are sorted by (excited, ground).
struct CouplingTable {
  std::vector<CouplingEntry> alpha;
  std::vector<CouplingEntry> beta;
};

/// Level table of one molecule over a set of vibronic sectors.
///
/// Levels are stored ascending in v, and by energy within a sector, so the
/// global level index orders sectors as well.
class MolecularSpectrum {
 public:
  const ModelParams& params() const noexcept { return params_; }
  const std::vector<VibronicLevel>& levels() const noexcept { return levels_; }
  const VibronicLevel& level(std::size_t idx) const { return levels_.at(idx); }
  const CouplingTable& couplings() const noexcept { return couplings_; }
  CouplingTable& mutable_couplings() noexcept { return couplings_; }

  bool has_sector(int v) const noexcept { return ranges_.count(v) != 0; }
  std::vector<int> sectors() const {
    std::vector<int> out;
    for (const auto& [v, r] : ranges_) out.push_back(v);
    return out;
  }

  /// [begin, end) of the global indices of sector v. Throws if absent.
  std::pair<std::size_t, std::size_t> sector_range(int v) const {
    auto it = ranges_.find(v);
    if (it == ranges_.end()) throw Error("level table lacks vibronic sector v=" + std::to_string(v));
    return it->second;
  }

  const std::vector<MolecularBasisState>& sector_basis(int v) const { return sector_states_.at(v); }

  /// Index of the global ground level, |A,0,0> in sector v = 0.
  std::size_t ground_level() const { return sector_range(0).first; }

 private:
  friend MolecularSpectrum diagonalize_molecule(const ModelParams&, const std::vector<int>&);

  ModelParams params_;
  std::vector<VibronicLevel> levels_;
  std::map<int, std::pair<std::size_t, std::size_t>> ranges_;
  std::map<int, std::vector<MolecularBasisState>> sector_states_;
  CouplingTable couplings_;
};

namespace detail {

inline double mean_quanta(const std::vector<MolecularBasisState>& basis, const CVector& c) {
  double s = 0.0;
  for (std::size_t k = 0; k < basis.size(); ++k)
    s += std::norm(c[static_cast<Eigen::Index>(k)]) * (basis[k].n_plus + basis[k].n_minus);
  return s;
}

// Largest-magnitude coefficient made real positive; the first one wins ties.
inline void fix_phase(CVector& c) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < c.size(); ++k)
    if (std::abs(c[k]) > std::abs(c[best]) * (1.0 + 1e-12)) best = k;
  const double mag = std::abs(c[best]);
  if (mag > 0.0) c *= std::conj(c[best]) / mag;
}

inline void add_couplings(const std::vector<VibronicLevel>& levels, const std::map<int, std::vector<MolecularBasisState>>& bases,
                          const std::map<int, std::pair<std::size_t, std::size_t>>& ranges, Electronic partner,
                          int ground_offset, std::vector<CouplingEntry>& out) {
  for (const auto& [v, range] : ranges) {
    if (!is_excited_sector(v)) continue;
    auto git = ranges.find(v + ground_offset);
    if (git == ranges.end()) continue;
    const auto& ebasis = bases.at(v);
    const auto& gbasis = bases.at(v + ground_offset);
    for (std::size_t j = range.first; j < range.second; ++j) {
      for (std::size_t i = git->second.first; i < git->second.second; ++i) {
        cplx sum{};
        for (std::size_t a = 0; a < gbasis.size(); ++a) {
          for (std::size_t b = 0; b < ebasis.size(); ++b) {
            if (ebasis[b].s != partner || ebasis[b].n_plus != gbasis[a].n_plus || ebasis[b].n_minus != gbasis[a].n_minus)
              continue;
            sum += std::conj(levels[i].coeffs[a]) * levels[j].coeffs[b];
          }
        }
        if (sum != cplx{}) out.push_back({i, j, sum});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const CouplingEntry& x, const CouplingEntry& y) {
    return x.excited != y.excited ? x.excited < y.excited : x.ground < y.ground;
  });
}

}  // namespace detail

/// Diagonalizes every requested sector and builds the alpha/beta tables.
///
/// Eigenvector phases: the largest-magnitude coefficient is real positive.
/// Degenerate levels (|dE| < 1e-10 eV) are ordered by ascending <n+ + n->.
/// Sectors that are empty under the cutoff are skipped.
inline MolecularSpectrum diagonalize_molecule(const ModelParams& params, const std::vector<int>& v_range) {
  params.validate();
  MolecularSpectrum out;
  out.params_ = params;
  std::set<int> sectors(v_range.begin(), v_range.end());
  for (int v : sectors) {
    SectorBlock block = build_sector_block(v, params);
    if (!block.hamiltonian) continue;
    EigenResult eig = eig_dense(*block.hamiltonian, true);
    const auto& vecs = *eig.vectors;
    struct Item {
      double e;
      double quanta;
      CVector c;
    };
    std::vector<Item> items;
    for (std::size_t k = 0; k < eig.size(); ++k) {
      CVector c = vecs.col(static_cast<Eigen::Index>(k));
      detail::fix_phase(c);
      items.push_back({eig.values[k], detail::mean_quanta(block.states, c), std::move(c)});
    }
    std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
      if (std::abs(a.e - b.e) >= 1e-10) return a.e < b.e;
      return a.quanta < b.quanta;
    });
    const std::size_t begin = out.levels_.size();
    for (std::size_t k = 0; k < items.size(); ++k) {
      VibronicLevel lvl;
      lvl.v = v;
      lvl.i = static_cast<int>(k);
      lvl.energy = items[k].e;
      lvl.coeffs.assign(items[k].c.data(), items[k].c.data() + items[k].c.size());
      for (std::size_t a = 0; a < block.states.size(); ++a) {
        const auto& st = block.states[a];
        if (st.n_plus != 0 || st.n_minus != 0) continue;
        if (st.s == Electronic::EMinus) lvl.bright_amplitude_rcp = lvl.coeffs[a];
        if (st.s == Electronic::EPlus) lvl.bright_amplitude_lcp = lvl.coeffs[a];
      }
      out.levels_.push_back(std::move(lvl));
    }
    out.ranges_[v] = {begin, out.levels_.size()};
    out.sector_states_[v] = std::move(block.states);
  }
  // alpha pairs E+ (sector v) with A (sector v-1); beta pairs E- (v) with A (v+1).
  detail::add_couplings(out.levels_, out.sector_states_, out.ranges_, Electronic::EPlus, -1, out.couplings_.alpha);
  detail::add_couplings(out.levels_, out.sector_states_, out.ranges_, Electronic::EMinus, +1, out.couplings_.beta);
  return out;
}

/// Every representable sector.
inline MolecularSpectrum diagonalize_molecule(const ModelParams& params) {
  return diagonalize_molecule(params, representable_sectors(params.n_max));
}

struct Stick {
  double energy;
  double intensity;
};

/// Single-molecule absorption from |A,0,0> by an RCP photon: sticks over the
/// v = -1 levels with intensity |<E-,0,0|lambda>|^2, normalized to unit sum.
inline std::vector<Stick> bare_absorption_sticks(const MolecularSpectrum& spec) {
  if (!spec.has_sector(-1) || !spec.has_sector(1) || !spec.has_sector(0))
    throw Error("bare_absorption_sticks: sectors v = -1, 0, +1 are required");
  const double e0 = spec.level(spec.ground_level()).energy;
  const auto [b, e] = spec.sector_range(-1);
  std::vector<Stick> out;
  double total = 0.0;
  for (std::size_t k = b; k < e; ++k) {
    const double w = std::norm(spec.level(k).bright_amplitude_rcp);
    out.push_back({spec.level(k).energy - e0, w});
    total += w;
  }
  for (auto& s : out) s.intensity /= total;
  return out;
}

/// Transition energy of the most intense bare stick.
inline double brightest_transition(const MolecularSpectrum& spec) {
  const auto sticks = bare_absorption_sticks(spec);
  return std::max_element(sticks.begin(), sticks.end(),
                          [](const Stick& a, const Stick& b) { return a.intensity < b.intensity; })
      ->energy;
}

}  // namespace jtpol
