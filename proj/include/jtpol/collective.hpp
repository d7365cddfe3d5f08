#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "jtpol/core.hpp"
#include "jtpol/molecule.hpp"
#include "jtpol/sparse_hermitian.hpp"

namespace jtpol {

/// Cavity frequency, collective coupling and molecule count.
/// An empty omega_c means "resonant with the brightest bare transition".
struct CavityParams {
  std::optional<double> omega_c;
  double Omega = 0.0;
  int N = 1;

  void validate() const {
    if (omega_c && !(*omega_c > 0.0)) throw Error("CavityParams: omega_c must be positive");
    if (!(Omega >= 0.0)) throw Error("CavityParams: Omega must be non-negative");
    if (N < 1) throw Error("CavityParams: N must be at least 1");
  }

  /// Copy with omega_c fixed; auto resolves to the brightest bare transition.
  CavityParams resolved(const MolecularSpectrum& spec) const {
    CavityParams out = *this;
    if (!out.omega_c) out.omega_c = brightest_transition(spec);
    return out;
  }

  bool operator==(const CavityParams&) const = default;
};

/// (n_ex, j) quantum numbers of a conserved block.
struct Sector {
  int n_ex = 1;
  int j = -1;
  bool operator==(const Sector&) const = default;
};

/// Occupation-number state of N identical molecules plus the photon label
/// p in {-1 (one RCP photon), 0 (none), +1 (one LCP photon)}.
struct OccupationState {
  /// (level index, molecule count) pairs, ascending in level index, counts > 0.
  std::vector<std::pair<std::size_t, int>> occupations;
  int photon = 0;

  int count(std::size_t level) const noexcept {
    for (const auto& [l, c] : occupations)
      if (l == level) return c;
    return 0;
  }

  bool operator==(const OccupationState&) const = default;

  /// Canonical order: photon label, then lexicographic occupation pairs.
  friend bool operator<(const OccupationState& a, const OccupationState& b) {
    if (a.photon != b.photon) return a.photon < b.photon;
    return a.occupations < b.occupations;
  }
};

struct OccupationStateHash {
  std::size_t operator()(const OccupationState& s) const noexcept {
    std::size_t h = std::hash<int>{}(s.photon + 7);
    for (const auto& [l, c] : s.occupations) {
      h ^= std::hash<std::size_t>{}(l * 64 + static_cast<std::size_t>(c)) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
  }
};

/// Keeps at most the lowest M levels of each sector and sectors with |v| <= v_cap.
struct RetentionFilter {
  std::optional<int> max_levels_per_sector;
  std::optional<int> v_cap;

  bool keeps(const VibronicLevel& lvl) const noexcept {
    if (max_levels_per_sector && lvl.i >= *max_levels_per_sector) return false;
    if (v_cap && std::abs(lvl.v) > *v_cap) return false;
    return true;
  }
  bool keeps_sector(int v) const noexcept { return !v_cap || std::abs(v) <= *v_cap; }
  bool is_full() const noexcept { return !max_levels_per_sector && !v_cap; }

  bool operator==(const RetentionFilter&) const = default;
};

/// Ordered permutation-symmetric basis of one sector or a union of sectors.
class SectorBasis {
 public:
  SectorBasis() = default;
  SectorBasis(int n_molecules, std::vector<Sector> sectors, std::vector<OccupationState> states,
              RetentionFilter retention)
      : n_(n_molecules), sectors_(std::move(sectors)), states_(std::move(states)), retention_(retention) {
    std::sort(states_.begin(), states_.end());
    index_.reserve(states_.size());
    for (std::size_t k = 0; k < states_.size(); ++k) {
      if (!index_.emplace(states_[k], k).second) throw Error("SectorBasis: duplicate state");
    }
  }

  int molecules() const noexcept { return n_; }
  const std::vector<Sector>& sectors() const noexcept { return sectors_; }
  const std::vector<OccupationState>& states() const noexcept { return states_; }
  const OccupationState& state(std::size_t k) const { return states_.at(k); }
  std::size_t size() const noexcept { return states_.size(); }
  const RetentionFilter& retention() const noexcept { return retention_; }

  std::optional<std::size_t> find(const OccupationState& s) const {
    auto it = index_.find(s);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool has_sector(const Sector& s) const {
    return std::find(sectors_.begin(), sectors_.end(), s) != sectors_.end();
  }

 private:
  int n_ = 0;
  std::vector<Sector> sectors_;
  std::vector<OccupationState> states_;
  std::unordered_map<OccupationState, std::size_t, OccupationStateHash> index_;
  RetentionFilter retention_;
};

/// Electronic-plus-photonic excitation number of a state.
inline int excitation_number(const OccupationState& s, const MolecularSpectrum& spec) {
  int n = s.photon != 0 ? 1 : 0;
  for (const auto& [l, c] : s.occupations)
    if (is_excited_sector(spec.level(l).v)) n += c;
  return n;
}

/// Total angular momentum sum_k v_k + p.
inline int total_angular_momentum(const OccupationState& s, const MolecularSpectrum& spec) {
  int j = s.photon;
  for (const auto& [l, c] : s.occupations) j += c * spec.level(l).v;
  return j;
}

namespace detail {

inline OccupationState make_state(std::vector<std::size_t> levels, int photon) {
  std::sort(levels.begin(), levels.end());
  OccupationState s;
  s.photon = photon;
  for (std::size_t l : levels) {
    if (!s.occupations.empty() && s.occupations.back().first == l) {
      ++s.occupations.back().second;
    } else {
      s.occupations.push_back({l, 1});
    }
  }
  return s;
}

// Multisets of `count` levels (nondecreasing positions in `pool`) whose v sum
// to `target`. `pool` is sorted by v, so the remaining minimum is known.
inline void multisets(const std::vector<std::size_t>& pool, const std::vector<int>& vs, std::size_t start, int count,
                      int target, std::vector<std::size_t>& current,
                      const std::function<void(const std::vector<std::size_t>&)>& emit) {
  if (count == 0) {
    if (target == 0) emit(current);
    return;
  }
  if (pool.empty()) return;
  const int v_max = vs.back();
  for (std::size_t k = start; k < pool.size(); ++k) {
    const int v = vs[k];
    if (count * v > target) break;
    if (v + (count - 1) * v_max < target) continue;
    current.push_back(pool[k]);
    multisets(pool, vs, k, count - 1, target - v, current, emit);
    current.pop_back();
  }
}

// Representable sectors that can carry a molecule in some state of (n_ex, j).
inline std::vector<int> required_sectors(int N, const Sector& sector, int n_max, const RetentionFilter& retention) {
  std::vector<int> ground, excited;
  for (int v : representable_sectors(n_max)) {
    if (!retention.keeps_sector(v)) continue;
    (is_excited_sector(v) ? excited : ground).push_back(v);
  }
  if (ground.empty()) return {};
  const int g_min = ground.front(), g_max = ground.back();
  auto feasible = [&](int rest_count, int rest_target) {
    if (rest_count == 0) return rest_target == 0;
    return rest_target >= rest_count * g_min && rest_target <= rest_count * g_max && rest_target % 2 == 0;
  };
  std::set<int> need;
  std::vector<int> photons = sector.n_ex == 0 ? std::vector<int>{0} : std::vector<int>{-1, 0, 1};
  for (int p : photons) {
    const bool molecule_excited = sector.n_ex == 1 && p == 0;
    if (molecule_excited) {
      for (int ve : excited) {
        if (!feasible(N - 1, sector.j - ve)) continue;
        need.insert(ve);
        for (int vg : ground)
          if (N >= 2 && feasible(N - 2, sector.j - ve - vg)) need.insert(vg);
      }
    } else {
      for (int vg : ground)
        if (feasible(N - 1, sector.j - p - vg)) need.insert(vg);
    }
  }
  return {need.begin(), need.end()};
}

}  // namespace detail

/// Complete permutation-symmetric basis of sector (n_ex, j) for N molecules.
///
/// n_ex = 1 states are either one molecule in an odd-v level with the rest in
/// even-v levels and no photon, or all molecules in even-v levels with one
/// photon p = +-1. n_ex = 0 states have all molecules in even-v levels and no
/// photon. Throws when the level table lacks a sector the basis needs.
inline SectorBasis enumerate_sector_basis(int N, int n_ex, int j, const MolecularSpectrum& spec,
                                          const RetentionFilter& retention = {}) {
  if (N < 1) throw Error("enumerate_sector_basis: N must be at least 1");
  if (n_ex != 0 && n_ex != 1) throw Error("enumerate_sector_basis: only n_ex in {0, 1} is supported");
  const Sector sector{n_ex, j};
  for (int v : detail::required_sectors(N, sector, spec.params().n_max, retention))
    if (!spec.has_sector(v)) throw Error("level table lacks vibronic sector v=" + std::to_string(v));

  std::vector<std::size_t> ground, excited;
  std::vector<int> ground_v;
  for (std::size_t l = 0; l < spec.levels().size(); ++l) {
    const auto& lvl = spec.level(l);
    if (!retention.keeps(lvl)) continue;
    if (is_excited_sector(lvl.v)) {
      excited.push_back(l);
    } else {
      ground.push_back(l);
      ground_v.push_back(lvl.v);
    }
  }

  std::vector<OccupationState> states;
  std::vector<std::size_t> current;
  auto collect = [&](int count, int target, int photon, std::optional<std::size_t> extra) {
    detail::multisets(ground, ground_v, 0, count, target, current, [&](const std::vector<std::size_t>& picked) {
      std::vector<std::size_t> all = picked;
      if (extra) all.push_back(*extra);
      states.push_back(detail::make_state(std::move(all), photon));
    });
  };

  if (n_ex == 0) {
    collect(N, j, 0, std::nullopt);
  } else {
    for (int p : {-1, 1}) collect(N, j - p, p, std::nullopt);
    for (std::size_t e : excited) collect(N - 1, j - spec.level(e).v, 0, e);
  }
  return SectorBasis(N, {sector}, std::move(states), retention);
}

/// Union of bases over the same molecule count, re-sorted canonically.
inline SectorBasis union_basis(const SectorBasis& a, const SectorBasis& b) {
  if (a.molecules() != b.molecules()) throw Error("union_basis: molecule counts differ");
  std::vector<Sector> sectors = a.sectors();
  for (const auto& s : b.sectors())
    if (!a.has_sector(s)) sectors.push_back(s);
  std::vector<OccupationState> states = a.states();
  for (const auto& s : b.states())
    if (!a.find(s)) states.push_back(s);
  return SectorBasis(a.molecules(), std::move(sectors), std::move(states), a.retention());
}

/// x -> D_l x: each amplitude scaled by the occupation N_l of its state.
inline CVector apply_diagonal(std::size_t level, const SectorBasis& basis, const CVector& x) {
  if (static_cast<std::size_t>(x.size()) != basis.size()) throw Error("apply_diagonal: vector size mismatch");
  CVector y(x.size());
  for (std::size_t k = 0; k < basis.size(); ++k)
    y[static_cast<Eigen::Index>(k)] = static_cast<double>(basis.state(k).count(level)) * x[static_cast<Eigen::Index>(k)];
  return y;
}

enum class LadderDirection { Minus, Plus };

/// Moves one molecule from level `from` to level `to`; returns the target
/// state and the factor sqrt(N_from (N_to + 1)), or nothing when N_from = 0.
inline std::optional<std::pair<OccupationState, double>> move_molecule(const OccupationState& s, std::size_t to,
                                                                       std::size_t from) {
  const int n_from = s.count(from);
  if (n_from == 0) return std::nullopt;
  if (to == from) return std::pair{s, static_cast<double>(n_from)};
  const int n_to = s.count(to);
  OccupationState t;
  t.photon = s.photon;
  bool placed = false;
  for (auto [l, c] : s.occupations) {
    if (!placed && to < l) {
      t.occupations.push_back({to, 1});
      placed = true;
    }
    if (l == from) --c;
    if (l == to) {
      ++c;
      placed = true;
    }
    if (c > 0) t.occupations.push_back({l, c});
  }
  if (!placed) t.occupations.push_back({to, 1});
  return std::pair{std::move(t), std::sqrt(static_cast<double>(n_from) * (n_to + 1))};
}

struct LadderResult {
  CVector y;
  /// Number of nonzero source amplitudes whose target is outside the basis.
  std::size_t dropped = 0;
};

/// Collective ladder operators on a basis vector.
///
/// Minus: T^-_{j,k} moves a molecule from k to j with sqrt(N_k (N_j + 1)).
/// Plus:  T^+_{j,k} = (T^-_{j,k})^dag moves a molecule from j to k with
///        sqrt(N_j (N_k + 1)).
inline LadderResult apply_ladder(std::size_t j_to, std::size_t k_from, LadderDirection direction,
                                 const SectorBasis& basis, const CVector& x) {
  if (static_cast<std::size_t>(x.size()) != basis.size()) throw Error("apply_ladder: vector size mismatch");
  const std::size_t to = direction == LadderDirection::Minus ? j_to : k_from;
  const std::size_t from = direction == LadderDirection::Minus ? k_from : j_to;
  LadderResult out{CVector::Zero(x.size()), 0};
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const cplx amp = x[static_cast<Eigen::Index>(k)];
    auto moved = move_molecule(basis.state(k), to, from);
    if (!moved) continue;
    auto target = basis.find(moved->first);
    if (!target) {
      if (amp != cplx{}) ++out.dropped;
      continue;
    }
    out.y[static_cast<Eigen::Index>(*target)] += moved->second * amp;
  }
  return out;
}

/// Collective Hamiltonian on a sector basis (or union of sectors):
///
///   H = sum_i lambda_i D_i + omega_c (photon number)
///     + Omega/(2 sqrt N) sum_{i,j} (alpha_ij T^-_ij a+^dag + beta_ij T^-_ij a-^dag + h.c.)
///
/// Only the upper triangle is generated; the conjugate terms follow from
/// Hermitian storage. A generated element whose target is not in the basis
/// is an error unless the target uses a level removed by the retention filter.
inline SparseHermitian assemble_hamiltonian(const SectorBasis& basis, const MolecularSpectrum& spec,
                                            const CavityParams& cavity) {
  cavity.validate();
  if (!cavity.omega_c) throw Error("assemble_hamiltonian: omega_c must be resolved first");
  if (cavity.N != basis.molecules()) throw Error("assemble_hamiltonian: cavity N differs from basis molecule count");
  if (basis.size() == 0) throw Error("assemble_hamiltonian: empty basis");
  const double g = cavity.Omega / (2.0 * std::sqrt(static_cast<double>(cavity.N)));
  const auto& levels = spec.levels();

  // Per excited level: list of (ground, value, photon label created).
  std::vector<std::vector<std::tuple<std::size_t, cplx, int>>> by_excited(levels.size());
  for (const auto& c : spec.couplings().alpha) by_excited.at(c.excited).emplace_back(c.ground, c.value, +1);
  for (const auto& c : spec.couplings().beta) by_excited.at(c.excited).emplace_back(c.ground, c.value, -1);

  std::vector<Triplet> t;
  t.reserve(basis.size() * 8);
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const auto& s = basis.state(k);
    double diag = cavity.omega_c.value() * std::abs(s.photon);
    for (const auto& [l, c] : s.occupations) diag += c * levels[l].energy;
    t.push_back({k, k, diag});
    if (s.photon != 0) continue;
    for (const auto& [l, c] : s.occupations) {
      if (!is_excited_sector(levels[l].v)) continue;
      for (const auto& [ground, value, created] : by_excited[l]) {
        auto moved = move_molecule(s, ground, l);
        moved->first.photon = created;
        auto target = basis.find(moved->first);
        if (!target) {
          const bool truncated = std::any_of(moved->first.occupations.begin(), moved->first.occupations.end(),
                                             [&](const auto& oc) { return !basis.retention().keeps(levels[oc.first]); });
          const Sector ts{excitation_number(moved->first, spec), total_angular_momentum(moved->first, spec)};
          if (truncated && basis.has_sector(ts)) continue;
          throw Error("assemble_hamiltonian: matrix element leaves the basis (target sector n_ex=" +
                      std::to_string(ts.n_ex) + ", j=" + std::to_string(ts.j) + ")");
        }
        // <target| H |k> = g * value * sqrt(N_l (N_ground + 1))
        const cplx el = g * value * moved->second;
        if (*target < k) {
          t.push_back({*target, k, el});
        } else {
          t.push_back({k, *target, std::conj(el)});
        }
      }
    }
  }
  return SparseHermitian::from_upper(basis.size(), std::move(t));
}

/// Occupation string "v:i×count;..." used in basis dumps.
inline std::string occupation_string(const OccupationState& s, const MolecularSpectrum& spec) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [l, c] : s.occupations) {
    if (!first) os << ';';
    first = false;
    os << spec.level(l).v << ':' << spec.level(l).i << "\xC3\x97" << c;
  }
  return os.str();
}

}  // namespace jtpol
