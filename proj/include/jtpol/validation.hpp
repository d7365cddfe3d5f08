#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "jtpol/collective.hpp"
#include "jtpol/config.hpp"
#include "jtpol/dynamics.hpp"
#include "jtpol/eigen_dense.hpp"
#include "jtpol/lanczos.hpp"
#include "jtpol/molecule.hpp"
#include "jtpol/reference.hpp"
#include "jtpol/spectra.hpp"

namespace jtpol {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

inline CheckResult verdict(std::string name, bool ok, std::string detail) {
  return {std::move(name), ok, std::move(detail)};
}

}  // namespace detail

/// Number of single-molecule levels in sector v: c(d) = max(0, n_max - |d|)
/// A states for v = 2d, and c((v-1)/2) + c((v+1)/2) E states for odd v.
inline long sector_level_count(int v, int n_max) {
  auto c = [&](int d) { return static_cast<long>(std::max(0, n_max - std::abs(d))); };
  if (!is_excited_sector(v)) return c(v / 2);
  return c((v - 1) / 2) + c((v + 1) / 2);
}

/// Closed-form size of sector (1, j) for N in {1, 2} under full retention.
inline long closed_form_dimension(int N, int j, int n_max) {
  auto L = [&](int v) { return sector_level_count(v, n_max); };
  const int reach = 2 * n_max + 2;
  auto ground_pairs = [&](int total) {
    long n = 0;
    for (int a = -reach; a <= reach; a += 2) {
      const int b = total - a;
      if (b < a || is_excited_sector(a) || is_excited_sector(b)) continue;
      n += a == b ? L(a) * (L(a) + 1) / 2 : L(a) * L(b);
    }
    return n;
  };
  if (N == 1) {
    return is_excited_sector(j) ? L(j + 1) + L(j - 1) + L(j) : 0;
  }
  if (N != 2) throw Error("closed_form_dimension: N must be 1 or 2");
  long n = 0;
  if (!is_excited_sector(j + 1)) n += ground_pairs(j + 1) + ground_pairs(j - 1);
  for (int ve = -reach - 1; ve <= reach + 1; ++ve)
    if (is_excited_sector(ve) && !is_excited_sector(j - ve)) n += L(ve) * L(j - ve);
  return n;
}

/// Recomputes alpha and beta from the level coefficients and compares them
/// with the stored tables, including that no pair outside the selection
/// rules carries weight.
inline CheckResult check_coupling_table(const MolecularSpectrum& spec) {
  const int n_max = spec.params().n_max;
  const std::size_t slots = static_cast<std::size_t>(n_max) * static_cast<std::size_t>(n_max);
  const auto& levels = spec.levels();
  // Dense per-level amplitude tables indexed by n+ * n_max + n-.
  std::vector<std::vector<cplx>> a_amp(levels.size()), ep_amp(levels.size()), em_amp(levels.size());
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const auto& basis = spec.sector_basis(levels[l].v);
    for (std::size_t b = 0; b < basis.size(); ++b) {
      auto& table = basis[b].s == Electronic::A ? a_amp[l] : basis[b].s == Electronic::EPlus ? ep_amp[l] : em_amp[l];
      if (table.empty()) table.assign(slots, cplx{});
      table[static_cast<std::size_t>(basis[b].n_plus * n_max + basis[b].n_minus)] = levels[l].coeffs[b];
    }
  }
  auto overlap = [&](std::size_t i, const std::vector<cplx>& e) {
    cplx s{};
    if (a_amp[i].empty() || e.empty()) return s;
    for (std::size_t k = 0; k < slots; ++k) s += std::conj(a_amp[i][k]) * e[k];
    return s;
  };

  double worst = 0.0;
  long forbidden = 0, missing = 0;
  auto scan = [&](const std::vector<CouplingEntry>& table, const std::vector<std::vector<cplx>>& partner, int offset) {
    std::map<std::pair<std::size_t, std::size_t>, cplx> stored;
    for (const auto& e : table) {
      stored[{e.ground, e.excited}] = e.value;
      if (levels[e.ground].v != levels[e.excited].v + offset || is_excited_sector(levels[e.ground].v) ||
          !is_excited_sector(levels[e.excited].v))
        ++forbidden;
    }
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (is_excited_sector(levels[i].v)) continue;
      for (std::size_t j = 0; j < levels.size(); ++j) {
        if (!is_excited_sector(levels[j].v)) continue;
        const cplx ref = overlap(i, partner[j]);
        const bool allowed = levels[i].v == levels[j].v + offset;
        if (!allowed) {
          if (std::abs(ref) > 1e-14) ++forbidden;
          continue;
        }
        auto it = stored.find({i, j});
        const cplx got = it == stored.end() ? cplx{} : it->second;
        if (it == stored.end() && std::abs(ref) > 1e-14) ++missing;
        worst = std::max(worst, std::abs(got - ref));
      }
    }
  };
  scan(spec.couplings().alpha, ep_amp, -1);
  scan(spec.couplings().beta, em_amp, +1);
  const bool ok = worst <= 1e-12 && forbidden == 0 && missing == 0;
  return detail::verdict("coupling tables obey selection rules and match overlaps", ok,
                         "max deviation " + detail::sci(worst) + ", forbidden " + std::to_string(forbidden) +
                             ", missing " + std::to_string(missing));
}

inline CheckResult check_block_dimensions(const ModelParams& params) {
  std::size_t total = 0;
  for (int v : representable_sectors(params.n_max)) total += build_sector_block(v, params).states.size();
  const std::size_t expect = 3 * static_cast<std::size_t>(params.n_max) * static_cast<std::size_t>(params.n_max);
  return detail::verdict("sector blocks partition the molecular basis", total == expect,
                         std::to_string(total) + " states, expected " + std::to_string(expect));
}

inline CheckResult check_sector_mirror(const MolecularSpectrum& spec) {
  double worst = 0.0;
  bool shapes = true;
  for (int v : spec.sectors()) {
    if (v <= 0 || !spec.has_sector(-v)) continue;
    const auto [b1, e1] = spec.sector_range(v);
    const auto [b2, e2] = spec.sector_range(-v);
    if (e1 - b1 != e2 - b2) {
      shapes = false;
      continue;
    }
    for (std::size_t k = 0; k < e1 - b1; ++k)
      worst = std::max(worst, std::abs(spec.level(b1 + k).energy - spec.level(b2 + k).energy));
  }
  return detail::verdict("sector v and -v spectra coincide", shapes && worst <= 1e-10,
                         "max deviation " + detail::sci(worst) + " eV");
}

inline CheckResult check_level_normalization(const MolecularSpectrum& spec) {
  double worst = 0.0;
  for (const auto& l : spec.levels()) {
    double s = 0.0;
    for (auto c : l.coeffs) s += std::norm(c);
    worst = std::max(worst, std::abs(std::sqrt(s) - 1.0));
  }
  return detail::verdict("vibronic levels are normalized", worst <= 1e-10, "max deviation " + detail::sci(worst));
}

inline CheckResult check_sector_dimensions(const MolecularSpectrum& spec) {
  const int n_max = spec.params().n_max;
  const auto d1 = enumerate_sector_basis(1, 1, -1, spec).size();
  const auto d2 = enumerate_sector_basis(2, 1, -1, spec).size();
  const long e1 = closed_form_dimension(1, -1, n_max), e2 = closed_form_dimension(2, -1, n_max);
  const bool ok = static_cast<long>(d1) == e1 && static_cast<long>(d2) == e2;
  return detail::verdict("sector (1,-1) sizes match the closed-form count", ok,
                         "N=1 " + std::to_string(d1) + "/" + std::to_string(e1) + ", N=2 " + std::to_string(d2) + "/" +
                             std::to_string(e2));
}

/// Commutators of the primitive-basis Hamiltonian with N_ex and J.
inline CheckResult check_conservation(const ModelParams& params, const CavityParams& cavity) {
  ModelParams small = params;
  small.n_max = std::min(params.n_max, 5);
  const auto model = reference::build_primitive_model(small, *cavity.omega_c, cavity.Omega, 1);
  const double cn = reference::relative_commutator(model.hamiltonian, reference::excitation_diagonal(model));
  const double cj = reference::relative_commutator(model.hamiltonian, reference::angular_momentum_diagonal(model));
  return detail::verdict("H commutes with N_ex and J (primitive basis)", cn <= 1e-10 && cj <= 1e-10,
                         "n_max " + std::to_string(small.n_max) + ", [H,N_ex] " + detail::sci(cn) + ", [H,J] " +
                             detail::sci(cj));
}

inline CheckResult check_primitive_equivalence(const ModelParams& params, const CavityParams& cavity) {
  ModelParams small = params;
  small.n_max = std::min(params.n_max, 5);
  const auto spec = diagonalize_molecule(small);
  CavityParams cav = cavity;
  cav.N = 1;
  const auto basis = enumerate_sector_basis(1, 1, -1, spec);
  const auto a = eig_dense(assemble_hamiltonian(basis, spec, cav), false);
  const auto model = reference::build_primitive_model(small, *cav.omega_c, cav.Omega, 1, Sector{1, -1});
  const auto b = eig_dense(model.hamiltonian, false);
  double worst = a.size() == b.size() ? 0.0 : INFINITY;
  for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k)
    worst = std::max(worst, std::abs(a.values[k] - b.values[k]));
  return detail::verdict("N=1 occupation basis matches the primitive basis", worst <= 1e-9,
                         "max deviation " + detail::sci(worst) + " eV");
}

/// kappa = 0 and omega_c = epsilon: the bright state sees a two-level
/// problem with sticks at epsilon -+ Omega/2 of weight 1/2.
inline CheckResult check_tavis_cummings(const ModelParams& params, double coupling_ratio) {
  ModelParams p = params;
  p.kappa = 0.0;
  p.n_max = std::min(params.n_max, 6);
  const auto spec = diagonalize_molecule(p);
  double worst = 0.0;
  for (int N : {1, 2}) {
    CavityParams cav;
    cav.omega_c = p.epsilon;
    cav.Omega = 2.0 * coupling_ratio * p.epsilon;
    cav.N = N;
    const auto basis = enumerate_sector_basis(N, 1, -1, spec);
    const auto h = assemble_hamiltonian(basis, spec, cav);
    auto m = lanczos_spectral_measure(h, bright_state(basis, spec), std::min<std::size_t>(8, h.dim()));
    std::vector<Stick> sticks;
    for (auto s : stick_spectrum(m))
      if (s.intensity > 1e-12) sticks.push_back(s);
    if (sticks.size() != 2) return detail::verdict("kappa=0 bright doublet", false, "N=" + std::to_string(N) + ": " +
                                                                                      std::to_string(sticks.size()) + " sticks");
    worst = std::max({worst, std::abs(sticks[1].energy - sticks[0].energy - cav.Omega),
                      std::abs(sticks[0].intensity - 0.5), std::abs(sticks[1].intensity - 0.5)});
  }
  return detail::verdict("kappa=0 bright doublet splits by Omega", worst <= 1e-9, "max deviation " + detail::sci(worst));
}

struct SpectrumChecks {
  CheckResult pr_bound;
  CheckResult completeness;
  CheckResult lanczos;
  CheckResult mirror;
};

/// N = 1 dense eigensystem checks at the given parameters.
inline SpectrumChecks check_single_molecule_spectrum(const MolecularSpectrum& spec, const CavityParams& cavity) {
  CavityParams cav = cavity;
  cav.N = 1;
  const auto basis = enumerate_sector_basis(1, 1, -1, spec);
  const auto h = assemble_hamiltonian(basis, spec, cav);
  const auto eig = eig_dense(h, true);
  const auto records = polariton_records(eig, basis, spec);
  double max_pr = 0.0, sum = 0.0;
  for (const auto& r : records) {
    max_pr = std::max(max_pr, r.pr);
    sum += r.intensity;
  }
  SpectrumChecks out;
  out.pr_bound = detail::verdict("N=1 participation ratio <= 3", max_pr <= 3.0 + 1e-9, "max PR " + std::to_string(max_pr));
  out.completeness = detail::verdict("stick intensities sum to 1", std::abs(sum - 1.0) <= 1e-10,
                                     "deviation " + detail::sci(sum - 1.0));

  const auto measure = lanczos_spectral_measure(h, bright_state(basis, spec), h.dim());
  const auto dense = stick_spectrum(eig, bright_index(basis, spec));
  double de = 0.0, dw = 0.0;
  // Every Lanczos stick must sit on a dense level with the same weight.
  std::vector<double> matched(dense.size(), 0.0);
  for (const auto s : stick_spectrum(measure)) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < dense.size(); ++k)
      if (std::abs(dense[k].energy - s.energy) < std::abs(dense[best].energy - s.energy)) best = k;
    matched[best] += s.intensity;
    if (s.intensity > 1e-10) de = std::max(de, std::abs(dense[best].energy - s.energy));
  }
  for (std::size_t k = 0; k < dense.size(); ++k) dw = std::max(dw, std::abs(matched[k] - dense[k].intensity));
  out.lanczos = detail::verdict("Lanczos measure reproduces dense sticks", de <= 1e-8 && dw <= 1e-8,
                                "position " + detail::sci(de) + " eV, weight " + detail::sci(dw));

  const auto basis_l = enumerate_sector_basis(1, 1, 1, spec);
  const auto eig_l = eig_dense(assemble_hamiltonian(basis_l, spec, cav), true);
  double me = eig_l.size() == eig.size() ? 0.0 : INFINITY, mp = 0.0;
  for (std::size_t k = 0; k < std::min(eig.size(), eig_l.size()); ++k) me = std::max(me, std::abs(eig.values[k] - eig_l.values[k]));
  // Polarization sums over degenerate clusters are basis independent.
  const auto records_l = polariton_records(eig_l, basis_l, spec);
  for (std::size_t k = 0; k < std::min(records.size(), records_l.size());) {
    std::size_t e = k + 1;
    while (e < records.size() && records[e].energy - records[k].energy < 1e-8) ++e;
    double a = 0.0, b = 0.0;
    for (std::size_t q = k; q < e; ++q) {
      a += records[q].polarization;
      b += records_l[q].polarization;
    }
    mp = std::max(mp, std::abs(a + b));
    k = e;
  }
  out.mirror = detail::verdict("(1,+1) mirrors (1,-1)", me <= 1e-10 && mp <= 1e-8,
                               "energy " + detail::sci(me) + " eV, polarization " + detail::sci(mp));
  return out;
}

struct DynamicsChecks {
  CheckResult mirror;
  CheckResult norm;
  CheckResult leakage;
};

inline DynamicsChecks check_single_molecule_dynamics(const MolecularSpectrum& spec, const CavityParams& cavity,
                                                     const PulseSpec& pulse, const PropagationOptions& options) {
  CavityParams cav = cavity;
  cav.N = 1;
  DynamicsChecks out;
  std::vector<TimeSeries> traces;
  double drift = 0.0;
  for (auto pol : {CircularPolarization::RCP, CircularPolarization::LCP}) {
    PulseSpec p = pulse;
    p.polarization = pol;
    const auto basis = extended_basis(1, pol, spec);
    const auto h0 = assemble_hamiltonian(basis, spec, cav);
    const auto traj = propagate_pulse(h0, basis, spec, p, options);
    for (double n : traj.norms) drift = std::max(drift, std::abs(n - 1.0));
    traces.push_back(normalized_polarization(traj));
  }
  double mirror = 0.0;
  for (std::size_t k = 0; k < traces[0].values.size(); ++k)
    mirror = std::max(mirror, std::abs(traces[0].values[k] + traces[1].values[k]));
  out.mirror = detail::verdict("RCP and LCP normalized polarizations mirror", mirror <= 1e-8,
                               "max |P_R + P_L| " + detail::sci(mirror));
  out.norm = detail::verdict("propagation conserves the norm", drift <= 1e-7, "max drift " + detail::sci(drift));

  // Field-free run from an equal mix of ground and bright state.
  const auto basis = extended_basis(1, CircularPolarization::RCP, spec);
  const auto h0 = assemble_hamiltonian(basis, spec, cav);
  CVector psi0 = CVector::Zero(static_cast<Eigen::Index>(basis.size()));
  psi0[static_cast<Eigen::Index>(ground_state_index(basis, spec))] = std::sqrt(0.5);
  OccupationState b;
  b.occupations = {{spec.ground_level(), 1}};
  b.photon = -1;
  psi0[static_cast<Eigen::Index>(*basis.find(b))] = std::sqrt(0.5);
  PropagationOptions free = options;
  free.t_end = std::min(options.t_end, 50.0);
  const auto traj = propagate_free(h0, basis, spec, psi0, free);
  double leak = 0.0;
  for (double p : traj.excited_population) leak = std::max(leak, std::abs(p - 0.5));
  out.leakage = detail::verdict("field-free propagation keeps sector populations", leak <= 1e-12,
                                "max change " + detail::sci(leak));
  return out;
}

inline CheckResult check_brightest_transition(const MolecularSpectrum& spec) {
  const double e = brightest_transition(spec);
  return detail::verdict("brightest bare transition near 6.85 eV", std::abs(e - 6.85) <= 0.05,
                         std::to_string(e) + " eV");
}

/// Runs the suite for `config`, printing one line per check.
/// Returns true when every check passed.
inline bool run_validation_suite(const RunConfig& config, std::ostream& out) {
  bool all = true;
  auto report = [&](const CheckResult& r) {
    out << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << " (" << r.detail << ")\n";
    out.flush();
    all = all && r.passed;
  };
  auto guarded = [&](const std::string& name, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      report({name, false, std::string("exception: ") + e.what()});
    }
  };

  const auto spec = diagonalize_molecule(config.model);
  const auto cavity = config.resolved_cavity(spec);
  report(check_block_dimensions(config.model));
  report(check_level_normalization(spec));
  report(check_sector_mirror(spec));
  report(check_coupling_table(spec));
  guarded("sector dimensions", [&] { report(check_sector_dimensions(spec)); });
  guarded("conservation", [&] { report(check_conservation(config.model, cavity)); });
  guarded("primitive equivalence", [&] { report(check_primitive_equivalence(config.model, cavity)); });
  guarded("Tavis-Cummings limit", [&] { report(check_tavis_cummings(config.model, config.coupling_ratio)); });
  guarded("single-molecule spectrum", [&] {
    const auto s = check_single_molecule_spectrum(spec, cavity);
    for (const auto& r : {s.pr_bound, s.completeness, s.lanczos, s.mirror}) report(r);
  });
  guarded("single-molecule dynamics", [&] {
    const auto d = check_single_molecule_dynamics(spec, cavity, config.dynamics.pulse, config.dynamics.propagation);
    for (const auto& r : {d.mirror, d.norm, d.leakage}) report(r);
  });
  if (config.model == ModelParams{}) report(check_brightest_transition(spec));
  return all;
}

}  // namespace jtpol
