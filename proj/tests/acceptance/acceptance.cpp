// Acceptance run: one line per criterion at the default model parameters.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>

#include "jtpol/jtpol.hpp"
#include "oracles/oracles.hpp"

using namespace jtpol;

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, const std::function<Outcome()>& body, double budget_s = INFINITY) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o{false, ""};
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  char timing[64];
  std::snprintf(timing, sizeof timing, "%.2f s", s);
  if (s > budget_s) {
    o.passed = false;
    o.detail += "; over the " + std::to_string(static_cast<int>(budget_s)) + " s budget";
  }
  if (!o.passed) ++failures;
  std::cout << (o.passed ? "[PASS] " : "[FAIL] ") << name << " (" << o.detail << "; " << timing << ")" << std::endl;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

Outcome from(const CheckResult& r) { return {r.passed, r.detail}; }

}  // namespace

int main() {
  const RunConfig config;
  const auto spec = diagonalize_molecule(config.model);
  const auto cavity = config.resolved_cavity(spec);
  std::cout << "model: n_max " << config.model.n_max << ", omega_c " << *cavity.omega_c << " eV, Omega "
            << cavity.Omega << " eV" << std::endl;

  criterion("sector dimension N=1 is 70", [&]() -> Outcome {
    const auto n = enumerate_sector_basis(1, 1, -1, spec).size();
    return {n == 70, "dim " + std::to_string(n)};
  }, 1.0);

  criterion("sector dimension N=2 is 11664 = 7770 + 1938 + 1956", [&]() -> Outcome {
    const auto basis = enumerate_sector_basis(2, 1, -1, spec);
    long by_photon[3] = {0, 0, 0};
    for (const auto& s : basis.states()) ++by_photon[s.photon + 1];
    const auto o = oracle::sector_count(2, -1, config.model.n_max);
    const bool ok = basis.size() == 11664 && by_photon[1] == 7770 && by_photon[2] == 1938 && by_photon[0] == 1956 &&
                    o.excited_p0 == 7770 && o.ground_lcp == 1938 && o.ground_rcp == 1956;
    return {ok, "dim " + std::to_string(basis.size()) + " = " + std::to_string(by_photon[1]) + " + " +
                    std::to_string(by_photon[2]) + " + " + std::to_string(by_photon[0])};
  }, 10.0);

  criterion("H commutes with N_ex and J", [&] { return from(check_conservation(config.model, cavity)); }, 30.0);

  criterion("kappa=0 Tavis-Cummings doublet", [&] {
    return from(check_tavis_cummings(config.model, config.coupling_ratio));
  });

  criterion("brightest bare transition 6.85 +- 0.05 eV", [&] { return from(check_brightest_transition(spec)); });

  criterion("N=1 participation ratio <= 3", [&] { return from(check_single_molecule_spectrum(spec, cavity).pr_bound); });

  criterion("N=2 maximum participation ratio >= 10", [&]() -> Outcome {
    CavityParams c = cavity;
    c.N = 2;
    const auto basis = enumerate_sector_basis(2, 1, -1, spec);
    DenseOptions opt;
    opt.window = config.effective_window(2);
    const auto eig = eig_dense(assemble_hamiltonian(basis, spec, c), true, opt);
    double max_pr = 0.0;
    for (const auto& r : polariton_records(eig, basis, spec)) max_pr = std::max(max_pr, r.pr);
    return {max_pr >= 10.0, "max PR " + fmt(max_pr) + " over " + std::to_string(eig.size()) + " states in " +
                                fmt(opt.window->first) + ".." + fmt(opt.window->second) + " eV"};
  }, 1800.0);

  criterion("occupation basis matches primitive products", [&]() -> Outcome {
    const auto n1 = check_primitive_equivalence(config.model, cavity);
    ModelParams small = config.model;
    small.n_max = 4;
    const auto s4 = diagonalize_molecule(small);
    CavityParams c = cavity;
    c.N = 2;
    const auto a = eig_dense(assemble_hamiltonian(enumerate_sector_basis(2, 1, -1, s4), s4, c), false);
    const auto b = eig_dense(reference::build_primitive_model(small, *c.omega_c, c.Omega, 2, Sector{1, -1}).hamiltonian,
                             false);
    double worst = 0.0;
    for (double e : a.values) {
      const auto it = std::lower_bound(b.values.begin(), b.values.end(), e);
      double d = INFINITY;
      if (it != b.values.end()) d = std::abs(*it - e);
      if (it != b.values.begin()) d = std::min(d, std::abs(*std::prev(it) - e));
      worst = std::max(worst, d);
    }
    return {n1.passed && worst <= 1e-9, "N=1 " + n1.detail + "; N=2 subset max deviation " + fmt(worst) + " eV"};
  });

  criterion("Lanczos and autocorrelation reproduce dense sticks", [&]() -> Outcome {
    const auto lz = check_single_molecule_spectrum(spec, cavity).lanczos;
    CavityParams c = cavity;
    c.N = 1;
    const auto basis = enumerate_sector_basis(1, 1, -1, spec);
    const auto h = assemble_hamiltonian(basis, spec, c);
    const auto sticks = stick_spectrum(eig_dense(h, true), bright_index(basis, spec));
    PropagationOptions opt;
    opt.t_end = 500.0;
    const auto traj = propagate_free(h, basis, spec, bright_state(basis, spec), opt);
    const auto grid = energy_grid(6.2, 7.8, 0.0005);
    const auto peaks = find_peaks(grid, autocorrelation_spectrum(traj, 100.0, grid), 0.05);
    const double res = transform_resolution(traj);
    double worst = peaks.empty() ? INFINITY : 0.0;
    for (double e : peaks) {
      double best = INFINITY;
      for (const auto& s : sticks)
        if (s.intensity > 1e-4) best = std::min(best, std::abs(s.energy - e));
      worst = std::max(worst, best);
    }
    return {lz.passed && worst <= 2.0 * res, lz.detail + "; " + std::to_string(peaks.size()) +
                                                 " transform peaks, max offset " + fmt(worst) + " eV vs 2x resolution " +
                                                 fmt(2.0 * res) + " eV"};
  });

  double n1_average = NAN;
  criterion("RCP/LCP mirror, weak-field scaling, norm drift", [&]() -> Outcome {
    CavityParams c = cavity;
    c.N = 1;
    const auto& prop = config.dynamics.propagation;
    auto run = [&](CircularPolarization pol, double e0, double* drift) {
      PulseSpec p = config.dynamics.pulse;
      p.polarization = pol;
      p.e0_mu = e0;
      const auto basis = extended_basis(1, pol, spec);
      const auto traj = propagate_pulse(assemble_hamiltonian(basis, spec, c), basis, spec, p, prop);
      for (double n : traj.norms) *drift = std::max(*drift, std::abs(n - 1.0));
      return normalized_polarization(traj);
    };
    double drift = 0.0;
    const double e0 = config.dynamics.pulse.e0_mu;
    const auto r = run(CircularPolarization::RCP, e0, &drift);
    const auto l = run(CircularPolarization::LCP, e0, &drift);
    const auto half = run(CircularPolarization::RCP, 0.5 * e0, &drift);
    double mirror = 0.0, change = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < r.values.size(); ++k) {
      mirror = std::max(mirror, std::abs(r.values[k] + l.values[k]));
      change = std::max(change, std::abs(r.values[k] - half.values[k]));
      scale = std::max(scale, std::abs(r.values[k]));
    }
    n1_average = time_averaged_magnitude(r);
    const double rel = change / scale;
    return {mirror <= 1e-8 && rel < 0.01 && drift <= 1e-7,
            "mirror " + fmt(mirror) + ", half-amplitude change " + fmt(rel) + " of peak, drift " + fmt(drift)};
  });

  criterion("N=2 polarization suppressed relative to N=1", [&]() -> Outcome {
    CavityParams c = cavity;
    c.N = 2;
    PulseSpec p = config.dynamics.pulse;
    p.polarization = CircularPolarization::RCP;
    const auto basis = extended_basis(2, p.polarization, spec);
    const auto traj =
        propagate_pulse(assemble_hamiltonian(basis, spec, c), basis, spec, p, config.dynamics.propagation);
    const double n2 = time_averaged_magnitude(normalized_polarization(traj));
    return {std::isfinite(n1_average) && n2 < n1_average,
            "<|P|> N=1 " + fmt(n1_average) + ", N=2 " + fmt(n2)};
  });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
