#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <string>

#include "jtpol/collective.hpp"
#include "jtpol/config.hpp"
#include "jtpol/dynamics.hpp"
#include "jtpol/eigen_dense.hpp"
#include "jtpol/io.hpp"
#include "jtpol/lanczos.hpp"
#include "jtpol/molecule.hpp"
#include "jtpol/spectra.hpp"
#include "jtpol/validation.hpp"

namespace jtpol::app {

enum ExitCode : int {
  kOk = 0,
  kValidationFailed = 1,
  kConfigError = 2,
  kDenseLimit = 3,
  kPropagationAbort = 4,
};

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline void describe_config(io::RunOutput& out, const RunConfig& config, const CavityParams& cavity) {
  auto& m = out.manifest();
  m["config"] = serialize_config(config);
  m["resolved"] = {{"omega_c_eV", *cavity.omega_c}, {"Omega_eV", cavity.Omega}, {"N", cavity.N}};
}

inline std::pair<int, int> basis_v_range(const SectorBasis& basis, const MolecularSpectrum& spec) {
  int lo = 0, hi = 0;
  bool first = true;
  for (const auto& s : basis.states())
    for (const auto& [l, c] : s.occupations) {
      const int v = spec.level(l).v;
      lo = first ? v : std::min(lo, v);
      hi = first ? v : std::max(hi, v);
      first = false;
    }
  return {lo, hi};
}

}  // namespace detail

/// Level table and bare absorption sticks of one molecule.
inline int run_vibronic(const RunConfig& config, std::ostream& log) {
  detail::Stopwatch clock;
  const auto spec = diagonalize_molecule(config.model);
  const auto sticks = bare_absorption_sticks(spec);
  const auto [rb, re] = spec.sector_range(-1);
  double total = 0.0;
  for (std::size_t k = rb; k < re; ++k) total += std::norm(spec.level(k).bright_amplitude_rcp);

  io::RunOutput out(config.output_dir, "vibronic");
  io::CsvTable levels({"v", "i", "energy_eV", "bright_intensity"});
  for (std::size_t k = 0; k < spec.levels().size(); ++k) {
    const auto& l = spec.level(k);
    const double w = l.v == -1 ? std::norm(l.bright_amplitude_rcp) / total : 0.0;
    levels.add_row({static_cast<long>(l.v), static_cast<long>(l.i), l.energy, w});
  }
  io::CsvTable bare({"energy_eV", "intensity"});
  for (const auto& s : sticks) bare.add_row({s.energy, s.intensity});
  out.write("levels.csv", levels);
  out.write("bare_sticks.csv", bare);

  const double brightest = brightest_transition(spec);
  out.manifest()["config"] = serialize_config(config);
  out.manifest()["levels"] = spec.levels().size();
  out.manifest()["sectors"] = spec.sectors().size();
  out.manifest()["brightest_transition_eV"] = brightest;
  out.manifest()["timings_s"] = {{"total", clock.seconds()}};
  out.finish();
  log << "vibronic: " << spec.levels().size() << " levels, brightest transition " << brightest << " eV\n";
  return kOk;
}

/// Polariton sticks, broadened curve, per-state records, heatmap and basis dump.
inline int run_spectrum(const RunConfig& config, std::ostream& log) {
  detail::Stopwatch clock;
  const auto spec = diagonalize_molecule(config.model);
  const auto cavity = [&] {
    CavityParams c = config.resolved_cavity(spec);
    c.N = config.cavity.N;
    return c;
  }();
  const double t_levels = clock.seconds();
  const auto basis = enumerate_sector_basis(cavity.N, config.sector.n_ex, config.sector.j, spec, config.retention);
  const auto h = assemble_hamiltonian(basis, spec, cavity);
  const double t_assemble = clock.seconds();
  log << "spectrum: N=" << cavity.N << " sector (" << config.sector.n_ex << "," << config.sector.j
      << ") dimension " << basis.size() << ", omega_c " << *cavity.omega_c << " eV\n";

  EigenResult eig;
  std::string method;
  if (config.spectrum.method == SpectrumMethod::Dense) {
    method = "dense";
    DenseOptions opt;
    opt.dense_limit = config.spectrum.dense_limit;
    opt.window = config.effective_window(cavity.N);
    eig = eig_dense(h, true, opt);
  } else {
    method = "lanczos";
    LanczosOptions opt;
    opt.ritz_vectors = true;
    const auto m = std::min(config.spectrum.lanczos_iterations, h.dim());
    auto measure = lanczos_spectral_measure(h, bright_state(basis, spec), m, opt);
    eig.values = std::move(measure.energies);
    eig.vectors = std::move(measure.ritz_vectors);
  }
  const double t_solve = clock.seconds();

  const auto records = polariton_records(eig, basis, spec);
  std::vector<Stick> sticks;
  for (const auto& r : records) sticks.push_back({r.energy, r.intensity});

  io::RunOutput out(config.output_dir, "spectrum");
  io::CsvTable stick_table({"energy_eV", "intensity"});
  io::CsvTable record_table({"energy_eV", "intensity", "pr", "polarization"});
  double max_pr = 0.0, total = 0.0;
  for (const auto& r : records) {
    stick_table.add_row({r.energy, r.intensity});
    record_table.add_row({r.energy, r.intensity, r.pr, r.polarization});
    max_pr = std::max(max_pr, r.pr);
    total += r.intensity;
  }
  out.write("sticks.csv", stick_table);
  out.write("records.csv", record_table);

  std::pair<double, double> grid_range;
  if (config.spectrum.grid) {
    grid_range = *config.spectrum.grid;
  } else if (!sticks.empty()) {
    const double step = config.spectrum.grid_step;
    const auto [lo, hi] = std::minmax_element(sticks.begin(), sticks.end(),
                                              [](const Stick& a, const Stick& b) { return a.energy < b.energy; });
    grid_range = {std::floor((lo->energy - 0.2) / step) * step, std::ceil((hi->energy + 0.2) / step) * step};
  }
  io::CsvTable curve_table({"energy_eV", "absorbance"});
  if (!sticks.empty()) {
    const auto grid = energy_grid(grid_range.first, grid_range.second, config.spectrum.grid_step);
    const auto curve = broaden(sticks, config.spectrum.fwhm, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) curve_table.add_row({grid[k], curve[k]});
  }
  out.write("broadened.csv", curve_table);

  const auto [v_lo, v_hi] = detail::basis_v_range(basis, spec);
  const auto heat = heatmap_table(records, v_lo, v_hi);
  io::CsvTable heat_table({"state_index", "v", "probability"});
  for (std::size_t k = 0; k < heat.rows.size(); ++k)
    for (std::size_t c = 0; c < heat.v_values.size(); ++c)
      heat_table.add_row({static_cast<long>(k), static_cast<long>(heat.v_values[c]), heat.rows[k][c]});
  out.write("heatmap.csv", heat_table);

  io::CsvTable basis_table({"index", "photon", "occupation"});
  for (std::size_t k = 0; k < basis.size(); ++k)
    basis_table.add_row(
        {static_cast<long>(k), static_cast<long>(basis.state(k).photon), occupation_string(basis.state(k), spec)});
  out.write("basis.csv", basis_table);

  detail::describe_config(out, config, cavity);
  auto& m = out.manifest();
  m["method"] = method;
  m["dimension"] = basis.size();
  m["states_reported"] = records.size();
  m["intensity_reported"] = total;
  m["max_pr"] = max_pr;
  if (auto w = config.effective_window(cavity.N); w && method == "dense") m["window_eV"] = {w->first, w->second};
  m["timings_s"] = {{"levels", t_levels},
                    {"assemble", t_assemble - t_levels},
                    {"solve", t_solve - t_assemble},
                    {"total", clock.seconds()}};
  out.finish();
  log << "spectrum: " << records.size() << " states (" << method << "), reported intensity " << total << ", max PR "
      << max_pr << "\n";
  return kOk;
}

/// Pulse-driven trajectories for every requested (N, polarization).
inline int run_dynamics(const RunConfig& config, std::ostream& log) {
  detail::Stopwatch clock;
  const auto spec = diagonalize_molecule(config.model);
  io::RunOutput out(config.output_dir, "dynamics");
  out.manifest()["config"] = serialize_config(config);
  auto& runs = out.manifest()["trajectories"] = nlohmann::json::array();

  for (int N : config.dynamics.molecules) {
    CavityParams cavity = config.resolved_cavity(spec);
    cavity.N = N;
    for (auto pol : config.dynamics.polarizations) {
      const double start = clock.seconds();
      PulseSpec pulse = config.dynamics.pulse;
      pulse.polarization = pol;
      const auto basis = extended_basis(N, pol, spec, config.retention);
      const auto h0 = assemble_hamiltonian(basis, spec, cavity);
      const auto traj = propagate_pulse(h0, basis, spec, pulse, config.dynamics.propagation);

      const double pop = excited_population_after_pulse(traj);
      const bool excited = pop > 1e-12;
      io::CsvTable table(
          {"t_fs", "polarization", "polarization_normalized", "excited_population", "reautocorr", "imautocorr"});
      double drift = 0.0;
      TimeSeries normalized;
      for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const bool after = traj.times[k] >= pulse.tau - 1e-9;
        io::Cell norm_cell = std::string();
        if (after) {
          const double value = excited ? traj.polarization[k] / pop : 0.0;
          norm_cell = value;
          normalized.times.push_back(traj.times[k]);
          normalized.values.push_back(value);
        }
        table.add_row({traj.times[k], traj.polarization[k], norm_cell, traj.excited_population[k],
                       traj.autocorrelation[k].real(), traj.autocorrelation[k].imag()});
        drift = std::max(drift, std::abs(traj.norms[k] - 1.0));
      }
      const std::string name = "trajectory_N" + std::to_string(N) + "_" + to_string(pol) + ".csv";
      out.write(name, table);
      const double avg = time_averaged_magnitude(normalized);
      runs.push_back({{"file", name},
                      {"N", N},
                      {"polarization", to_string(pol)},
                      {"omega_c_eV", *cavity.omega_c},
                      {"Omega_eV", cavity.Omega},
                      {"dimension", basis.size()},
                      {"excited_population", pop},
                      {"mean_abs_normalized_polarization", avg},
                      {"max_norm_drift", drift},
                      {"seconds", clock.seconds() - start}});
      if (!excited) log << "dynamics: warning: no excitation for N=" << N << " " << to_string(pol) << "\n";
      log << "dynamics: N=" << N << " " << to_string(pol) << " dimension " << basis.size() << ", excited population "
          << pop << ", <|P|/pop> " << avg << "\n";
    }
  }
  out.manifest()["timings_s"] = {{"total", clock.seconds()}};
  out.finish();
  return kOk;
}

inline int run_validate(const RunConfig& config, std::ostream& log) {
  return run_validation_suite(config, log) ? kOk : kValidationFailed;
}

/// Maps library errors onto exit codes, reporting them on `err`.
template <class F>
int guarded_run(F&& body, std::ostream& err) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error" << (e.key().empty() ? "" : " [" + e.key() + "]") << ": " << e.what() << "\n";
    return kConfigError;
  } catch (const DenseLimitError& e) {
    err << e.what() << "\n";
    return kDenseLimit;
  } catch (const PropagationError& e) {
    err << "propagation aborted at step " << e.step() << ": " << e.what() << "\n";
    return kPropagationAbort;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kValidationFailed;
  }
}

}  // namespace jtpol::app
