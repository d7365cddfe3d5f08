#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "jtpol/collective.hpp"
#include "jtpol/core.hpp"
#include "jtpol/krylov.hpp"
#include "jtpol/molecule.hpp"
#include "jtpol/sparse_hermitian.hpp"
#include "jtpol/spectra.hpp"

namespace jtpol {

enum class CircularPolarization { LCP, RCP };

inline const char* to_string(CircularPolarization p) { return p == CircularPolarization::LCP ? "LCP" : "RCP"; }

/// Photon label driven by a polarization: LCP -> +1, RCP -> -1.
constexpr int photon_label(CircularPolarization p) noexcept { return p == CircularPolarization::LCP ? 1 : -1; }

/// Sector (1, j) reached from the ground sector by one photon of polarization p.
constexpr Sector target_sector(CircularPolarization p) noexcept { return {1, photon_label(p)}; }

enum class Axis { X, Y };

/// Circularly polarized pulse. e0_mu is the dipole-field product mu01*E0 in eV.
struct PulseSpec {
  double e0_mu = 1e-3;
  double omega_l = 7.24;
  double tau = 20.0;
  CircularPolarization polarization = CircularPolarization::RCP;

  void validate() const {
    if (!(tau > 0.0)) throw Error("PulseSpec: tau must be positive");
    if (!(omega_l > 0.0)) throw Error("PulseSpec: omega_l must be positive");
    if (!(e0_mu >= 0.0)) throw Error("PulseSpec: e0_mu must be non-negative");
  }

  /// Carrier phase phi_u: LCP (0, pi/2), RCP (pi/2, 0).
  double phase(Axis u) const noexcept {
    const bool lcp = polarization == CircularPolarization::LCP;
    return (u == Axis::X) == lcp ? 0.0 : 0.5 * kPi;
  }

  bool operator==(const PulseSpec&) const = default;
};

/// A_u(t) = (d0 / w) S(t) sin(w t - phi_u), w = omega_l / hbar, with the
/// sin^2(pi t / tau) envelope switched on only for 0 <= t <= tau.
inline double vector_potential(double t, const PulseSpec& spec, Axis u) {
  if (t < 0.0 || t > spec.tau) return 0.0;
  const double w = spec.omega_l / kHbar;
  const double s = std::sin(kPi * t / spec.tau);
  return spec.e0_mu / w * s * s * std::sin(w * t - spec.phase(u));
}

/// E_u(t) = -dA_u/dt, in the energy units of e0_mu.
inline double field_component(double t, const PulseSpec& spec, Axis u) {
  if (t < 0.0 || t > spec.tau) return 0.0;
  const double w = spec.omega_l / kHbar;
  const double arg = w * t - spec.phase(u);
  const double s = std::sin(kPi * t / spec.tau);
  return -spec.e0_mu / w * (kPi / spec.tau) * std::sin(2.0 * kPi * t / spec.tau) * std::sin(arg) -
         spec.e0_mu * s * s * std::cos(arg);
}

/// Photon-creating dipole transitions kept by the weak-field truncation:
/// basis index of a p = 0 state, of its copy with photon p, and p.
struct DriveTransition {
  std::size_t from;
  std::size_t to;
  int photon;
};

/// Every p = 0 -> p = +-1 transition with both ends inside the basis.
inline std::vector<DriveTransition> drive_transitions(const SectorBasis& basis) {
  if (!basis.has_sector({0, 0})) throw Error("drive_operator: extended basis lacks the ground sector (0,0)");
  std::vector<DriveTransition> out;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const auto& s = basis.state(k);
    if (s.photon != 0) continue;
    for (int p : {-1, 1}) {
      OccupationState t = s;
      t.photon = p;
      if (auto idx = basis.find(t)) out.push_back({k, *idx, p});
    }
  }
  return out;
}

/// <1_p| -(mu_x E_x + mu_y E_y) |0> with a_x = (a+ + a-)/sqrt2 and the
/// y-weight -i p / sqrt2, so that the RCP phase pair drives p = -1 resonantly.
inline cplx drive_element(double ex, double ey, int photon) {
  return -(cplx(ex, 0.0) + cplx(0.0, -static_cast<double>(photon)) * ey) / std::sqrt(2.0);
}

/// Drive term -sum_u mu_u E_u(t) on the extended basis.
inline SparseHermitian drive_operator(double t, const PulseSpec& spec, const SectorBasis& basis) {
  const auto transitions = drive_transitions(basis);
  const double ex = field_component(t, spec, Axis::X);
  const double ey = field_component(t, spec, Axis::Y);
  std::vector<Triplet> trip;
  trip.push_back({0, 0, 0.0});
  for (const auto& tr : transitions) {
    const cplx el = drive_element(ex, ey, tr.photon);  // <to|H_I|from>
    if (tr.to < tr.from) {
      trip.push_back({tr.to, tr.from, el});
    } else {
      trip.push_back({tr.from, tr.to, std::conj(el)});
    }
  }
  return SparseHermitian::from_upper(basis.size(), std::move(trip));
}

/// H0 + drive(t) applied without materializing the drive matrix.
class DrivenHamiltonian {
 public:
  DrivenHamiltonian(const SparseHermitian& h0, const SectorBasis& basis, const PulseSpec& pulse)
      : h0_(&h0), pulse_(pulse), transitions_(drive_transitions(basis)) {
    if (h0.dim() != basis.size()) throw Error("DrivenHamiltonian: H0 and basis sizes differ");
  }

  std::size_t dim() const noexcept { return h0_->dim(); }

  void apply(double t, std::span<const cplx> x, std::span<cplx> y) const {
    h0_->apply(x, y);
    const double ex = field_component(t, pulse_, Axis::X);
    const double ey = field_component(t, pulse_, Axis::Y);
    if (ex == 0.0 && ey == 0.0) return;
    for (const auto& tr : transitions_) {
      const cplx el = drive_element(ex, ey, tr.photon);
      y[tr.to] += el * x[tr.from];
      y[tr.from] += std::conj(el) * x[tr.to];
    }
  }

 private:
  const SparseHermitian* h0_;
  PulseSpec pulse_;
  std::vector<DriveTransition> transitions_;
};

struct PropagationOptions {
  double dt = 0.01;        ///< step while the drive is on (fs)
  double t_end = 200.0;    ///< fs
  double stride = 0.1;     ///< output spacing (fs); also the step once the drive is off
  std::size_t kdim = 12;   ///< Krylov dimension with the drive on
  std::size_t free_kdim = 30;
  /// Per-step Krylov error estimate above which a step is split in two.
  double step_tol = 1e-11;
  /// Abort when | ||psi|| - 1 | exceeds this.
  double norm_abort = 1e-6;
  bool store_states = false;

  bool operator==(const PropagationOptions&) const = default;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> polarization;
  std::vector<double> excited_population;
  std::vector<cplx> autocorrelation;
  std::vector<double> norms;
  std::vector<CVector> states;
  /// End of the drive (fs); 0 for free propagation.
  double pulse_end = 0.0;
};

namespace detail {

template <TimeDependentOperator Op>
CVector adaptive_step(const Op& h, const CVector& psi, double t, double dt, std::size_t kdim, double tol, int depth,
                      long step) {
  KrylovStats stats;
  CVector out;
  try {
    out = krylov_step(h, psi, t, dt, kdim, &stats);
  } catch (const PropagationError& e) {
    throw PropagationError(std::string(e.what()) + " at step " + std::to_string(step), step);
  }
  if (stats.error_estimate <= tol * psi.norm() || depth >= 16) return out;
  CVector half = adaptive_step(h, psi, t, 0.5 * dt, kdim, tol, depth + 1, step);
  return adaptive_step(h, half, t + 0.5 * dt, 0.5 * dt, kdim, tol, depth + 1, step);
}

}  // namespace detail

/// Propagates psi0 under h(t); the operator must be time independent for
/// t >= pulse_end. Observables are sampled every `stride`.
template <TimeDependentOperator Op>
Trajectory propagate(const Op& h, const SectorBasis& basis, const MolecularSpectrum& spec, const CVector& psi0,
                     double pulse_end, const PropagationOptions& opt) {
  if (!(opt.dt > 0.0) || !(opt.stride > 0.0) || !(opt.t_end >= 0.0)) throw Error("propagate: invalid time grid");
  const double ratio = opt.stride / opt.dt;
  const auto substeps = static_cast<long>(std::llround(ratio));
  if (substeps < 1 || std::abs(ratio - static_cast<double>(substeps)) > 1e-9 * ratio)
    throw Error("propagate: dt must divide the output stride");
  if (static_cast<std::size_t>(psi0.size()) != basis.size()) throw Error("propagate: initial state size mismatch");

  std::vector<int> photon(basis.size());
  std::vector<char> excited(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) {
    photon[k] = basis.state(k).photon;
    excited[k] = excitation_number(basis.state(k), spec) > 0;
  }

  Trajectory traj;
  traj.pulse_end = pulse_end;
  const double norm0 = psi0.norm();
  CVector psi = psi0;
  auto record = [&](double t, long step) {
    double pol = 0.0, pop = 0.0;
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const double w = std::norm(psi[static_cast<Eigen::Index>(k)]);
      pol += photon[k] * w;
      if (excited[k]) pop += w;
    }
    const double nrm = psi.norm();
    if (std::abs(nrm - norm0) > opt.norm_abort * std::max(norm0, 1e-300))
      throw PropagationError("propagate: norm drift " + std::to_string(nrm - norm0) + " at t=" + std::to_string(t) +
                                 " fs, step " + std::to_string(step),
                             step);
    traj.times.push_back(t);
    traj.polarization.push_back(pol);
    traj.excited_population.push_back(pop);
    traj.autocorrelation.push_back(psi0.dot(psi));
    traj.norms.push_back(nrm);
    if (opt.store_states) traj.states.push_back(psi);
  };

  const auto outputs = static_cast<long>(std::llround(opt.t_end / opt.stride));
  long step = 0;
  record(0.0, step);
  for (long k = 0; k < outputs; ++k) {
    const double t0 = static_cast<double>(k) * opt.stride;
    if (t0 < pulse_end) {
      for (long s = 0; s < substeps; ++s) {
        psi = detail::adaptive_step(h, psi, t0 + static_cast<double>(s) * opt.dt, opt.dt, opt.kdim, opt.step_tol, 0,
                                    ++step);
      }
    } else {
      psi = detail::adaptive_step(h, psi, t0, opt.stride, opt.free_kdim, opt.step_tol, 0, ++step);
    }
    record(static_cast<double>(k + 1) * opt.stride, step);
  }
  return traj;
}

/// Extended basis (0,0) + (1, j) for a pulse of polarization p.
inline SectorBasis extended_basis(int N, CircularPolarization p, const MolecularSpectrum& spec,
                                  const RetentionFilter& retention = {}) {
  const Sector target = target_sector(p);
  return union_basis(enumerate_sector_basis(N, 0, 0, spec, retention),
                     enumerate_sector_basis(N, target.n_ex, target.j, spec, retention));
}

/// Index of the absolute ground state: all molecules in the ground level, no photon.
inline std::size_t ground_state_index(const SectorBasis& basis, const MolecularSpectrum& spec) {
  OccupationState s;
  s.occupations = {{spec.ground_level(), basis.molecules()}};
  s.photon = 0;
  auto idx = basis.find(s);
  if (!idx) throw Error("ground state is not part of the basis");
  return *idx;
}

/// Drives the absolute ground state with `pulse` under H0 on the extended basis.
inline Trajectory propagate_pulse(const SparseHermitian& h0, const SectorBasis& basis, const MolecularSpectrum& spec,
                                  const PulseSpec& pulse, const PropagationOptions& opt = {}) {
  pulse.validate();
  if (!basis.has_sector(target_sector(pulse.polarization)))
    throw Error("propagate_pulse: basis lacks the sector driven by this polarization");
  DrivenHamiltonian h(h0, basis, pulse);
  CVector psi0 = CVector::Zero(static_cast<Eigen::Index>(basis.size()));
  psi0[static_cast<Eigen::Index>(ground_state_index(basis, spec))] = 1.0;
  return propagate(h, basis, spec, psi0, pulse.tau, opt);
}

/// Field-free propagation of psi0 (e.g. the bright state) under H0.
inline Trajectory propagate_free(const SparseHermitian& h0, const SectorBasis& basis, const MolecularSpectrum& spec,
                                 const CVector& psi0, const PropagationOptions& opt = {}) {
  return propagate(StaticOperator(h0), basis, spec, psi0, 0.0, opt);
}

/// Excited population once the pulse is over (first sample at t >= pulse_end).
inline double excited_population_after_pulse(const Trajectory& traj) {
  for (std::size_t k = 0; k < traj.times.size(); ++k)
    if (traj.times[k] >= traj.pulse_end - 1e-9) return traj.excited_population[k];
  throw Error("trajectory ends before the pulse is over");
}

struct TimeSeries {
  std::vector<double> times;
  std::vector<double> values;
};

/// <P(t)> divided by the post-pulse excited population, on [tau, t_end].
inline TimeSeries normalized_polarization(const Trajectory& traj) {
  const double pop = excited_population_after_pulse(traj);
  if (!(pop > 1e-12))
    throw Error("normalized_polarization: excited population " + std::to_string(pop) +
                " vanishes; raise e0_mu or tune omega_L to the polariton band");
  TimeSeries out;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    if (traj.times[k] < traj.pulse_end - 1e-9) continue;
    out.times.push_back(traj.times[k]);
    out.values.push_back(traj.polarization[k] / pop);
  }
  return out;
}

/// Trapezoid time average of |values|.
inline double time_averaged_magnitude(const TimeSeries& s) {
  if (s.times.size() < 2) return s.values.empty() ? 0.0 : std::abs(s.values.front());
  double acc = 0.0;
  for (std::size_t k = 1; k < s.times.size(); ++k)
    acc += 0.5 * (std::abs(s.values[k]) + std::abs(s.values[k - 1])) * (s.times[k] - s.times[k - 1]);
  return acc / (s.times.back() - s.times.front());
}

/// (1 / pi hbar) Re int_0^T C(t) exp(iEt/hbar) exp(-t/damping) dt by the
/// trapezoid rule; for C(t) = sum I_n exp(-i E_n t / hbar) this tends to a
/// sum of unit-area Lorentzians of half width hbar / damping.
inline std::vector<double> autocorrelation_spectrum(const Trajectory& traj, double damping_time,
                                                    const std::vector<double>& grid) {
  if (!(damping_time > 0.0)) throw Error("autocorrelation_spectrum: damping_time must be positive");
  const std::size_t n = traj.times.size();
  if (n < 2) throw Error("autocorrelation_spectrum: trajectory too short");
  std::vector<cplx> damped(n);
  std::vector<double> weight(n);
  for (std::size_t k = 0; k < n; ++k) {
    damped[k] = traj.autocorrelation[k] * std::exp(-traj.times[k] / damping_time);
    const double left = k > 0 ? traj.times[k] - traj.times[k - 1] : 0.0;
    const double right = k + 1 < n ? traj.times[k + 1] - traj.times[k] : 0.0;
    weight[k] = 0.5 * (left + right);
  }
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double ph = grid[g] * traj.times[k] / kHbar;
      acc += weight[k] * (damped[k].real() * std::cos(ph) - damped[k].imag() * std::sin(ph));
    }
    out[g] = acc / (kPi * kHbar);
  }
  return out;
}

/// Energy resolution 2 pi hbar / T of a transform over a trajectory of length T.
inline double transform_resolution(const Trajectory& traj) {
  return 2.0 * kPi * kHbar / (traj.times.back() - traj.times.front());
}

/// Local maxima of `curve` above rel_threshold * max, as grid energies.
inline std::vector<double> find_peaks(const std::vector<double>& grid, const std::vector<double>& curve,
                                      double rel_threshold) {
  std::vector<double> out;
  if (curve.size() < 3) return out;
  const double top = *std::max_element(curve.begin(), curve.end());
  for (std::size_t k = 1; k + 1 < curve.size(); ++k)
    if (curve[k] > curve[k - 1] && curve[k] >= curve[k + 1] && curve[k] > rel_threshold * top) out.push_back(grid[k]);
  return out;
}

}  // namespace jtpol
