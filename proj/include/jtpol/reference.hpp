#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "jtpol/collective.hpp"
#include "jtpol/core.hpp"
#include "jtpol/molecule.hpp"
#include "jtpol/sparse_hermitian.hpp"

// Brute-force model in the primitive product basis: every molecule carries
// its own |s, n+, n-> label and each circular mode holds 0..photon_cap
// photons. No symmetry is used beyond an optional (n_ex, j) filter.

namespace jtpol::reference {

struct PrimitiveState {
  std::vector<MolecularBasisState> molecules;
  int n_lcp = 0;
  int n_rcp = 0;

  auto operator<=>(const PrimitiveState&) const = default;
};

inline int excitation_number(const PrimitiveState& s) {
  int n = s.n_lcp + s.n_rcp;
  for (const auto& m : s.molecules) n += m.s != Electronic::A;
  return n;
}

inline int total_angular_momentum(const PrimitiveState& s) {
  int j = s.n_lcp - s.n_rcp;
  for (const auto& m : s.molecules) j += vibronic_number(m);
  return j;
}

struct PrimitiveModel {
  std::vector<PrimitiveState> states;
  SparseHermitian hamiltonian;
};

inline std::vector<MolecularBasisState> single_molecule_states(int n_max) {
  std::vector<MolecularBasisState> out;
  for (Electronic s : {Electronic::A, Electronic::EPlus, Electronic::EMinus})
    for (int a = 0; a < n_max; ++a)
      for (int b = 0; b < n_max; ++b) out.push_back({s, a, b});
  return out;
}

/// H_c + sum_k (H_m,k + H_m-c,k) on N molecules. With `filter` only states
/// of that (n_ex, j) are kept; elements leaving the kept set are dropped.
inline PrimitiveModel build_primitive_model(const ModelParams& params, double omega_c, double Omega, int N,
                                            std::optional<Sector> filter = std::nullopt, int photon_cap = 1) {
  params.validate();
  if (N < 1 || N > 3) throw Error("reference model supports 1 <= N <= 3");
  const auto single = single_molecule_states(params.n_max);

  PrimitiveModel model;
  std::vector<std::size_t> digits(static_cast<std::size_t>(N), 0);
  for (;;) {
    for (int nl = 0; nl <= photon_cap; ++nl) {
      for (int nr = 0; nr <= photon_cap; ++nr) {
        PrimitiveState s;
        for (auto d : digits) s.molecules.push_back(single[d]);
        s.n_lcp = nl;
        s.n_rcp = nr;
        if (filter && (excitation_number(s) != filter->n_ex || total_angular_momentum(s) != filter->j)) continue;
        model.states.push_back(std::move(s));
      }
    }
    std::size_t k = 0;
    while (k < digits.size() && ++digits[k] == single.size()) digits[k++] = 0;
    if (k == digits.size()) break;
  }
  std::sort(model.states.begin(), model.states.end());
  if (model.states.empty()) throw Error("reference model: empty state set");

  auto find = [&](const PrimitiveState& s) -> std::optional<std::size_t> {
    auto it = std::lower_bound(model.states.begin(), model.states.end(), s);
    if (it == model.states.end() || *it != s) return std::nullopt;
    return static_cast<std::size_t>(it - model.states.begin());
  };

  const double g = Omega / (2.0 * std::sqrt(static_cast<double>(N)));
  std::vector<Triplet> t;
  auto add = [&](std::size_t source, const PrimitiveState& target, double value) {
    if (value == 0.0) return;
    auto idx = find(target);
    if (!idx) return;
    if (*idx < source) {
      t.push_back({*idx, source, value});
    } else {
      t.push_back({source, *idx, value});
    }
  };

  for (std::size_t k = 0; k < model.states.size(); ++k) {
    const auto& s = model.states[k];
    double diag = omega_c * (s.n_lcp + s.n_rcp);
    for (std::size_t m = 0; m < s.molecules.size(); ++m) {
      const auto& mol = s.molecules[m];
      diag += params.omega * (mol.n_plus + mol.n_minus);
      if (mol.s != Electronic::A) diag += params.epsilon;

      if (mol.s == Electronic::EPlus) {
        // kappa (b+^dag + b-) |E-><E+|
        PrimitiveState up = s;
        up.molecules[m] = {Electronic::EMinus, mol.n_plus + 1, mol.n_minus};
        if (mol.n_plus + 1 < params.n_max) add(k, up, params.kappa * std::sqrt(mol.n_plus + 1.0));
        if (mol.n_minus > 0) {
          PrimitiveState down = s;
          down.molecules[m] = {Electronic::EMinus, mol.n_plus, mol.n_minus - 1};
          add(k, down, params.kappa * std::sqrt(static_cast<double>(mol.n_minus)));
        }
      }
      if (mol.s != Electronic::A) {
        // a+^dag |A><E+| and a-^dag |A><E-|
        PrimitiveState emit = s;
        emit.molecules[m].s = Electronic::A;
        int& n = mol.s == Electronic::EPlus ? emit.n_lcp : emit.n_rcp;
        ++n;
        if (n <= photon_cap) add(k, emit, g * std::sqrt(static_cast<double>(n)));
      }
    }
    t.push_back({k, k, diag});
  }
  model.hamiltonian = SparseHermitian::from_upper(model.states.size(), std::move(t));
  return model;
}

/// Diagonal of a conserved charge on the model's states.
inline std::vector<double> excitation_diagonal(const PrimitiveModel& m) {
  std::vector<double> q;
  for (const auto& s : m.states) q.push_back(excitation_number(s));
  return q;
}

inline std::vector<double> angular_momentum_diagonal(const PrimitiveModel& m) {
  std::vector<double> q;
  for (const auto& s : m.states) q.push_back(total_angular_momentum(s));
  return q;
}

/// ||[H, Q]||_F / (||H||_F ||Q||_F) for a diagonal Q.
inline double relative_commutator(const SparseHermitian& h, const std::vector<double>& q) {
  if (q.size() != h.dim()) throw Error("relative_commutator: size mismatch");
  double c2 = 0.0, h2 = 0.0, q2 = 0.0;
  for (const auto& e : h.entries()) {
    const double w = std::norm(e.value) * (e.row == e.col ? 1.0 : 2.0);
    h2 += w;
    const double dq = q[e.col] - q[e.row];
    c2 += w * dq * dq;
  }
  for (double x : q) q2 += x * x;
  if (h2 == 0.0 || q2 == 0.0) return 0.0;
  return std::sqrt(c2 / (h2 * q2));
}

}  // namespace jtpol::reference
