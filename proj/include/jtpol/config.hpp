#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "jtpol/collective.hpp"
#include "jtpol/core.hpp"
#include "jtpol/dynamics.hpp"
#include "jtpol/molecule.hpp"

namespace jtpol {

/// Invalid configuration; `key` is "section.name" when a key is at fault.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string key) : Error(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

enum class SpectrumMethod { Dense, Lanczos };

struct SpectrumOptions {
  SpectrumMethod method = SpectrumMethod::Dense;
  double fwhm = 0.01;
  /// Energy window (lo, hi] for dense records; "auto" picks none for N = 1
  /// and 6.2..7.6 eV otherwise.
  bool window_auto = true;
  std::optional<std::pair<double, double>> window;
  std::size_t lanczos_iterations = 400;
  double grid_step = 0.001;
  /// Broadened-curve range; empty means the stick range padded by 0.2 eV.
  std::optional<std::pair<double, double>> grid;
  std::size_t dense_limit = 12000;

  bool operator==(const SpectrumOptions&) const = default;
};

struct DynamicsOptions {
  std::vector<CircularPolarization> polarizations{CircularPolarization::RCP, CircularPolarization::LCP};
  std::vector<int> molecules{1};
  PulseSpec pulse;
  PropagationOptions propagation;

  bool operator==(const DynamicsOptions&) const = default;
};

struct RunConfig {
  ModelParams model;
  CavityParams cavity;
  /// Omega / (2 omega_c), used unless Omega_eV is given.
  double coupling_ratio = 0.05;
  std::optional<double> omega_coupling;
  Sector sector;
  SpectrumOptions spectrum;
  DynamicsOptions dynamics;
  RetentionFilter retention;
  std::string output_dir = "out";

  bool operator==(const RunConfig&) const = default;

  /// Cavity parameters with omega_c and Omega fixed for this level table.
  CavityParams resolved_cavity(const MolecularSpectrum& spec) const {
    CavityParams c = cavity.resolved(spec);
    c.Omega = omega_coupling ? *omega_coupling : 2.0 * coupling_ratio * *c.omega_c;
    c.validate();
    return c;
  }

  std::optional<std::pair<double, double>> effective_window(int N) const {
    if (!spectrum.window_auto) return spectrum.window;
    if (N == 1) return std::nullopt;
    return std::pair{6.2, 7.6};
  }
};

namespace detail {

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

class KeyReader {
 public:
  explicit KeyReader(const boost::property_tree::ptree& tree) : tree_(tree) {}

  std::optional<std::string> raw(const std::string& section, const std::string& key) {
    known_[section].insert(key);
    auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    auto v = sec->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return trim(*v);
  }

  double number(const std::string& section, const std::string& key, double fallback) {
    auto v = raw(section, key);
    return v ? parse_number(*v, section + "." + key) : fallback;
  }

  long integer(const std::string& section, const std::string& key, long fallback) {
    auto v = raw(section, key);
    if (!v) return fallback;
    try {
      std::size_t pos = 0;
      const long x = std::stol(*v, &pos);
      if (pos == v->size()) return x;
    } catch (const std::exception&) {
    }
    throw ConfigError("expected an integer for " + section + "." + key + ", got '" + *v + "'", section + "." + key);
  }

  static double parse_number(const std::string& text, const std::string& key) {
    try {
      std::size_t pos = 0;
      const double x = std::stod(text, &pos);
      if (pos == text.size() && std::isfinite(x)) return x;
    } catch (const std::exception&) {
    }
    throw ConfigError("expected a number for " + key + ", got '" + text + "'", key);
  }

  std::optional<std::pair<double, double>> range(const std::string& text, const std::string& key) {
    const auto parts = split(text, ',');
    if (parts.size() != 2) throw ConfigError("expected 'lo,hi' for " + key, key);
    const double lo = parse_number(parts[0], key), hi = parse_number(parts[1], key);
    if (!(hi > lo)) throw ConfigError("empty range for " + key, key);
    return std::pair{lo, hi};
  }

  /// Throws on the first section or key that was never asked for.
  void reject_unknown() const {
    for (const auto& [section, body] : tree_) {
      auto it = known_.find(section);
      if (it == known_.end()) {
        if (body.empty()) throw ConfigError("unknown key '" + section + "' outside any section", section);
        throw ConfigError("unknown section [" + section + "]", section);
      }
      for (const auto& [key, value] : body)
        if (!it->second.count(key))
          throw ConfigError("unknown key '" + key + "' in [" + section + "]", section + "." + key);
    }
  }

 private:
  const boost::property_tree::ptree& tree_;
  std::map<std::string, std::set<std::string>> known_;
};

}  // namespace detail

/// Parses the sectioned key-value format; every key is optional and unknown
/// keys are errors.
inline RunConfig parse_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what(), "");
  }
  detail::KeyReader r(tree);
  RunConfig c;

  c.model.omega = r.number("model", "omega_eV", c.model.omega);
  c.model.epsilon = r.number("model", "epsilon_eV", c.model.epsilon);
  c.model.kappa = r.number("model", "kappa_eV", c.model.kappa);
  c.model.n_max = static_cast<int>(r.integer("model", "n_max", c.model.n_max));

  if (auto v = r.raw("cavity", "omega_c_eV"); v && *v != "auto")
    c.cavity.omega_c = detail::KeyReader::parse_number(*v, "cavity.omega_c_eV");
  c.coupling_ratio = r.number("cavity", "Omega_over_2omega_c", c.coupling_ratio);
  if (auto v = r.raw("cavity", "Omega_eV"); v && *v != "auto")
    c.omega_coupling = detail::KeyReader::parse_number(*v, "cavity.Omega_eV");
  c.cavity.N = static_cast<int>(r.integer("cavity", "N", c.cavity.N));

  c.sector.n_ex = static_cast<int>(r.integer("sector", "n_ex", c.sector.n_ex));
  c.sector.j = static_cast<int>(r.integer("sector", "j", c.sector.j));

  if (auto v = r.raw("spectrum", "method")) {
    if (*v == "dense") {
      c.spectrum.method = SpectrumMethod::Dense;
    } else if (*v == "lanczos") {
      c.spectrum.method = SpectrumMethod::Lanczos;
    } else {
      throw ConfigError("spectrum.method must be dense or lanczos", "spectrum.method");
    }
  }
  c.spectrum.fwhm = r.number("spectrum", "fwhm_eV", c.spectrum.fwhm);
  if (auto v = r.raw("spectrum", "window_eV")) {
    c.spectrum.window_auto = *v == "auto";
    if (*v != "auto" && *v != "none") c.spectrum.window = r.range(*v, "spectrum.window_eV");
  }
  c.spectrum.lanczos_iterations =
      static_cast<std::size_t>(r.integer("spectrum", "lanczos_iterations", static_cast<long>(c.spectrum.lanczos_iterations)));
  c.spectrum.grid_step = r.number("spectrum", "grid_step_eV", c.spectrum.grid_step);
  if (auto v = r.raw("spectrum", "grid_eV"); v && *v != "auto") c.spectrum.grid = r.range(*v, "spectrum.grid_eV");
  c.spectrum.dense_limit =
      static_cast<std::size_t>(r.integer("spectrum", "dense_limit", static_cast<long>(c.spectrum.dense_limit)));

  if (auto v = r.raw("dynamics", "polarizations")) {
    c.dynamics.polarizations.clear();
    for (const auto& p : detail::split(*v, ',')) {
      if (p == "RCP") {
        c.dynamics.polarizations.push_back(CircularPolarization::RCP);
      } else if (p == "LCP") {
        c.dynamics.polarizations.push_back(CircularPolarization::LCP);
      } else {
        throw ConfigError("dynamics.polarizations accepts RCP and LCP", "dynamics.polarizations");
      }
    }
  }
  if (auto v = r.raw("dynamics", "molecules")) {
    c.dynamics.molecules.clear();
    for (const auto& p : detail::split(*v, ',')) {
      try {
        std::size_t pos = 0;
        c.dynamics.molecules.push_back(std::stoi(p, &pos));
        if (pos != p.size()) throw std::invalid_argument(p);
      } catch (const std::exception&) {
        throw ConfigError("dynamics.molecules must list integers", "dynamics.molecules");
      }
    }
  }
  auto& pulse = c.dynamics.pulse;
  auto& prop = c.dynamics.propagation;
  pulse.e0_mu = r.number("dynamics", "e0_mu_eV", pulse.e0_mu);
  pulse.omega_l = r.number("dynamics", "omega_L_eV", pulse.omega_l);
  pulse.tau = r.number("dynamics", "tau_fs", pulse.tau);
  prop.dt = r.number("dynamics", "dt_fs", prop.dt);
  prop.t_end = r.number("dynamics", "t_end_fs", prop.t_end);
  prop.stride = r.number("dynamics", "stride_fs", prop.stride);
  prop.kdim = static_cast<std::size_t>(r.integer("dynamics", "krylov_dim", static_cast<long>(prop.kdim)));
  prop.free_kdim = static_cast<std::size_t>(r.integer("dynamics", "free_krylov_dim", static_cast<long>(prop.free_kdim)));

  if (auto v = r.raw("retention", "max_levels_per_sector"); v && *v != "all")
    c.retention.max_levels_per_sector = static_cast<int>(r.integer("retention", "max_levels_per_sector", 0));
  if (auto v = r.raw("retention", "v_cap"); v && *v != "all")
    c.retention.v_cap = static_cast<int>(r.integer("retention", "v_cap", 0));

  if (auto v = r.raw("output", "directory")) c.output_dir = *v;

  r.reject_unknown();

  try {
    c.model.validate();
    c.cavity.validate();
    pulse.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what(), "");
  }
  if (c.sector.n_ex != 0 && c.sector.n_ex != 1) throw ConfigError("sector.n_ex must be 0 or 1", "sector.n_ex");
  if ((c.sector.j - c.sector.n_ex) % 2 != 0)
    throw ConfigError("sector.j must have the parity of sector.n_ex", "sector.j");
  if (!(c.coupling_ratio >= 0.0)) throw ConfigError("cavity.Omega_over_2omega_c must be >= 0", "cavity.Omega_over_2omega_c");
  if (!(c.spectrum.fwhm > 0.0)) throw ConfigError("spectrum.fwhm_eV must be positive", "spectrum.fwhm_eV");
  if (!(c.spectrum.grid_step > 0.0)) throw ConfigError("spectrum.grid_step_eV must be positive", "spectrum.grid_step_eV");
  if (c.spectrum.lanczos_iterations < 1)
    throw ConfigError("spectrum.lanczos_iterations must be positive", "spectrum.lanczos_iterations");
  if (!(prop.dt > 0.0) || !(prop.stride > 0.0) || !(prop.t_end > 0.0))
    throw ConfigError("dynamics time steps must be positive", "dynamics.dt_fs");
  if (prop.kdim < 2 || prop.free_kdim < 2) throw ConfigError("Krylov dimensions must be >= 2", "dynamics.krylov_dim");
  for (int n : c.dynamics.molecules)
    if (n < 1) throw ConfigError("dynamics.molecules entries must be >= 1", "dynamics.molecules");
  if (c.retention.max_levels_per_sector && *c.retention.max_levels_per_sector < 1)
    throw ConfigError("retention.max_levels_per_sector must be >= 1", "retention.max_levels_per_sector");
  if (c.retention.v_cap && *c.retention.v_cap < 1) throw ConfigError("retention.v_cap must be >= 1", "retention.v_cap");
  if (c.output_dir.empty()) throw ConfigError("output.directory must not be empty", "output.directory");
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path, "");
  return parse_config(in);
}

/// Every key, explicitly, in a form parse_config reads back unchanged.
inline std::string serialize_config(const RunConfig& c) {
  using detail::format_double;
  std::ostringstream os;
  auto range = [](const std::pair<double, double>& r) { return format_double(r.first) + "," + format_double(r.second); };
  os << "[model]\n"
     << "omega_eV = " << format_double(c.model.omega) << "\n"
     << "epsilon_eV = " << format_double(c.model.epsilon) << "\n"
     << "kappa_eV = " << format_double(c.model.kappa) << "\n"
     << "n_max = " << c.model.n_max << "\n\n";
  os << "[cavity]\n"
     << "omega_c_eV = " << (c.cavity.omega_c ? format_double(*c.cavity.omega_c) : "auto") << "\n"
     << "Omega_over_2omega_c = " << format_double(c.coupling_ratio) << "\n"
     << "Omega_eV = " << (c.omega_coupling ? format_double(*c.omega_coupling) : "auto") << "\n"
     << "N = " << c.cavity.N << "\n\n";
  os << "[sector]\n"
     << "n_ex = " << c.sector.n_ex << "\n"
     << "j = " << c.sector.j << "\n\n";
  os << "[spectrum]\n"
     << "method = " << (c.spectrum.method == SpectrumMethod::Dense ? "dense" : "lanczos") << "\n"
     << "fwhm_eV = " << format_double(c.spectrum.fwhm) << "\n"
     << "window_eV = " << (c.spectrum.window_auto ? "auto" : c.spectrum.window ? range(*c.spectrum.window) : "none")
     << "\n"
     << "lanczos_iterations = " << c.spectrum.lanczos_iterations << "\n"
     << "grid_step_eV = " << format_double(c.spectrum.grid_step) << "\n"
     << "grid_eV = " << (c.spectrum.grid ? range(*c.spectrum.grid) : "auto") << "\n"
     << "dense_limit = " << c.spectrum.dense_limit << "\n\n";
  os << "[dynamics]\npolarizations = ";
  for (std::size_t k = 0; k < c.dynamics.polarizations.size(); ++k)
    os << (k ? "," : "") << to_string(c.dynamics.polarizations[k]);
  os << "\nmolecules = ";
  for (std::size_t k = 0; k < c.dynamics.molecules.size(); ++k) os << (k ? "," : "") << c.dynamics.molecules[k];
  const auto& p = c.dynamics.pulse;
  const auto& q = c.dynamics.propagation;
  os << "\n"
     << "e0_mu_eV = " << format_double(p.e0_mu) << "\n"
     << "omega_L_eV = " << format_double(p.omega_l) << "\n"
     << "tau_fs = " << format_double(p.tau) << "\n"
     << "dt_fs = " << format_double(q.dt) << "\n"
     << "t_end_fs = " << format_double(q.t_end) << "\n"
     << "stride_fs = " << format_double(q.stride) << "\n"
     << "krylov_dim = " << q.kdim << "\n"
     << "free_krylov_dim = " << q.free_kdim << "\n\n";
  os << "[retention]\n"
     << "max_levels_per_sector = "
     << (c.retention.max_levels_per_sector ? std::to_string(*c.retention.max_levels_per_sector) : "all") << "\n"
     << "v_cap = " << (c.retention.v_cap ? std::to_string(*c.retention.v_cap) : "all") << "\n\n";
  os << "[output]\n"
     << "directory = " << c.output_dir << "\n";
  return os.str();
}

}  // namespace jtpol
