#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace jtpol {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Reduced Planck constant in eV*fs. Energies are eV and times fs throughout.
inline constexpr double kHbar = 0.6582119569;

inline constexpr double kPi = 3.14159265358979323846;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a dense eigensolve is requested above the configured size limit.
class DenseLimitError : public Error {
 public:
  DenseLimitError(std::size_t dim, std::size_t limit)
      : Error("matrix dimension " + std::to_string(dim) + " exceeds the dense limit " +
              std::to_string(limit) + "; use the lanczos method or raise dense_limit"),
        dim_(dim),
        limit_(limit) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t limit() const noexcept { return limit_; }

 private:
  std::size_t dim_;
  std::size_t limit_;
};

/// Raised when time propagation produces non-finite values or loses norm.
class PropagationError : public Error {
 public:
  PropagationError(const std::string& what, long step) : Error(what), step_(step) {}

  /// Step index at which propagation was aborted (-1 when unknown).
  long step() const noexcept { return step_; }

 private:
  long step_;
};

}  // namespace jtpol
