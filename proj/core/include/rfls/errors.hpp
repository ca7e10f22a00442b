#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace rfls {

/// Root of the toolkit's exception hierarchy. The command line front end maps
/// each leaf type onto a distinct process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input (configuration, dimensions, arguments).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A precondition on a numeric argument was violated (e.g. delta <= 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The requested design point admits no valid estimator: a Riccati equation
/// has no admissible solution, the coupling condition fails, or no feasible
/// scaling point exists.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// A Hamiltonian with eigenvalues on (or numerically at) the imaginary axis.
class NoStabilizingSolution : public InfeasibleError {
 public:
  NoStabilizingSolution(const std::string& what,
                        std::vector<std::complex<double>> eigenvalues)
      : InfeasibleError(what), eigenvalues_(std::move(eigenvalues)) {}
  const std::vector<std::complex<double>>& eigenvalues() const noexcept {
    return eigenvalues_;
  }

 private:
  std::vector<std::complex<double>> eigenvalues_;
};

/// rho(YX) >= tau.
class CouplingViolation : public InfeasibleError {
 public:
  CouplingViolation(const std::string& what, double rho, double tau)
      : InfeasibleError(what), rho_(rho), tau_(tau) {}
  double rho() const noexcept { return rho_; }
  double tau() const noexcept { return tau_; }

 private:
  double rho_;
  double tau_;
};

/// A solver returned but its result failed a residual or definiteness check.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A system required to be asymptotically stable is not (stationary
/// covariance undefined).
class UnstableError : public Error {
 public:
  using Error::Error;
};

}  // namespace rfls
