#ifndef GFSIM_ERRORS_HPP
#define GFSIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gfsim {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration, arguments or input files.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// The requested calculation lies outside the regime where the method holds
/// (unresolved doublet, closed form not applicable).
class RegimeError : public Error {
public:
  using Error::Error;
};

/// A numerical invariant was violated or an iterative routine failed.
class NumericalError : public Error {
public:
  NumericalError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

} // namespace gfsim

#endif
