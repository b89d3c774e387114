#pragma once

#include <stdexcept>
#include <string>

namespace gjj {

/// Failure categories shared across the library. The CLI maps these to exit
/// codes and manifest diagnostics.
enum class ErrorKind {
  numerical_domain,
  degenerate_junction,
  invalid_dimension,
  shape,
  truncation,
  invalid_rate,
  supercritical,
  degenerate_spectrum,
  stiffness,
  degeneracy,
  convergence,
  fit,
  config,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when a truncated Fock space cannot hold the requested state; carries
/// the measured population of the top truncation levels.
class TruncationError : public Error {
 public:
  TruncationError(const std::string& what, double leakage)
      : Error(ErrorKind::truncation, what), leakage_(leakage) {}

  double leakage() const noexcept { return leakage_; }

 private:
  double leakage_;
};

/// Raised by eigenbasis-dissipator construction when two levels coincide.
class DegenerateSpectrumError : public Error {
 public:
  DegenerateSpectrumError(const std::string& what, int lower, int upper)
      : Error(ErrorKind::degenerate_spectrum, what), lower_(lower), upper_(upper) {}

  int lower() const noexcept { return lower_; }
  int upper() const noexcept { return upper_; }

 private:
  int lower_;
  int upper_;
};

}  // namespace gjj
