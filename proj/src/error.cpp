#include "gjj/error.hpp"

namespace gjj {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::numerical_domain: return "numerical-domain";
    case ErrorKind::degenerate_junction: return "degenerate-junction";
    case ErrorKind::invalid_dimension: return "invalid-dimension";
    case ErrorKind::shape: return "shape";
    case ErrorKind::truncation: return "truncation";
    case ErrorKind::invalid_rate: return "invalid-rate";
    case ErrorKind::supercritical: return "supercritical";
    case ErrorKind::degenerate_spectrum: return "degenerate-spectrum";
    case ErrorKind::stiffness: return "stiffness";
    case ErrorKind::degeneracy: return "degeneracy";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::fit: return "fit";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

}  // namespace gjj
