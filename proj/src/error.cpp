#include "error.hpp"

namespace hydrofsr {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::structural: return "structural";
    case ErrorKind::calibration: return "calibration";
    case ErrorKind::validation: return "validation";
    case ErrorKind::infeasible: return "infeasible";
    case ErrorKind::solver: return "solver";
    case ErrorKind::consistency: return "consistency";
    case ErrorKind::contract: return "contract";
    case ErrorKind::parse: return "parse";
    case ErrorKind::schema: return "schema";
    case ErrorKind::units: return "units";
    case ErrorKind::reference: return "reference";
    case ErrorKind::ordering: return "ordering";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace hydrofsr
