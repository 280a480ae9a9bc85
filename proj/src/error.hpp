#pragma once

#include <stdexcept>
#include <string>

namespace hydrofsr {

enum class ErrorKind {
  domain,       // argument outside a function's valid range
  structural,   // dimension mismatch, malformed problem, disconnected grid
  calibration,  // plant parameter ordering violated
  validation,   // cascade cycles, invalid rights, bad series
  infeasible,   // dispatch or feasibility program has no solution
  solver,       // numerical failure (iteration cap, unbounded)
  consistency,  // internal cross-check failed (e.g. MS decomposition)
  contract,     // caller broke a documented precondition
  parse,
  schema,
  units,
  reference,    // unresolved id in a case file
  ordering,     // required artifact from a previous step is missing
  io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) throw Error(kind, message);
}

}  // namespace hydrofsr
