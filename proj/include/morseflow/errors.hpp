#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace morseflow {

enum class Errc {
  syntax,
  unknown_variable,
  arity,
  eval,
  unknown_builtin,
  metric_not_spd,
  rejection_overflow,
  not_inward_flowing,
  degenerate_critical_point,
  step_underflow,
  left_domain,
  seed_too_large,
  gap_too_small,
  non_simple_input,
  too_many_unresolved,
  insufficient_samples,
  structure_violation,
  out_of_domain,
  not_reached,
  precondition,
  config,
  io,
  internal,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::syntax: return "SyntaxError";
    case Errc::unknown_variable: return "UnknownVariable";
    case Errc::arity: return "ArityError";
    case Errc::eval: return "EvalError";
    case Errc::unknown_builtin: return "UnknownBuiltin";
    case Errc::metric_not_spd: return "MetricNotSPD";
    case Errc::rejection_overflow: return "RejectionOverflow";
    case Errc::not_inward_flowing: return "NotInwardFlowing";
    case Errc::degenerate_critical_point: return "DegenerateCriticalPoint";
    case Errc::step_underflow: return "StepUnderflow";
    case Errc::left_domain: return "LeftDomain";
    case Errc::seed_too_large: return "SeedTooLarge";
    case Errc::gap_too_small: return "GapTooSmall";
    case Errc::non_simple_input: return "NonSimpleInput";
    case Errc::too_many_unresolved: return "TooManyUnresolved";
    case Errc::insufficient_samples: return "InsufficientSamples";
    case Errc::structure_violation: return "StructureViolation";
    case Errc::out_of_domain: return "OutOfDomain";
    case Errc::not_reached: return "NotReached";
    case Errc::precondition: return "PreconditionViolation";
    case Errc::config: return "ConfigError";
    case Errc::io: return "IoError";
    case Errc::internal: return "InternalError";
  }
  return "Error";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) {
  throw Error(code, msg);
}

// Parse error carrying the byte offset and the token set that would have
// been accepted at that position.
class SyntaxError : public Error {
 public:
  SyntaxError(size_t offset, const std::string& expected, const std::string& got)
      : Error(Errc::syntax, "at offset " + std::to_string(offset) + ": expected " +
                                expected + ", got " + got),
        offset_(offset),
        expected_(expected) {}
  size_t offset() const { return offset_; }
  const std::string& expected() const { return expected_; }

 private:
  size_t offset_;
  std::string expected_;
};

}  // namespace morseflow
