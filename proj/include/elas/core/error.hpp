#ifndef ELAS_CORE_ERROR_HPP
#define ELAS_CORE_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace elas {

enum class ErrorCode {
  DimensionMismatch,
  DegenerateCovariance,
  InvalidFitness,
  InvalidHyperparameter,
  InvalidArgument,
  NoGenerations,
  EmptySelection,
  EmptyInput,
  Undefined,
  Io,
  Config,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateCovariance: return "DegenerateCovariance";
    case ErrorCode::InvalidFitness: return "InvalidFitness";
    case ErrorCode::InvalidHyperparameter: return "InvalidHyperparameter";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NoGenerations: return "NoGenerations";
    case ErrorCode::EmptySelection: return "EmptySelection";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::Undefined: return "Undefined";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

/// Library-wide exception carrying a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

}  // namespace elas

#endif  // ELAS_CORE_ERROR_HPP
