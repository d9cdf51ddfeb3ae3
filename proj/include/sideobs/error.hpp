#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sideobs {

enum class Errc {
  IndexOutOfRange,
  RewardEdgeNotObserved,
  UncoveredBaseArm,
  InvalidParams,
  ParseError,
  EmptyGraph,
  Unreachable,
  BrokenPath,
  InvalidActivation,
  StructuralInfeasible,
  Unbounded,
  NumericalFailure,
  RoundOutOfRange,
  EmptyInput,
  AssumptionViolated,
  InvalidConfig,
  IoError,
};

constexpr std::string_view errc_name(Errc e) noexcept {
  switch (e) {
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::RewardEdgeNotObserved: return "RewardEdgeNotObserved";
    case Errc::UncoveredBaseArm: return "UncoveredBaseArm";
    case Errc::InvalidParams: return "InvalidParams";
    case Errc::ParseError: return "ParseError";
    case Errc::EmptyGraph: return "EmptyGraph";
    case Errc::Unreachable: return "Unreachable";
    case Errc::BrokenPath: return "BrokenPath";
    case Errc::InvalidActivation: return "InvalidActivation";
    case Errc::StructuralInfeasible: return "StructuralInfeasible";
    case Errc::Unbounded: return "Unbounded";
    case Errc::NumericalFailure: return "NumericalFailure";
    case Errc::RoundOutOfRange: return "RoundOutOfRange";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::AssumptionViolated: return "AssumptionViolated";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

// Every failure in the library is reported as an Error carrying a code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Parse failures also remember where they happened (1-based).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : Error(Errc::ParseError,
              "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace sideobs
