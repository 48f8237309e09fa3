#pragma once

#include <stdexcept>
#include <string>

namespace crossdiff {

enum class ErrorCode {
  NonSquareInput,
  NonFiniteInput,
  NonzeroDiagonal,
  AsymmetricCoefficients,
  NegativeCoefficient,
  HypothesisH3Violated,
  EpsilonTooLarge,
  NotOnSimplex,
  SingularAtBoundary,
  OutOfRange,
  ReferenceNotPositive,
  GridMismatch,
  InvalidGrid,
  NegativeProfile,
  DegenerateProfile,
  NonFiniteResidual,
  NewtonDiverged,
  InvalidConfig,
  ParseError,
  ValidationError,
  DegenerateBaseline,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace crossdiff
