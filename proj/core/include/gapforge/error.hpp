#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gapforge {

enum class ErrorCode {
  // interval_core / gap specs
  InvalidInterval,
  EmptyInterval,
  OverlappingIntervals,
  NonPositiveLowerEdge,
  InvalidDimension,
  NonPositiveDelta,
  NonPositiveHorizon,
  EmptyWindow,
  // homogenized design
  InvalidGeometry,
  DuplicateSigma,
  InternalInvariant,
  // dispersion
  PoleEvaluation,
  HorizonTooSmall,
  // cell spectrum
  RepresentableScale,
  DegenerateGeometry,
  QuadratureFailure,
  InvalidResolution,
  EigenSolverFailure,
  // floquet
  UnresolvableHole,
  HoleSeparation,
  InvalidCharacter,
  InvalidGraph,
  // cli
  Config,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library. The code lets
/// callers branch on the failure kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gapforge
