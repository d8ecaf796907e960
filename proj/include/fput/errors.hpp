#pragma once

#include <stdexcept>
#include <string>

namespace fput {

// Base of every error raised by the library. kind() is the stable name used in
// structured error output.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message);
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define FPUT_DECLARE_ERROR(Name)                                  \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

FPUT_DECLARE_ERROR(DomainError);
FPUT_DECLARE_ERROR(UnsupportedOrder);
FPUT_DECLARE_ERROR(InvalidParameter);
FPUT_DECLARE_ERROR(ToleranceNotMet);
FPUT_DECLARE_ERROR(OutOfRange);
FPUT_DECLARE_ERROR(ShapeRangeError);
FPUT_DECLARE_ERROR(NewtonDiverged);
FPUT_DECLARE_ERROR(RangeViolation);
FPUT_DECLARE_ERROR(SingularSystem);
FPUT_DECLARE_ERROR(SubsonicError);
FPUT_DECLARE_ERROR(InsufficientLadder);
FPUT_DECLARE_ERROR(GridMismatch);
FPUT_DECLARE_ERROR(WeightTooLarge);
FPUT_DECLARE_ERROR(LadderRequired);
FPUT_DECLARE_ERROR(EigensolverFailure);
FPUT_DECLARE_ERROR(CollisionError);
FPUT_DECLARE_ERROR(SubstepLimit);
FPUT_DECLARE_ERROR(DomainTooSmall);
FPUT_DECLARE_ERROR(TrackLost);
FPUT_DECLARE_ERROR(ConfigError);

#undef FPUT_DECLARE_ERROR

// Raised when ω is too small for the scaling equation to have an admissible
// large root. min_omega is the smallest admissible speed found by a scan.
class NoLargeRoot : public Error {
 public:
  NoLargeRoot(const std::string& message, double min_omega)
      : Error("NoLargeRoot", message), min_omega_(min_omega) {}
  double min_omega() const noexcept { return min_omega_; }

 private:
  double min_omega_;
};

}  // namespace fput
