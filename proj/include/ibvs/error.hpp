#ifndef IBVS_ERROR_HPP
#define IBVS_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ibvs {

enum class ErrorCode {
  InvalidArgument,
  CameraInsideSphere,
  BehindCamera,
  DegenerateNormal,
  ZeroObservedDiameter,
  NotInView,
  SingularInteraction,
  EmptyMask,
  NoBoundary,
  TooFewPoints,
  NoConsensus,
  ConfigError,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

// All library failures are reported through this type; `code()` carries the
// failure class so callers (and the C API) can branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ibvs

#endif  // IBVS_ERROR_HPP
