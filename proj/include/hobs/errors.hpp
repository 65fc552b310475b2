#pragma once

#include <stdexcept>
#include <string>

namespace hobs {

// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind { Usage = 1, Io = 2, Numerical = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define HOBS_DEFINE_ERROR(Name, Kind)                                   \
  class Name : public Error {                                           \
   public:                                                              \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

HOBS_DEFINE_ERROR(DegenerateMatrix, Numerical)
HOBS_DEFINE_ERROR(OrientationError, Numerical)
HOBS_DEFINE_ERROR(SingularHessian, Numerical)
HOBS_DEFINE_ERROR(InvariantViolation, Numerical)
HOBS_DEFINE_ERROR(IndexOutOfRange, Usage)
HOBS_DEFINE_ERROR(ConfigError, Usage)
HOBS_DEFINE_ERROR(EmptyRaster, Numerical)
HOBS_DEFINE_ERROR(IoError, Io)
HOBS_DEFINE_ERROR(UnsupportedFormat, Io)
HOBS_DEFINE_ERROR(MalformedHeader, Io)

#undef HOBS_DEFINE_ERROR

}  // namespace hobs
