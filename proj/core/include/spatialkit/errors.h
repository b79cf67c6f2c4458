#pragma once

#include <stdexcept>
#include <string>

namespace spatialkit {

// Base of every error the library throws. kind() is a stable name that
// callers (CLI exit-code mapping, foreign bindings) can switch on.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// Errors caused by bad user input. The CLI maps these to exit status 1.
class InputError : public Error {
 public:
  using Error::Error;
};

#define SPATIALKIT_DEFINE_ERROR(Name, Base)                               \
  class Name : public Base {                                              \
   public:                                                                \
    explicit Name(const std::string& message) : Base(#Name, message) {}   \
  }

SPATIALKIT_DEFINE_ERROR(SchemaError, InputError);
SPATIALKIT_DEFINE_ERROR(InvariantError, InputError);
SPATIALKIT_DEFINE_ERROR(ConfigError, InputError);
SPATIALKIT_DEFINE_ERROR(UnknownId, InputError);
SPATIALKIT_DEFINE_ERROR(LengthMismatch, InputError);
SPATIALKIT_DEFINE_ERROR(GroupTooSmall, InputError);
SPATIALKIT_DEFINE_ERROR(NoJsonFound, InputError);
SPATIALKIT_DEFINE_ERROR(EmptyBox, InputError);
SPATIALKIT_DEFINE_ERROR(DegenerateGeometry, Error);
SPATIALKIT_DEFINE_ERROR(UniquenessViolation, Error);
SPATIALKIT_DEFINE_ERROR(StagePairingError, Error);

#undef SPATIALKIT_DEFINE_ERROR

}  // namespace spatialkit
