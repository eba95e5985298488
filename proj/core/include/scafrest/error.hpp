#pragma once

#include <stdexcept>
#include <string>

namespace scafrest {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input shapes, channel counts, or parameters violate an operation's preconditions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// File could not be read, decoded, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// The mask leaves no known context to reconstruct from.
class UninpaintableError : public Error {
 public:
  explicit UninpaintableError(const std::string& what)
      : Error("uninpaintable: " + what) {}
};

}  // namespace scafrest
