#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flipper {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument or violated precondition detected before any work was done.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Carries the 1-based line number of the offending line.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& message)
      : Error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A horizontal query fell outside the grid's cell-center hull.
class OutOfMapError : public Error {
 public:
  using Error::Error;
};

/// A rotation-to-contact search could not produce a touching, non-puncturing angle.
class ContactError : public Error {
 public:
  enum class Reason { NoContact, PunctureAtStart };

  ContactError(Reason reason, const std::string& message) : Error(message), reason_(reason) {}

  Reason reason() const noexcept { return reason_; }

 private:
  Reason reason_;
};

}  // namespace flipper
