#pragma once

#include <stdexcept>
#include <string>

namespace riffle {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed deck expression or record; `position` is a 0-based offset into the input.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class SignatureMismatch : public Error {
 public:
  using Error::Error;
};

// A configured size cap (enumeration, oracle, search states) would be exceeded.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

// The requested computation cannot be carried out with the given inputs.
class Infeasible : public Error {
 public:
  using Error::Error;
};

}  // namespace riffle
