#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wg {

enum class ErrorKind {
  Singular,     // evaluation at a pole, fixed point or other removable/true singularity
  Domain,       // outside the domain of a function or relation
  Parse,
  Degenerate,   // degenerate family or matrix
  EmptyDomain,  // nothing left to work on
  Integration,  // ODE solver failure
  Precondition,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& what)
      : Error(ErrorKind::Parse, what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace wg
