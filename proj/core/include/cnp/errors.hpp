#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cnp {

// Bad arguments: out-of-range sizes, nonpositive weights, malformed configs.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computed probability left [0, 1] by more than the tolerance.
class NumericalInstability : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A player state machine was driven into a state the protocol rules out,
// e.g. a follower asked to play without having found its assigned arm.
class ProtocolViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace cnp
