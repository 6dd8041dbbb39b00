#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cadence {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition on a function argument does not hold.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Malformed or truncated WAV data.
class DecodeError : public Error {
 public:
  DecodeError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Well-formed WAV whose codec or bit depth is not supported.
class UnsupportedFormatError : public Error {
 public:
  using Error::Error;
};

/// Input too short for a stable estimate.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Lyric file with a malformed timestamp.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Embedding manifest rejected.
class LoadError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration (fps bounds, optimizer settings, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Plan compilation failed.
class CompileError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value met during optimization.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace cadence
