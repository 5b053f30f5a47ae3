#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace retrorank {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or dimension contract violated by an operation's inputs.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A value left the finite range (NaN/Inf) inside a numeric op.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Misuse of the differentiation tape (non-scalar loss, repeated backward).
class GraphError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

class SamplingExhausted : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace retrorank
