#pragma once

#include <stdexcept>
#include <string>

namespace readlevel {

// Malformed input file (bad line, wrong field count, bad JSON, ...).
// Carries the offending path and 1-based line number when known.
class ParseError : public std::runtime_error {
public:
  ParseError(std::string path, std::size_t line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
        path_(std::move(path)),
        line_(line) {}

  explicit ParseError(const std::string& what)
      : std::runtime_error(what), line_(0) {}

  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }

private:
  std::string path_;
  std::size_t line_ = 0;
};

// Well-formed input that violates a domain invariant (label out of range,
// duplicate id, non-normalized probabilities, ...).
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad run configuration: degenerate scale, missing calibration entry,
// invalid collapse map, infeasible hyper-parameters.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Training aborted because the loss stopped being finite.
class DivergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace readlevel
