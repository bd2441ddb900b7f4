#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cmlc {

// Bad flags, invalid configuration values, unknown label names. CLI exit code 1.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Anything wrong with an input file. CLI exit code 2.
class data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Structurally malformed input; carries the 1-based line number when known.
class parse_error : public data_error {
 public:
  parse_error(std::size_t line, const std::string& message)
      : data_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  explicit parse_error(const std::string& message) : data_error(message), line_(0) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input that violates a dataset invariant (e.g. a label value outside {0,1}).
class validation_error : public data_error {
 public:
  using data_error::data_error;
};

// A metric was requested on a block where every (instance,label) pair abstained.
class undefined_metric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cmlc
