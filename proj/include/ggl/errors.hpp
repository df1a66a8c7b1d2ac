#pragma once

#include <stdexcept>
#include <string>

namespace ggl {

// Invalid argument values (vertex counts, hop counts, hyperparameters).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Incompatible tensor shapes; the message names the primitive and both shapes.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite values, blow-ups, singular systems.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A model/solver combination that the method does not cover.
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& msg, int line = 0, int column = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ", column " +
                                          std::to_string(column) + ": " + msg
                                    : msg),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace ggl
