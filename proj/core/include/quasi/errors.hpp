#pragma once

#include <stdexcept>
#include <string>

namespace quasi {

/// Mismatched volume / sequence / field dimensions.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed file contents (QVOL, PGM, config, region files).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration (solver weights, iteration counts, presets).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite intermediate inside a solve; carries the iteration it hit.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, int outer, int inner)
      : std::runtime_error(what + " (outer " + std::to_string(outer) +
                           ", inner " + std::to_string(inner) + ")"),
        outer_(outer),
        inner_(inner) {}

  int outer() const { return outer_; }
  int inner() const { return inner_; }

 private:
  int outer_;
  int inner_;
};

}  // namespace quasi
