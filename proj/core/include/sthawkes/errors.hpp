#pragma once

#include <stdexcept>
#include <string>

namespace sthawkes {

// Malformed inputs: files, rows, vocabularies, windows. CLI maps this to exit 2.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite objectives, diverging optimizers, unstable parameter regimes.
// CLI maps this to exit 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sthawkes
