#pragma once

#include <stdexcept>
#include <string>

namespace sawchan {

/// Bad arguments or configuration. Maps to exit status 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Memory budget or filesystem failures. Maps to exit status 2.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Results that indicate corrupted numerics (e.g. a clearly non-PSD matrix).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

} // namespace sawchan
