#pragma once

#include <stdexcept>
#include <string>

namespace rawcode {

// Base class for every failure raised by the library. `kind()` is the stable
// machine-readable tag used in structured CLI errors.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

// Argument outside the phase space [0,1) or an otherwise invalid domain value.
struct DomainError : Error {
  explicit DomainError(const std::string& what) : Error("domain", what) {}
};

// A trajectory was asked for more steps than its initial point carries bits.
struct PrecisionError : Error {
  explicit PrecisionError(const std::string& what) : Error("precision", what) {}
};

// A configured cost cap (refinement order, interval count) would be exceeded.
struct ResourceError : Error {
  explicit ResourceError(const std::string& what) : Error("resource", what) {}
};

// Malformed user input: files, flags, mismatched streams.
struct InputError : Error {
  explicit InputError(const std::string& what) : Error("input", what) {}
};

// Trajectory backend cannot represent the requested map or point.
struct BackendError : Error {
  explicit BackendError(const std::string& what) : Error("backend", what) {}
};

} // namespace rawcode
