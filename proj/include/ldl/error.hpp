#pragma once

#include <stdexcept>
#include <string>

namespace ldl {

/// Base class for every error raised by the toolkit. `kind()` is a short
/// machine-readable category used by the CLI error line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error("parse", what) {}
};

struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& what) : Error("invalid_argument", what) {}
};

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& what) : Error("dimension_mismatch", what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

}  // namespace ldl
