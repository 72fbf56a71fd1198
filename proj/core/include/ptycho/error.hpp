#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ptycho {

enum class ErrorKind {
  InvalidGeometry,
  Shape,
  Bounds,
  DegenerateInput,
  Parameter,
  Data,
  Plan,
  Unsupported,
  Io,
  Config,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` lets callers branch
/// without a class hierarchy.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace ptycho
