#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pinlab {

enum class ErrorKind {
  InvalidArgument,
  Divergent,
  AbsorbedAll,
  ToleranceNotMet,
  NotApplicable,
  RejectionStall,
  QuadratureFailure,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a machine-readable kind so the
// dispatcher can record it per cell.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace pinlab
