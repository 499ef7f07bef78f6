#pragma once

#include <stdexcept>
#include <string>

namespace hopflab {

/// Failure categories shared by every module. The CLI maps them onto exit codes.
enum class ErrorKind {
  InvalidArgument,      // precondition on an input violated
  NumericalDegeneracy,  // eigensolver / linear solver breakdown
  Configuration,        // scheme or config is not admissible (e.g. non-monotone stencil)
  Divergence,           // iteration failed to converge
  CheckFailed           // a verified inequality did not hold
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace hopflab
