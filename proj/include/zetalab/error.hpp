#pragma once

#include <stdexcept>
#include <string>

namespace zetalab {

enum class ErrorKind {
  kDomain,
  kValidation,
  kResource,
  kNonConvergence,
  kNonEmbeddable,
};

/// Base class for every error raised by the library. The kind drives the CLI
/// exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::kDomain, what) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::kValidation, what) {}
};

class ResourceError : public Error {
 public:
  explicit ResourceError(const std::string& what) : Error(ErrorKind::kResource, what) {}
};

class NonConvergenceError : public Error {
 public:
  explicit NonConvergenceError(const std::string& what)
      : Error(ErrorKind::kNonConvergence, what) {}
};

class NonEmbeddableError : public Error {
 public:
  NonEmbeddableError(const std::string& what, double min_ratio)
      : Error(ErrorKind::kNonEmbeddable, what), min_ratio_(min_ratio) {}
  /// Most negative eigenvalue divided by the largest one at the last attempt.
  double min_ratio() const noexcept { return min_ratio_; }

 private:
  double min_ratio_;
};

/// Exit status used by the command-line harness for an error kind.
inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDomain:
    case ErrorKind::kValidation:
      return 1;
    case ErrorKind::kResource:
      return 2;
    case ErrorKind::kNonConvergence:
    case ErrorKind::kNonEmbeddable:
      return 3;
  }
  return 1;
}

}  // namespace zetalab
