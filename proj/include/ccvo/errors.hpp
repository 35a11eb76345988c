#pragma once

#include <stdexcept>
#include <string>

namespace ccvo {

/// Disks intersect or touch; the collision cone is undefined.
struct OverlapError : std::runtime_error {
  explicit OverlapError(const std::string& what) : std::runtime_error(what) {}
};

/// Tangent directions collapsed to a line; the 2x2 decomposition is singular.
struct DegenerateConeError : std::runtime_error {
  explicit DegenerateConeError(const std::string& what) : std::runtime_error(what) {}
};

/// Argument outside the mathematical domain of the operation.
struct DomainError : std::domain_error {
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Kalman innovation covariance is numerically singular.
struct SingularInnovationError : std::runtime_error {
  explicit SingularInnovationError(const std::string& what) : std::runtime_error(what) {}
};

/// Inconsistent configuration or dimension mismatch.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem failure; message carries the offending path.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ccvo
