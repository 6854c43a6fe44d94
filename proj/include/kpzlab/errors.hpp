// Error types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace kpzlab {

struct OutOfDomain : std::domain_error {
  explicit OutOfDomain(const std::string& what) : std::domain_error(what) {}
};

struct OutOfSupport : std::domain_error {
  explicit OutOfSupport(const std::string& what) : std::domain_error(what) {}
};

struct QuadratureFailure : std::runtime_error {
  explicit QuadratureFailure(const std::string& what) : std::runtime_error(what) {}
};

struct RootFindFailure : std::runtime_error {
  explicit RootFindFailure(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionError : std::invalid_argument {
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

struct PreconditionViolated : std::invalid_argument {
  explicit PreconditionViolated(const std::string& what) : std::invalid_argument(what) {}
};

struct EmptyProfile : std::invalid_argument {
  explicit EmptyProfile(const std::string& what) : std::invalid_argument(what) {}
};

struct GridTooCoarse : std::invalid_argument {
  explicit GridTooCoarse(const std::string& what) : std::invalid_argument(what) {}
};

struct DimensionTooLarge : std::invalid_argument {
  explicit DimensionTooLarge(const std::string& what) : std::invalid_argument(what) {}
};

struct InterpolationError : std::runtime_error {
  explicit InterpolationError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericalBlowup : std::runtime_error {
  explicit NumericalBlowup(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::invalid_argument {
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace kpzlab
