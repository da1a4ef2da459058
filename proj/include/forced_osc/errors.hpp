#pragma once

#include <stdexcept>
#include <string>

namespace forced_osc {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A precomputed model failed its own consistency checks while being built.
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Trajectory came too close to the origin for the action-angle chart.
class ChartError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive integrator could not make progress (step-size underflow).
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// More derivatives of a forcing coefficient were requested than allowed.
class SmoothnessPolicyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A series does not have the structure an operation expects.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or unknown configuration entries.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace forced_osc
