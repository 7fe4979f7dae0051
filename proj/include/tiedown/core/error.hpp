#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tiedown {

/// Base class for every error raised by the library.
class LabError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument is outside the domain of the operation.
class DomainError : public LabError {
 public:
  using LabError::LabError;
};

/// A quadrature, root-finder or iteration did not reach its target accuracy.
class NumericalFailure : public LabError {
 public:
  NumericalFailure(const std::string& what, double achieved)
      : LabError(what + " (achieved tolerance " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}

  double achieved_tolerance() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// A requested table or state space would not fit the configured memory bound.
class ResourceError : public LabError {
 public:
  ResourceError(const std::string& what, std::uint64_t suggested)
      : LabError(what + " (suggested bound " + std::to_string(suggested) + ")"),
        suggested_(suggested) {}

  std::uint64_t suggested() const noexcept { return suggested_; }

 private:
  std::uint64_t suggested_;
};

/// Increment law whose support does not generate the lattice.
class InvalidLaw : public LabError {
 public:
  using LabError::LabError;
};

/// Orbit did not come back to the inducing set within the iteration cap.
class NonReturnError : public LabError {
 public:
  explicit NonReturnError(std::uint64_t cap)
      : LabError("orbit did not return within cap " + std::to_string(cap)), cap_(cap) {}

  std::uint64_t cap() const noexcept { return cap_; }

 private:
  std::uint64_t cap_;
};

/// Rejection sampler accepts too rarely for the requested budget.
class EfficiencyError : public LabError {
 public:
  EfficiencyError(const std::string& what, std::uint64_t suggested_trials)
      : LabError(what + " (suggested trials " + std::to_string(suggested_trials) + ")"),
        suggested_(suggested_trials) {}

  std::uint64_t suggested_trials() const noexcept { return suggested_; }

 private:
  std::uint64_t suggested_;
};

/// Window or index falls outside the data a table holds.
class RangeError : public LabError {
 public:
  using LabError::LabError;
};

/// Invalid command line or configuration document.
class UsageError : public LabError {
 public:
  using LabError::LabError;
};

}  // namespace tiedown
