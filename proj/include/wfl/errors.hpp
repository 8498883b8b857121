#pragma once

#include <stdexcept>
#include <string>

namespace wfl {

/// Invalid argument or configuration value. The message names the offending field.
class ParameterError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine reached a state its preconditions rule out.
class InternalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input has no spread (all samples equal), so no statistic can be formed.
class DegenerateInputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Fractional negative power requested on a field with a constant mode.
class InjectivityError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Time stepping blew up; the message suggests a smaller step.
class StabilityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The travelling front left the interior of the truncated domain.
class FrontEscapedError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The truncated domain is too small for the front tails to decay.
class DomainTooSmallError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// No projection gain produced a negative projected spectrum.
class SpectralGapNotFoundError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace wfl
