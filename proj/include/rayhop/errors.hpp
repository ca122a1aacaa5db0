#pragma once

#include <stdexcept>
#include <string>

namespace rayhop {

// Base of every error raised by the library. Numerical conditions that a
// caller is expected to recover from (singular directions, non-positive
// speed) get their own types so they can be caught selectively.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The speed model evaluated to c <= 0: the scenario is invalid at that point.
class NonPositiveSpeed : public Error {
 public:
  using Error::Error;
};

// |sin(phi)| fell below the pole threshold; azimuth is undefined there.
class PolarSingularity : public Error {
 public:
  using Error::Error;
};

// Reflection requested for a direction (almost) tangent to the surface.
class GrazingIncidence : public Error {
 public:
  using Error::Error;
};

class InvalidSolution : public Error {
 public:
  using Error::Error;
};

// Bad user input: malformed files, out-of-range parameters.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace rayhop
