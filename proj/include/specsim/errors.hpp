#pragma once

#include <stdexcept>
#include <string>

namespace specsim {

// Bad caller input: shapes, ranges, parity of T, unknown names.
class InvalidArgument : public std::invalid_argument {
public:
  explicit InvalidArgument(const std::string& what) : std::invalid_argument(what) {}
};

// Non-finite values, singular or ill-conditioned systems.
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Evaluation at omega in {0, 2*pi} of a density that is unbounded there.
class SingularFrequency : public NumericError {
public:
  explicit SingularFrequency(const std::string& what) : NumericError(what) {}
};

// A spectral specification that violates its own contract (e.g. negative eigenvalue).
class InvalidSpec : public InvalidArgument {
public:
  explicit InvalidSpec(const std::string& what) : InvalidArgument(what) {}
};

// Frequency ensemble that is not conjugate-symmetric.
class InvalidEnsemble : public InvalidArgument {
public:
  explicit InvalidEnsemble(const std::string& what) : InvalidArgument(what) {}
};

}  // namespace specsim
