#ifndef QLSR_ERRORS_HPP
#define QLSR_ERRORS_HPP

#include <complex>
#include <stdexcept>
#include <string>

namespace qlsr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape or dimension mismatch between operands.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// A system matrix violates a required relation (unitarity, Hermiticity, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An operation precondition that is not a plain shape problem.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Evaluation point lies on (or numerically too close to) a pole.
class PoleProximityError : public Error {
 public:
  PoleProximityError(const std::string& what, std::complex<double> pole)
      : Error(what), pole_(pole) {}

  std::complex<double> pole() const noexcept { return pole_; }

 private:
  std::complex<double> pole_;
};

/// Malformed input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace qlsr

#endif  // QLSR_ERRORS_HPP
