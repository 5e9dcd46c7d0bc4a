#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace siegert {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation was violated by the caller.
class PreconditionError : public Error {
  public:
    using Error::Error;
};

/// A root handed to `classify` lies where no Siegert solution can exist.
class InconsistentRootError : public Error {
  public:
    using Error::Error;
};

/// Residual evaluated within 1e-12 of a pole of tan/cot.
class PoleProximityError : public Error {
  public:
    PoleProximityError(const std::string& what, std::complex<double> where)
        : Error(what), k(where) {}
    std::complex<double> k;
};

class NonConvergenceError : public Error {
  public:
    NonConvergenceError(const std::string& what, std::complex<double> last)
        : Error(what), last_iterate(last) {}
    std::complex<double> last_iterate;
};

/// Newton iteration was drawn onto a pole of the residual.
class PoleCaptureError : public Error {
  public:
    PoleCaptureError(const std::string& what, std::complex<double> last)
        : Error(what), last_iterate(last) {}
    std::complex<double> last_iterate;
};

class IncompleteScanError : public Error {
  public:
    IncompleteScanError(const std::string& what, double re_lo, double re_hi, double im_lo,
                        double im_hi)
        : Error(what), re_min(re_lo), re_max(re_hi), im_min(im_lo), im_max(im_hi) {}
    double re_min, re_max, im_min, im_max;
};

class QuadratureError : public Error {
  public:
    using Error::Error;
};

/// The probability density vanished where a speed (current / density) was requested.
class SingularNodeError : public Error {
  public:
    SingularNodeError(const std::string& what, double at) : Error(what), x(at) {}
    double x;
};

/// Step-halving disagreement in the domain integrator.
class AccuracyError : public Error {
  public:
    using Error::Error;
};

class SchemeFailureError : public Error {
  public:
    using Error::Error;
};

class FitQualityError : public Error {
  public:
    FitQualityError(const std::string& what, double fitted_rate, double r2)
        : Error(what), rate(fitted_rate), r_squared(r2) {}
    double rate;
    double r_squared;
};

}  // namespace siegert
