#pragma once

#include <stdexcept>
#include <string>

namespace parreg {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct SingularMatrix : Error {
    using Error::Error;
};

// Sylvester solve requires disjoint spectra of the two coefficient matrices.
struct SpectraOverlap : Error {
    using Error::Error;
};

struct NotHurwitz : Error {
    using Error::Error;
};

// QR eigenvalue iteration exceeded its budget; input is pathological.
struct NoConvergence : Error {
    using Error::Error;
};

struct NotControllable : Error {
    using Error::Error;
};

struct IllConditioned : Error {
    using Error::Error;
};

struct UnstableObserverPolynomial : Error {
    using Error::Error;
};

struct NonPositiveControlDirection : Error {
    using Error::Error;
};

struct NonPositiveEigenvalue : Error {
    using Error::Error;
};

struct Diverged : Error {
    using Error::Error;
};

struct ConfigMismatch : Error {
    using Error::Error;
};

struct ConfigParse : Error {
    ConfigParse(const std::string& what, int line_no)
        : Error(what + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
    int line;
};

struct UnknownExample : Error {
    using Error::Error;
};

struct CertificationFailed : Error {
    using Error::Error;
};

} // namespace parreg
