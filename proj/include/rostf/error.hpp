#pragma once

#include <stdexcept>
#include <string>

namespace rostf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes disagree (image geometry, vector length, band count).
class GeometryError : public Error {
public:
    using Error::Error;
};

/// A raster file could not be decoded.
class DecodeError : public Error {
public:
    using Error::Error;
};

/// The solver produced non-finite or exploding iterates.
class DivergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace rostf
