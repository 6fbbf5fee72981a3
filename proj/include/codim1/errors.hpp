#pragma once

#include <stdexcept>
#include <string>

namespace codim1 {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidGeometry : Error {
    using Error::Error;
};

struct FocalViolation : Error {
    double offset;
    FocalViolation(double s, const std::string& msg) : Error(msg), offset(s) {}
};

struct InvalidMode : Error {
    using Error::Error;
};

struct InvalidGrid : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct SolverError : Error {
    using Error::Error;
};

struct DomainError : Error {
    using Error::Error;
};

}  // namespace codim1
