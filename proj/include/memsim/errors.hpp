#pragma once

#include <stdexcept>
#include <string>

namespace memsim {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad configuration input: parse failures, validation failures, unit errors.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Mesh generation or geometry failures.
class MeshError : public Error {
public:
    using Error::Error;
};

/// Geometric preconditions violated (e.g. arc longer than a full circle).
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Degenerate numerical input (e.g. collinear points in a circle fit).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

/// Linear or nonlinear solver failures.
class SolverError : public Error {
public:
    using Error::Error;
};

/// File input/output failures.
class IoError : public Error {
public:
    using Error::Error;
};

/// Internal invariant violations (should not occur with valid inputs).
class InternalError : public Error {
public:
    using Error::Error;
};

} // namespace memsim
