#pragma once

#include <stdexcept>
#include <string>

namespace fluidtree {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidSpecError : public Error {
public:
    using Error::Error;
};

/// Flow matrix is numerically non-invertible (condition estimate above threshold).
class SingularMatrixError : public Error {
public:
    using Error::Error;
};

/// Some server utilization is >= 1; draining horizons are undefined.
class UnstableNetworkError : public Error {
public:
    using Error::Error;
};

/// The state did not reach (near-)zero by the end of the horizon.
class EmptyingFailedError : public Error {
public:
    using Error::Error;
};

class IterationLimitError : public Error {
public:
    using Error::Error;
};

class NumericalFailureError : public Error {
public:
    using Error::Error;
};

/// All state entries are below the zero threshold; there is no support pattern.
class EmptyPatternError : public Error {
public:
    using Error::Error;
};

class OverlappingCellsError : public Error {
public:
    using Error::Error;
};

class EmptyDatasetError : public Error {
public:
    using Error::Error;
};

/// No partition cell covers the queried support pattern, even via superset fallback.
class NoApplicableTreeError : public Error {
public:
    using Error::Error;
};

/// Too many per-instance failures while generating a dataset batch.
class GenerationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace fluidtree
