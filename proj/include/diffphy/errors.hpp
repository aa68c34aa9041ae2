#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace diffphy {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Tensor / vector shape mismatch.
struct DimensionError : Error {
    using Error::Error;
};

/// Argument value outside its admissible range.
struct DomainError : Error {
    using Error::Error;
};

/// Non-finite (NaN/Inf) data where finite values are required.
struct NumericError : Error {
    using Error::Error;
};

/// Object used out of sequence (stale cache, untrained model, ...).
struct StateError : Error {
    using Error::Error;
};

/// Bad run configuration (unknown key, type mismatch, missing field).
struct ConfigError : Error {
    using Error::Error;
};

/// Training diverged; carries the loss trace up to the failure.
struct TrainingError : Error {
    std::vector<double> loss_trace;
    TrainingError(const std::string& what, std::vector<double> trace)
        : Error(what), loss_trace(std::move(trace)) {}
};

/// Filesystem / serialization failure.
struct IoError : Error {
    using Error::Error;
};

/// Checkpoint failed its checksum or is truncated.
struct CorruptCheckpointError : IoError {
    using IoError::IoError;
};

/// Checkpoint written by an incompatible format version.
struct VersionMismatchError : IoError {
    using IoError::IoError;
};

}  // namespace diffphy
