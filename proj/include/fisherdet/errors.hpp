#pragma once

#include <stdexcept>
#include <string>

namespace fisherdet {

/// Base class for all errors thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Tensor/parameter shape or dimension mismatch.
struct ShapeError : Error {
    using Error::Error;
};

/// Class index outside [0, C).
struct ClassIndexError : Error {
    using Error::Error;
};

/// NaN/Inf encountered where finite values are required.
struct NumericError : Error {
    using Error::Error;
};

/// Dataset problems: empty data, label out of range, length mismatch.
struct DataError : Error {
    using Error::Error;
};

/// File format or filesystem problems (bad magic, truncation, checksum, ...).
struct IoError : Error {
    using Error::Error;
};

/// File does not start with the expected magic number.
struct BadMagicError : IoError {
    using IoError::IoError;
};

/// File ends before the header-declared payload.
struct TruncatedFileError : IoError {
    using IoError::IoError;
};

/// Image and label files declare different item counts.
struct CountMismatchError : IoError {
    using IoError::IoError;
};

/// Stored checksum does not match the payload.
struct ChecksumError : IoError {
    using IoError::IoError;
};

/// Invalid configuration value.
struct ConfigError : Error {
    using Error::Error;
};

/// Brute-force computation refused: problem size above the guard limit.
struct SizeGuardError : Error {
    using Error::Error;
};

/// Zero-norm direction vector where normalization was requested.
struct DegenerateDirectionError : Error {
    using Error::Error;
};

} // namespace fisherdet
