#pragma once

#include <stdexcept>
#include <string>

namespace hwy {

/// Dimension disagreement between operands. Message names both shapes.
class ShapeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// NaN/Inf surfaced where the numeric contract requires finite values.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A call that is malformed regardless of data (bad flag, bad index, bad enum).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Run configuration rejected during validation.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// IDX ingestion failures, kept distinct so callers can tell them apart.
class BadMagicError : public IoError {
public:
    using IoError::IoError;
};

class TruncatedFileError : public IoError {
public:
    using IoError::IoError;
};

class CountMismatchError : public IoError {
public:
    using IoError::IoError;
};

} // namespace hwy
