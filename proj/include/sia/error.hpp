#pragma once

#include <stdexcept>
#include <string>

namespace sia {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid argument, malformed value, or broken invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Operating-system level I/O failure (open, read, write, rename).
class IoError : public Error {
public:
    using Error::Error;
};

/// Container file declares a format version this build does not understand.
class FormatVersionError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Container file ends before its declared payload, or mid-header.
class TruncatedFileError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Container header contradicts itself or its payload.
class InconsistentHeaderError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A verification command (such as the gradient check) did not pass.
class CheckFailure : public Error {
public:
    using Error::Error;
};

} // namespace sia
