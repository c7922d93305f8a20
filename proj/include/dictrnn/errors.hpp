#pragma once

#include <stdexcept>
#include <string>

namespace dictrnn {

/// Base class for every failure raised by the construction pipeline.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterate of a delay map left [-1, 1].
class DomainEscape : public Error {
public:
    DomainEscape(std::string const& map, long step, double value);
    long step;
    double value;
};

class NoAnalyticBound : public Error {
public:
    using Error::Error;
};

/// Grid jitter retries could not satisfy the certification conditions.
class RetriesExhausted : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

/// A symbolic window had no dictionary entry while generating y*.
class MissingKey : public Error {
public:
    using Error::Error;
};

class GapTooSmall : public Error {
public:
    using Error::Error;
};

class SingularAfterRetries : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(std::string field, std::string const& message);
    std::string field;
};

class ChecksumMismatch : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

} // namespace dictrnn
