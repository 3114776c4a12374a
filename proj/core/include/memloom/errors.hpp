#pragma once

#include <stdexcept>
#include <string>

namespace memloom {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid argument value (bad dimensions, non-positive lengths, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Timestamp or index outside the valid range.
class OutOfRangeError : public Error {
public:
    using Error::Error;
};

/// Missing or inconsistent configuration (unregistered token, absent URL, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Remote backend failed after all retries. Carries endpoint and attempt count.
class BackendError : public Error {
public:
    BackendError(const std::string& msg, std::string endpoint, int attempts)
        : Error(msg), endpoint_(std::move(endpoint)), attempts_(attempts) {}

    const std::string& endpoint() const { return endpoint_; }
    int attempts() const { return attempts_; }

private:
    std::string endpoint_;
    int attempts_;
};

/// Backend answered but the payload violates the wire contract.
class ProtocolError : public Error {
public:
    using Error::Error;
};

/// Request body exceeds the endpoint's configured payload limit.
class RequestTooLargeError : public Error {
public:
    using Error::Error;
};

/// A model completion could not be mapped to an option index.
/// Keeps the raw completion for diagnostics.
class AnswerParseError : public Error {
public:
    AnswerParseError(const std::string& msg, std::string completion)
        : Error(msg), completion_(std::move(completion)) {}

    const std::string& completion() const { return completion_; }

private:
    std::string completion_;
};

/// Assembled prompt exceeds the configured character budget.
class PromptBudgetError : public Error {
public:
    using Error::Error;
};

/// File could not be read, written or parsed.
class IoError : public Error {
public:
    using Error::Error;
};

/// Pipeline aborted mid-run; message includes progress diagnostics.
class PipelineAbortError : public Error {
public:
    PipelineAbortError(const std::string& msg, int completed_chunks)
        : Error(msg), completed_chunks_(completed_chunks) {}

    int completed_chunks() const { return completed_chunks_; }

private:
    int completed_chunks_;
};

}  // namespace memloom
