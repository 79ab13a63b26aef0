#pragma once

#include <stdexcept>
#include <string>

namespace qmdgen {

/// Base class for every harness error. The CLI maps these to exit codes:
/// validation/config errors -> 1, runtime/provider errors -> 2.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// -- validation / input errors (exit code 1) --

struct MalformedInput : Error {
    using Error::Error;
};

struct UnsupportedElement : Error {
    using Error::Error;
};

struct DanglingReference : Error {
    using Error::Error;
};

struct EmptyModelText : Error {
    using Error::Error;
};

struct EmptyCorpus : Error {
    using Error::Error;
};

struct EmptyQuery : Error {
    using Error::Error;
};

struct EmptyHypothesis : Error {
    using Error::Error;
};

struct EmptyReference : Error {
    using Error::Error;
};

struct EmptyRows : Error {
    using Error::Error;
};

struct ConfigInvalid : Error {
    using Error::Error;
};

// -- runtime / provider errors (exit code 2) --

struct IoFailure : Error {
    using Error::Error;
};

struct MissingCredentials : Error {
    using Error::Error;
};

struct ProviderError : Error {
    ProviderError(const std::string& msg, int status_code = 0, std::string body = "")
        : Error(msg), status(status_code), body_excerpt(std::move(body)) {}
    int status;
    std::string body_excerpt;
};

struct TimeoutError : Error {
    using Error::Error;
};

}  // namespace qmdgen
