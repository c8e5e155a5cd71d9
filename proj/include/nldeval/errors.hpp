#pragma once

#include <stdexcept>
#include <string>

namespace nldeval {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, size_t line)
        : std::runtime_error(msg + " (line " + std::to_string(line) + ")"), line(line) {}
    size_t line = 0;
};

struct DuplicateIdError : ParseError {
    DuplicateIdError(const std::string& id, size_t line)
        : ParseError("duplicate id \"" + id + "\"", line), id(id) {}
    std::string id;
};

struct RangeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyDraftError : std::runtime_error {
    EmptyDraftError() : std::runtime_error("refiner draft is empty") {}
};

struct NetworkError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TimeoutError : NetworkError {
    using NetworkError::NetworkError;
};

struct HttpStatusError : std::runtime_error {
    HttpStatusError(int status, const std::string& body_excerpt)
        : std::runtime_error("http status " + std::to_string(status) +
                             (body_excerpt.empty() ? "" : ": " + body_excerpt)),
          status(status) {}
    int status = 0;
};

struct MalformedResponseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SynonymTableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientSamplesError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace nldeval
