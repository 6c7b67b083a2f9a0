#pragma once

#include <stdexcept>
#include <string>

namespace anvaya {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed corpus input. line() is 1-based, 0 when the error is not tied
// to a particular line (e.g. a duplicate id discovered after parsing).
class CorpusError : public Error {
public:
    CorpusError(std::size_t line, const std::string& what)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// An annotated sentence that violates a structural invariant.
class AnnotationError : public Error {
public:
    using Error::Error;
};

class LinearizeError : public Error {
public:
    using Error::Error;
};

class MetricError : public Error {
public:
    using Error::Error;
};

class PromptError : public Error {
public:
    using Error::Error;
};

}  // namespace anvaya
