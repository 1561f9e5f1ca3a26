#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace oxpath {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed fixture markup. Line and column are 1-based.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t line, std::size_t column)
        : Error("parse error at " + std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Malformed wrapper source.
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& msg, std::size_t offset, std::size_t line, std::size_t column)
        : Error("syntax error at " + std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
          offset_(offset), line_(line), column_(column) {}

    std::size_t offset() const noexcept { return offset_; }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t offset_;
    std::size_t line_;
    std::size_t column_;
};

enum class EvalErrorKind {
    UnknownFunction,
    Arity,
    BadRegex,
    Type,
    NonScalarMarker,
    Unsupported,
    IterationLimit,
};

class EvalError : public Error {
public:
    EvalError(EvalErrorKind kind, const std::string& msg) : Error(msg), kind_(kind) {}
    EvalErrorKind kind() const noexcept { return kind_; }

private:
    EvalErrorKind kind_;
};

class NavigationError : public Error {
public:
    using Error::Error;
};

class ActionError : public Error {
public:
    using Error::Error;
};

class HistoryUnderflow : public Error {
public:
    HistoryUnderflow() : Error("history underflow: no page to go back to") {}
};

/// A contextual action changed the path from the root to its context node.
class ContextLost : public ActionError {
public:
    using ActionError::ActionError;
};

/// A parsed wrapper breaks one of the static restrictions.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Unbalanced or ill-placed output-tree events.
class ProtocolError : public Error {
public:
    using Error::Error;
};

/// Invalid option combination (CLI flags, serializer options, manifest).
class ConfigError : public Error {
public:
    using Error::Error;
};

enum class SerializeErrorKind { DuplicateAttribute, DuplicateKey, Path };

class SerializeError : public Error {
public:
    SerializeError(SerializeErrorKind kind, const std::string& msg) : Error(msg), kind_(kind) {}
    SerializeErrorKind kind() const noexcept { return kind_; }

private:
    SerializeErrorKind kind_;
};

/// Any failure during wrapper evaluation, annotated with where it happened.
class EvaluationFailure : public Error {
public:
    EvaluationFailure(std::size_t step_index, std::string url, const std::string& cause)
        : Error("step " + std::to_string(step_index) + " on " + url + ": " + cause),
          step_index_(step_index), url_(std::move(url)), cause_(cause) {}

    std::size_t step_index() const noexcept { return step_index_; }
    const std::string& url() const noexcept { return url_; }
    const std::string& cause() const noexcept { return cause_; }

private:
    std::size_t step_index_;
    std::string url_;
    std::string cause_;
};

} // namespace oxpath
