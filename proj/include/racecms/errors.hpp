#pragma once

#include <stdexcept>
#include <string>

namespace racecms {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A sketch configuration field is out of range or inconsistent.
class InvalidConfig : public Error {
public:
    explicit InvalidConfig(const std::string& what) : Error("invalid config: " + what) {}
};

/// An operation that requires a non-empty set/vector was given an empty one.
class EmptyInput : public Error {
public:
    explicit EmptyInput(const std::string& what) : Error("empty input: " + what) {}
};

/// An increment would exceed the configured counter width.
class CounterOverflow : public Error {
public:
    explicit CounterOverflow(const std::string& what) : Error("counter overflow: " + what) {}
};

/// Two structures that must share a configuration do not.
class ConfigMismatch : public Error {
public:
    explicit ConfigMismatch(const std::string& what) : Error("config mismatch: " + what) {}
};

/// A serialized artifact failed validation (magic, version, framing, truncation).
class CorruptData : public Error {
public:
    explicit CorruptData(const std::string& what) : Error("corrupt data: " + what) {}
};

/// A serialized sketch failed validation.
class CorruptSketch : public CorruptData {
public:
    explicit CorruptSketch(const std::string& what) : CorruptData(what) {}
};

/// A numeric argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("domain error: " + what) {}
};

/// A text input (e.g. an edge list) is malformed; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("parse error at line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A parsed numeric value exceeds the representable range.
class OverflowError : public Error {
public:
    explicit OverflowError(const std::string& what) : Error("overflow: " + what) {}
};

} // namespace racecms
