#pragma once

#include <stdexcept>
#include <string>

namespace asrfeat {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input document (bad JSON, bad UTF-8, bad CSV cell).
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(what) {}
};

// Structurally valid input that violates a domain invariant.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(what) {}
};

// Missing file, unreadable path, failed write.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

// Remote embedding service unreachable or misbehaving at the wire level.
class TransportError : public Error {
public:
    explicit TransportError(const std::string& what) : Error(what) {}
};

// Key absent from a lookup table that must answer (embedding file, split ids).
class LookupError : public Error {
public:
    explicit LookupError(const std::string& what) : Error(what) {}
};

// Bad pipeline configuration (unresolvable path, ratios that do not sum to 1).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace asrfeat
