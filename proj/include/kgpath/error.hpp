#pragma once

#include <stdexcept>
#include <string>

namespace kgpath {

// All recoverable failures surface as Error with a message meant for the CLI
// diagnostic stream. Subclasses exist where callers branch on the category.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& msg)
        : Error(file + ":" + std::to_string(line) + ": " + msg) {}
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class LookupError : public Error {
public:
    using Error::Error;
};

class IncompatibilityError : public Error {
public:
    using Error::Error;
};

} // namespace kgpath
