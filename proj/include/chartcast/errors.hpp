#pragma once

#include <stdexcept>
#include <string>

namespace chartcast {

// Error hierarchy shared by all modules. The CLI maps each class to a
// distinct exit code (see tools/chartcast_main.cpp).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input that could not be read at all (bad CSV row, bad JSON).
class ParseError : public Error {
public:
    using Error::Error;
};

// Input was readable but violates a domain invariant (high < low, duplicate
// timestamps, misaligned anchors).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Bad configuration: out-of-range value, unknown key, incompatible options.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Filesystem / IO failure.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace chartcast
