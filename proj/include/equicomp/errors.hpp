#pragma once

#include <stdexcept>
#include <string>

namespace equicomp {

// Bad input data or parameters outside an operation's domain. CLI exit code 2.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

// A resource guard (table size, bracket budget) was exceeded. CLI exit code 3.
class guard_error : public std::runtime_error {
public:
    explicit guard_error(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem failure. CLI exit code 4.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace equicomp
