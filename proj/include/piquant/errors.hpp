#pragma once

#include <stdexcept>
#include <string>

namespace piquant {

// Bad construction parameters (lambda out of range, invalid coefficient).
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Inputs outside the mathematical domain (NaN/Inf, radius > 2).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Malformed container contents: bad magic, version mismatch, truncation,
// out-of-range codes.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem-level failures (open/rename/short write).
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace piquant
