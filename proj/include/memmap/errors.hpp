#pragma once

#include <stdexcept>
#include <string>

namespace memmap {

/// Factorization failures, positivity violations, quadrature breakdowns.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input files (CSV rows, model documents).
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace memmap
