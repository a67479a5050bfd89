#pragma once

#include <stdexcept>
#include <string>

namespace itsf {

// Bad or inconsistent input data: malformed CSV, schema violations,
// calendar gaps, misaligned series.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: degenerate regression, zero denominator, series that
// cannot be decomposed or compared.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// A projection exposes fewer than two interior maxima, so no envelope can be
// built along that direction. The sifting loop catches this to terminate.
class InsufficientExtremaError : public NumericalError {
public:
    explicit InsufficientExtremaError(const std::string& what) : NumericalError(what) {}
};

}  // namespace itsf
