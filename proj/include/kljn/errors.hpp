#pragma once

#include <stdexcept>
#include <string>

namespace kljn {

// Precondition violations: bad sizes, nonpositive resistances, negative M.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Non-finite values or arithmetic that cannot produce a meaningful result.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Zero-variance input where a normalisation or correlation is required.
class DegenerateSignal : public NumericError {
public:
    using NumericError::NumericError;
};

// Mean-square level inconsistent with the assumed own resistor.
class InferenceDegenerate : public NumericError {
public:
    using NumericError::NumericError;
};

// File could not be opened, written or parsed.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw InvalidArgument(what);
}

}  // namespace detail
}  // namespace kljn
