#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cotlab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ModulusMismatch : public Error {
public:
    using Error::Error;
};

class DivisionByZero : public Error {
public:
    using Error::Error;
};

class NotPrime : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what + " at token " + std::to_string(position)), position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

class UnbalancedBrackets : public Error {
public:
    using Error::Error;
};

class SingularSystem : public Error {
public:
    using Error::Error;
};

class SpecViolation : public Error {
public:
    using Error::Error;
};

class InstanceTooLarge : public Error {
public:
    using Error::Error;
};

class NonCanonicalGrammar : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class AssumptionViolated : public Error {
public:
    using Error::Error;
};

class ParameterOverflow : public Error {
public:
    using Error::Error;
};

class LengthExceeded : public Error {
public:
    using Error::Error;
};

}  // namespace cotlab
