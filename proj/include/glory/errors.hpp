#pragma once

#include <stdexcept>
#include <string>

namespace glory {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonPositiveGamma : Error {
    using Error::Error;
};
struct InvalidLevel : Error {
    using Error::Error;
};
struct GridTooSmall : Error {
    using Error::Error;
};
struct DomainMismatch : Error {
    using Error::Error;
};
struct ZeroField : Error {
    using Error::Error;
};
struct NotIntegrable : Error {
    using Error::Error;
};
struct OverflowError : Error {
    using Error::Error;
};
struct EvaluationError : Error {
    using Error::Error;
};
struct InsufficientSamples : Error {
    using Error::Error;
};
struct UnsupportedExpression : Error {
    using Error::Error;
};
struct TestFunctionNotAdmissible : Error {
    using Error::Error;
};
struct FormatVersionMismatch : Error {
    using Error::Error;
};
struct CorruptFrame : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace glory
