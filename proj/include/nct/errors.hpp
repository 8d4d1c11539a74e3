#pragma once

#include <stdexcept>
#include <string>

namespace nct {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MissingVariable : Error {
    explicit MissingVariable(unsigned var)
        : Error("substitution target has no image for variable x" + std::to_string(var)), index(var) {}
    unsigned index;
};

struct DomainError : Error {
    using Error::Error;
};

struct NormTooLarge : Error {
    using Error::Error;
};

struct PreconditionFailed : Error {
    using Error::Error;
};

struct NoConvergence : Error {
    explicit NoConvergence(const std::string& what, double last_ratio)
        : Error(what), ratio(last_ratio) {}
    double ratio;
};

struct BasisTooLarge : Error {
    using Error::Error;
};

struct SingularGram : Error {
    using Error::Error;
};

struct DegreeExceedsDepth : Error {
    using Error::Error;
};

struct WindowTooSmall : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace nct
