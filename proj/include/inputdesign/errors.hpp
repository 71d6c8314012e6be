#ifndef INPUTDESIGN_ERRORS_HPP
#define INPUTDESIGN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace inputdesign {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// invalid model structure (degenerate denominator, non-invertible noise model, ...)
class ModelError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

// criterion evaluated outside its domain (singular / indefinite argument)
class DomainError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace inputdesign

#endif
