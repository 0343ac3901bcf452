#pragma once

#include <stdexcept>
#include <string>

namespace tailrisk {

// Invalid parameters or configuration. The CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of a function (e.g. log(u) <= 0).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Floating point failure that could not be recovered (overflow after
// rescaling, probabilities underflowing, root finder divergence).
// The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace tailrisk
