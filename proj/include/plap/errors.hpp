#pragma once

#include <stdexcept>
#include <string>

namespace plap {

/// Numerical failure carrying the best value obtained before giving up.
class numerical_error : public std::runtime_error {
public:
    numerical_error(const std::string& what, double partial_value = 0.0,
                    double residual = 0.0)
        : std::runtime_error(what), partial(partial_value), residual(residual) {}

    double partial;   ///< last/partial value before failure
    double residual;  ///< residual or error estimate at failure
};

/// A documented precondition of an operation does not hold.
class precondition_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace plap
