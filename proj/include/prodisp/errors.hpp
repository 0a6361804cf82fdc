#ifndef PRODISP_ERRORS_HPP
#define PRODISP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace prodisp {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad parameters or inputs that violate a documented precondition.
struct ValidationError : Error {
    using Error::Error;
};

// A requested quantity does not exist (divergent moment, D outside the
// attainable interval, inconsistent index pair).
struct DomainError : Error {
    using Error::Error;
};

// An iterative scheme failed to reach its tolerance.
struct ConvergenceError : Error {
    ConvergenceError(const std::string& what, double achieved)
        : Error(what), achieved_error(achieved) {}
    double achieved_error;
};

} // namespace prodisp

#endif
