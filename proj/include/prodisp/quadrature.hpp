#ifndef PRODISP_QUADRATURE_HPP
#define PRODISP_QUADRATURE_HPP

#include <functional>

namespace prodisp {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;      // absolute error estimate
    int evaluations = 0;
    bool converged = false;

    double rel_error() const;
};

struct QuadOptions {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    int max_intervals = 2000;
};

// Adaptive Gauss-Kronrod (G7/K15) on a finite interval.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadOptions& opts = {});

// [lo, inf) via c = lo + scale * u / (1 - u); scale sets where the first
// half of the u-grid lands, so pass the integrand's own scale.
QuadResult integrate_upper(const std::function<double(double)>& f, double lo,
                           double scale, const QuadOptions& opts = {});

// Throws ConvergenceError (carrying the achieved error) unless converged.
double integrate_or_throw(const std::function<double(double)>& f, double a, double b,
                          const QuadOptions& opts, const char* what);
double integrate_upper_or_throw(const std::function<double(double)>& f, double lo,
                                double scale, const QuadOptions& opts, const char* what);

} // namespace prodisp

#endif
