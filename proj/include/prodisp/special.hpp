#ifndef PRODISP_SPECIAL_HPP
#define PRODISP_SPECIAL_HPP

namespace prodisp {

double digamma(double x);
double trigamma(double x);
double log_beta(double p, double q);

// Least-squares line fit of y against x; returns slope, intercept, r^2.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};
LineFit fit_line(const double* x, const double* y, int n);

} // namespace prodisp

#endif
