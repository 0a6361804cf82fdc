#ifndef PRODISP_GB2_HPP
#define PRODISP_GB2_HPP

#include "prodisp/rng.hpp"

namespace prodisp {

// Generalized beta of the second kind,
//   f(x) = a x^(ap-1) / (b^(ap) B(p,q) (1+(x/b)^a)^(p+q)),  x > 0;
// upper-tail survival ~ x^(-aq).
struct GB2Params {
    double a = 1.0; // shape
    double b = 1.0; // scale
    double p = 1.0; // shape
    double q = 1.0; // shape

    void validate() const;
    double tail_index() const { return a * q; }

    double log_pdf(double x) const;
    double pdf(double x) const;
    // n-th raw moment, b^n B(p+n/a, q-n/a)/B(p,q); requires a*q > n.
    double moment(int n) const;
    double mean() const { return moment(1); }

    // transformed-beta representation: X = b (W/(1-W))^(1/a), W ~ Beta(p,q)
    double sample(Rng& rng) const;
};

} // namespace prodisp

#endif
