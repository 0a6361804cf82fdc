#include "prodisp/gb2.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "prodisp/errors.hpp"
#include "prodisp/special.hpp"

namespace prodisp {

void GB2Params::validate() const {
    if (!(a > 0.0 && b > 0.0 && p > 0.0 && q > 0.0))
        throw ValidationError("GB2 parameters must all be positive");
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(p) || !std::isfinite(q))
        throw ValidationError("GB2 parameters must be finite");
}

double GB2Params::log_pdf(double x) const {
    if (x <= 0.0) return -std::numeric_limits<double>::infinity();
    const double lr = a * (std::log(x) - std::log(b)); // ln (x/b)^a
    // log1p(e^lr) without overflow
    const double soft = lr > 0.0 ? lr + std::log1p(std::exp(-lr)) : std::log1p(std::exp(lr));
    return std::log(a) + (a * p - 1.0) * std::log(x) - a * p * std::log(b) - log_beta(p, q) -
           (p + q) * soft;
}

double GB2Params::pdf(double x) const { return std::exp(log_pdf(x)); }

double GB2Params::moment(int n) const {
    if (a * q <= n)
        throw DomainError("GB2 moment of order " + std::to_string(n) +
                          " diverges (requires a*q > n, got a*q = " + std::to_string(a * q) + ")");
    return std::pow(b, n) *
           std::exp(log_beta(p + n / a, q - n / a) - log_beta(p, q));
}

double GB2Params::sample(Rng& rng) const {
    const double w = rng.beta(p, q);
    return b * std::pow(w / (1.0 - w), 1.0 / a);
}

} // namespace prodisp
