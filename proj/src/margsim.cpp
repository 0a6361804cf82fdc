#include "prodisp/margsim.hpp"

#include <cmath>

#include "prodisp/errors.hpp"
#include "prodisp/rng.hpp"

namespace prodisp {

void LaborShareLaw::validate() const {
    if (kind == Kind::UniformInterval) {
        if (!(0.0 < lo && lo < hi && hi <= 1.0))
            throw ValidationError("labor share: need 0 < lo < hi <= 1");
    } else {
        if (!(0.0 < value && value <= 1.0))
            throw ValidationError("labor share: need 0 < value <= 1");
    }
}

LaborShareLaw LaborShareLaw::uniform(double lo, double hi) {
    LaborShareLaw law;
    law.kind = Kind::UniformInterval;
    law.lo = lo;
    law.hi = hi;
    law.validate();
    return law;
}

LaborShareLaw LaborShareLaw::degenerate(double value) {
    LaborShareLaw law;
    law.kind = Kind::Degenerate;
    law.value = value;
    law.validate();
    return law;
}

std::vector<double> marginal_from_average(const std::vector<double>& c_samples,
                                          const LaborShareLaw& law, std::uint64_t seed) {
    law.validate();
    std::vector<double> out(c_samples.size());
    if (law.kind == LaborShareLaw::Kind::Degenerate) {
        for (std::size_t i = 0; i < c_samples.size(); ++i) out[i] = law.value * c_samples[i];
        return out;
    }
    Rng rng(seed);
    for (std::size_t i = 0; i < c_samples.size(); ++i)
        out[i] = rng.uniform(law.lo, law.hi) * c_samples[i];
    return out;
}

TailComparison verify_tail_equality(const std::vector<double>& c_samples,
                                    const std::vector<double>& cm_samples,
                                    double tail_fraction) {
    TailComparison cmp;
    cmp.average = hill_estimator(c_samples, tail_fraction);
    cmp.marginal = hill_estimator(cm_samples, tail_fraction);
    cmp.difference = std::abs(cmp.average.mu_hat - cmp.marginal.mu_hat);
    cmp.combined_3sigma = 3.0 * std::hypot(cmp.average.std_error, cmp.marginal.std_error);
    cmp.equal = cmp.difference <= cmp.combined_3sigma;
    if (!cmp.equal)
        cmp.note = "tail indices differ beyond 3 sigma; the share/productivity "
                   "independence assumption may be violated";
    return cmp;
}

} // namespace prodisp
