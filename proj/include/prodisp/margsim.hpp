#ifndef PRODISP_MARGSIM_HPP
#define PRODISP_MARGSIM_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "prodisp/fitting.hpp"

namespace prodisp {

// Cobb-Douglas labor share drawn independently per firm; marginal
// productivity is share * average productivity.
struct LaborShareLaw {
    enum class Kind { UniformInterval, Degenerate };
    Kind kind = Kind::UniformInterval;
    double lo = 0.5;
    double hi = 1.0;
    double value = 0.7; // degenerate case

    void validate() const;
    static LaborShareLaw uniform(double lo, double hi);
    static LaborShareLaw degenerate(double value);
};

std::vector<double> marginal_from_average(const std::vector<double>& c_samples,
                                          const LaborShareLaw& law, std::uint64_t seed);

struct TailComparison {
    ParetoFit average;  // fit of c
    ParetoFit marginal; // fit of c_M
    double difference = 0.0;
    double combined_3sigma = 0.0;
    bool equal = false;
    std::string note; // set when the verdict fails
};

TailComparison verify_tail_equality(const std::vector<double>& c_samples,
                                    const std::vector<double>& cm_samples,
                                    double tail_fraction = 0.1);

} // namespace prodisp

#endif
