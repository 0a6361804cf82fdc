#ifndef PRODISP_SYNTHETIC_HPP
#define PRODISP_SYNTHETIC_HPP

#include <cstdint>
#include <vector>

#include "prodisp/distribution.hpp"
#include "prodisp/panel.hpp"
#include "prodisp/scenario.hpp"
#include "prodisp/superstats.hpp"

namespace prodisp {

// Synthetic firm panel: per period, demand is drawn from the demand law,
// inverted to beta, and the worker endowment is allocated across firms by
// multinomial draws on the Boltzmann weights. Firm productivities are
// redrawn each year from the firm distribution; a firm-year's workers are
// its summed worker-periods (firm-years that never receive a worker are
// dropped, since they would report zero output).
struct SyntheticEconomy {
    Panel panel;
    std::vector<double> demand_draws; // all periods, in draw order
    std::vector<double> beta_draws;
    double mean_ceiling = 0.0;
};

SyntheticEconomy generate_synthetic_economy(const FirmDistribution& dist, const DemandLaw& law,
                                            const GenerateParams& params, std::uint64_t seed);

} // namespace prodisp

#endif
