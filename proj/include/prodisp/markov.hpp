#ifndef PRODISP_MARKOV_HPP
#define PRODISP_MARKOV_HPP

#include <cstdint>
#include <vector>

namespace prodisp {

// Continuous-time jump process for firm productivity: c -> c+1 at rate
// w_up(c) = a_plus c^alpha, c -> c-1 at rate w_down(c) = a_minus c^alpha,
// entry at c = 1 with rate entry_rate, exit when productivity falls to 0.
struct MarkovConfig {
    double a_plus = 0.0;
    double a_minus = 0.0;
    double rate_exponent = 2.0; // the jump process exponent, mu = exponent - 1
    double entry_rate = 1.0;
    long c_max = 0;
    // optional city-formation identity n(1)/C_alpha == entry_rate; when set,
    // validate() additionally requires it (never rewires the rates)
    bool impose_city_constraint = false;

    void validate() const;
    double w_up(long c) const;
    double w_down(long c) const;
    double cutoff_ratio() const { return 1.0 - a_plus / a_minus; } // n(1)/C_(alpha)
    double c_star() const { return 1.0 / cutoff_ratio(); }

    // a_plus derived from the cutoff ratio via a_plus/a_minus = 1 - ratio;
    // c_max = 0 selects 10 * c_star
    static MarkovConfig from_cutoff_ratio(double rate_exponent, double ratio,
                                          double entry_rate = 1.0, double a_minus = 1.0,
                                          long c_max = 0);
};

struct StationaryState {
    std::vector<double> counts; // counts[c-1] = n(c), c = 1..c_max
    double total_firms = 0.0;       // K
    double aggregate_index = 0.0;   // C = sum c n(c)
    double rate_weighted_sum = 0.0; // C_(alpha) = sum c^alpha n(c)
    double truncated_tail_fraction = 0.0;

    double n(long c) const { return counts[static_cast<std::size_t>(c - 1)]; }
    long c_max() const { return static_cast<long>(counts.size()); }
};

// exact product-formula solution, accumulated in log space
StationaryState stationary_solution(const MarkovConfig& cfg);

// n(c) ~ amplitude * c^(-alpha) e^(-c/c_star) with c_star closed
// self-consistently (damped fixed point on x = n(1)/C_alpha against the
// stationarity requirement C_alpha = p/(a_minus - a_plus))
struct PowerlawApprox {
    double amplitude = 0.0;
    double exponent = 0.0;
    double c_star = 0.0;
    double cutoff_ratio = 0.0;
    int iterations = 0;
    // max relative deviation from the exact solution over 10 <= c <= c_star/10
    double max_rel_deviation = 0.0;

    double value(double c) const;
};
PowerlawApprox stationary_powerlaw_approx(const MarkovConfig& cfg);

struct SimulateOptions {
    double warmup_fraction = 0.2;
    int replicas = 1;
    // reflecting cap for the simulated state space; 0 means cfg.c_max.
    // Interior expected occupancies are unaffected by the cap (no net flux
    // through any bond above the entry state).
    long state_cap = 0;
    int threads = 0; // 0 = one per replica up to hardware_concurrency
};

struct SimulationResult {
    std::vector<double> mean_occupancy; // time-averaged n(c) across replicas
    std::vector<std::vector<double>> replica_occupancy;
    unsigned long long events = 0; // total across replicas
    double horizon = 0.0;
    double measured_time = 0.0; // per replica, horizon minus warmup
    long state_cap = 0;
};

SimulationResult simulate(const MarkovConfig& cfg, double horizon, std::uint64_t seed,
                          const SimulateOptions& opts = {});

// master-equation residual at c = 1..len-1 given occupancy counts
// (index c-1); exact stationary input gives residuals at rounding level
std::vector<double> master_residual(const MarkovConfig& cfg,
                                    const std::vector<double>& counts);

// K and C as gamma-weighted integrals per the stationary profile, n(1) = 1
struct AggregateIndices {
    double firm_count = 0.0;        // K
    double productivity_index = 0.0; // C; +inf when divergent
    bool c_finite = true;
};
AggregateIndices aggregate_integrals(double alpha, double cutoff_ratio);

} // namespace prodisp

#endif
