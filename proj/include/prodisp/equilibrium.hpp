#ifndef PRODISP_EQUILIBRIUM_HPP
#define PRODISP_EQUILIBRIUM_HPP

#include <vector>

#include "prodisp/distribution.hpp"
#include "prodisp/rng.hpp"

namespace prodisp {

// Z(beta): plain level sum for discrete kinds, integral of the
// Boltzmann-weighted density for continuous kinds. May underflow to zero
// for extreme beta * support; log_partition_function is the robust form.
double partition_function(const FirmDistribution& dist, double beta);
double log_partition_function(const FirmDistribution& dist, double beta);

// <c^n>_beta, n in {0, 1, 2}
double moment(const FirmDistribution& dist, double beta, int n);

// D = <c>_beta = -(d/dbeta) ln Z
double demand_of_beta(const FirmDistribution& dist, double beta);

// unique beta >= 0 with demand_of_beta(beta) = demand; bracketed bisection
// then Newton polishing with dD/dbeta = -Var_beta(c)
double beta_of_demand(const FirmDistribution& dist, double demand);

// Solved macro-equilibrium. Discrete kinds carry worker probabilities
// p_k at the levels; continuous kinds carry a 2048-point log-spaced
// tabulation of the worker density and its survival function, with the
// (tiny) untabulated head/tail masses folded into the normalization.
struct EquilibriumState {
    double beta = 0.0;
    double demand = 0.0;          // first moment of the worker distribution
    double partition_value = 0.0; // Z(beta)
    double log_partition = 0.0;
    bool discrete = true;
    FirmDistribution source = FirmDistribution::pareto(1.5, 1.0);

    std::vector<double> support;  // levels / sample values / grid nodes
    std::vector<double> weight;   // p_k for atoms, worker density at nodes
    std::vector<double> survival; // P^W_>(c) at the support points
    double head_mass = 0.0;       // worker mass below the first grid node
    double tail_mass = 0.0;       // worker mass above the last grid node

    // closed-form P^F(c) e^(-beta c) / Z(beta); continuous kinds only
    double worker_density(double c) const;
    // mass of the stored representation (== 1 up to quadrature error)
    double stored_mass() const;
    double stored_first_moment() const;
    // inverse-CDF draw from the stored representation
    double sample(Rng& rng) const;
};

EquilibriumState worker_distribution(const FirmDistribution& dist, double beta,
                                     int grid_points = 2048);

// Closed form for the uniform grid: Z ~ 1/(beta dc), D ~ 1/beta,
// with the exact geometric sums alongside and validity flags for the two
// regime conditions.
struct UniformClosedForm {
    double z_approx = 0.0;
    double demand_approx = 0.0;
    double z_exact = 0.0;
    double demand_exact = 0.0;
    double beta_dc = 0.0;   // must be << 1
    double beta_k_dc = 0.0; // must be >> 1
    bool small_spacing_ok = false;
    bool large_range_ok = false;
    double z_rel_err = 0.0;
    double demand_rel_err = 0.0;
};

UniformClosedForm uniform_closed_form(double delta_c, long count, double beta);

} // namespace prodisp

#endif
