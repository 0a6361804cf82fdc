#ifndef PRODISP_SUPERSTATS_HPP
#define PRODISP_SUPERSTATS_HPP

#include <string>
#include <vector>

#include "prodisp/distribution.hpp"
#include "prodisp/rng.hpp"

namespace prodisp {

// Fluctuating-demand layer: inverse temperatures are mixed with weight
// f(beta) = (1-gamma) beta^(-gamma) / beta_max^(1-gamma) on (0, beta_max].
struct SuperstatConfig {
    double gamma = 0.0;
    double beta_max = 1.0;
    FirmDistribution firm_dist = FirmDistribution::pareto(1.5, 1.0);

    void validate() const;
};

struct BoltzmannFactor {
    double value = 0.0;
    double error = 0.0; // quadrature error estimate
    int evaluations = 0;
};

// B(c) = integral f(beta) e^(-beta c) dbeta; B(0) = 1
BoltzmannFactor generalized_boltzmann(const SuperstatConfig& cfg, double c);

// large-c form (1-gamma) Gamma(1-gamma) (beta_max)^(gamma-1) c^(gamma-1),
// normalized so generalized_boltzmann / bfactor_asymptotic -> 1
double bfactor_asymptotic(const SuperstatConfig& cfg, double c);

// P^W(c) = P^F(c) B(c) / Z_B on a log-spaced grid
struct SuperWorker {
    std::vector<double> support;
    std::vector<double> density;
    std::vector<double> survival;
    double head_mass = 0.0;
    double tail_mass = 0.0;
    double log_norm = 0.0; // log Z_B
    double mu_f = 0.0;
    double gamma = 0.0;
    double mu_w_predicted = 0.0; // mu_f - gamma + 1

    double sample(Rng& rng) const;
    double stored_mass() const;
};

SuperWorker worker_dist_super(const SuperstatConfig& cfg, int grid_points = 2048);

// Index algebra across aggregation levels. Both branches share the form
// mu_fine = mu_coarse + (1 - delta) * min(mu_coarse - 1, 1), which makes
// them identical computations at the mu_coarse = 2 boundary.
double mu_worker_of(double mu_f, double delta);
double delta_of(double mu_f, double mu_w);
// inverse of mu_worker_of in its first argument (one aggregation step up)
double mu_coarse_of(double mu_fine, double delta);
// gamma = 1 + (delta - 1) * min(mu_f - 1, 1) and its inverse
double gamma_of_delta(double mu_f, double delta);
double delta_of_gamma(double mu_f, double gamma);

// f_D(D) proportional to (mean_ceiling - D)^(-delta) on [d_lo, mean_ceiling)
struct DemandLaw {
    double delta = 0.0;
    double mean_ceiling = 0.0; // <c>_0 of the firm distribution
    double mu_f = 1.5;
    double d_lo = 0.0;

    void validate() const;
};

struct DemandDensity {
    DemandLaw law;

    double pdf(double d) const;
    double quantile(double u) const; // inverse CDF
    double sample(Rng& rng) const { return quantile(rng.uniform()); }
};

DemandDensity demand_density(const DemandLaw& law);

// log-log regression of <c>_0 - D(beta) against beta over the grid;
// expected slope 1 for mu_F > 2, mu_F - 1 for 1 < mu_F < 2
struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double expected_slope = 0.0;
    bool ok = false; // r_squared > 0.999
    std::string note;
};

ScalingFit verify_small_beta_scaling(const FirmDistribution& dist,
                                     const std::vector<double>& beta_grid);

} // namespace prodisp

#endif
