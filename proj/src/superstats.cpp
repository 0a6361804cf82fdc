#include "prodisp/superstats.hpp"

#include <algorithm>
#include <cmath>

#include "prodisp/equilibrium.hpp"
#include "prodisp/errors.hpp"
#include "prodisp/quadrature.hpp"
#include "prodisp/special.hpp"

namespace prodisp {

void SuperstatConfig::validate() const {
    if (!(gamma < 1.0))
        throw ValidationError("superstat: gamma must be < 1 for an integrable f(beta)");
    if (!(beta_max > 0.0)) throw ValidationError("superstat: beta_max must be positive");
    if (firm_dist.kind() != FirmDistribution::Kind::Pareto)
        throw ValidationError("superstat: firm distribution must be of pareto kind");
}

BoltzmannFactor generalized_boltzmann(const SuperstatConfig& cfg, double c) {
    cfg.validate();
    if (!(c >= 0.0)) throw ValidationError("generalized_boltzmann: c must be >= 0");
    // beta = beta_max v^(1/(1-gamma)) absorbs the beta^(-gamma) endpoint
    // exactly: B(c) = integral_0^1 exp(-beta_max c v^(1/(1-gamma))) dv
    const double inv = 1.0 / (1.0 - cfg.gamma);
    const double bc = cfg.beta_max * c;
    auto f = [inv, bc](double v) { return std::exp(-bc * std::pow(v, inv)); };
    QuadOptions opts;
    opts.rel_tol = 1e-11;
    const QuadResult r = integrate(f, 0.0, 1.0, opts);
    if (!r.converged)
        throw ConvergenceError("generalized_boltzmann: quadrature stalled near beta -> 0 (error " +
                                   std::to_string(r.error) + " after " +
                                   std::to_string(r.evaluations) + " evaluations over " +
                                   std::to_string(opts.max_intervals) + " intervals)",
                               r.error);
    return {r.value, r.error, r.evaluations};
}

double bfactor_asymptotic(const SuperstatConfig& cfg, double c) {
    cfg.validate();
    if (!(c > 0.0)) throw ValidationError("bfactor_asymptotic: c must be > 0");
    return (1.0 - cfg.gamma) * std::tgamma(1.0 - cfg.gamma) *
           std::pow(cfg.beta_max * c, cfg.gamma - 1.0);
}

double SuperWorker::stored_mass() const {
    double s = head_mass + tail_mass;
    for (std::size_t i = 0; i + 1 < support.size(); ++i)
        s += 0.5 * (density[i] + density[i + 1]) * (support[i + 1] - support[i]);
    return s;
}

double SuperWorker::sample(Rng& rng) const {
    const double u = rng.uniform_pos();
    const auto it = std::lower_bound(survival.begin(), survival.end(), u,
                                     [](double s, double target) { return s > target; });
    if (it == survival.begin()) return support.front();
    if (it == survival.end()) return support.back();
    const std::size_t j = static_cast<std::size_t>(it - survival.begin());
    const double s1 = survival[j - 1], s2 = survival[j];
    const double t = s1 > s2 ? (s1 - u) / (s1 - s2) : 0.5;
    return support[j - 1] * std::pow(support[j] / support[j - 1], t);
}

SuperWorker worker_dist_super(const SuperstatConfig& cfg, int grid_points) {
    cfg.validate();
    if (grid_points < 16) throw ValidationError("worker_dist_super: grid too small");
    SuperWorker w;
    w.mu_f = cfg.firm_dist.pareto_mu();
    w.gamma = cfg.gamma;
    w.mu_w_predicted = w.mu_f - cfg.gamma + 1.0;

    auto g = [&cfg](double c) {
        return cfg.firm_dist.density(c) * generalized_boltzmann(cfg, c).value;
    };
    const double lo = cfg.firm_dist.support_lower_bound();
    // span to roughly the 1 - 1e-6 worker quantile using the predicted tail
    const double hi = lo * std::pow(1e6, 1.0 / w.mu_w_predicted) * 4.0;

    const int n = grid_points;
    w.support.resize(n);
    const double step = std::log(hi / lo) / (n - 1);
    for (int i = 0; i < n; ++i) w.support[i] = lo * std::exp(step * i);
    w.support[n - 1] = hi;

    QuadOptions opts;
    opts.rel_tol = 1e-8;
    opts.max_intervals = 100;
    std::vector<double> cell(n - 1);
    double mass = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
        cell[i] = integrate(g, w.support[i], w.support[i + 1], opts).value;
        mass += cell[i];
    }
    const double tail = integrate_upper(g, hi, hi, opts).value;
    const double total = mass + tail;
    if (!(total > 0.0)) throw ConvergenceError("worker_dist_super: zero total mass", 0.0);

    w.head_mass = 0.0;
    w.tail_mass = tail / total;
    w.log_norm = std::log(total);
    w.density.resize(n);
    w.survival.resize(n);
    double acc = tail;
    for (int i = n - 1; i >= 0; --i) {
        w.survival[i] = acc / total;
        if (i > 0) acc += cell[i - 1];
        w.density[i] = g(w.support[i]) / total;
    }
    return w;
}

namespace {

double branch_weight(double mu_coarse) {
    if (!(mu_coarse > 1.0))
        throw DomainError("index algebra requires a coarse-level index > 1");
    return std::min(mu_coarse - 1.0, 1.0);
}

} // namespace

double mu_worker_of(double mu_f, double delta) {
    if (!(delta < 1.0)) throw DomainError("index algebra requires delta < 1");
    return mu_f + (1.0 - delta) * branch_weight(mu_f);
}

double delta_of(double mu_f, double mu_w) {
    if (!(mu_w > mu_f))
        throw DomainError("inconsistent indices: the finer level must have the larger index "
                          "(would imply delta >= 1)");
    return 1.0 - (mu_w - mu_f) / branch_weight(mu_f);
}

double mu_coarse_of(double mu_fine, double delta) {
    if (!(delta < 1.0)) throw DomainError("index algebra requires delta < 1");
    if (!(mu_fine > 1.0)) throw DomainError("index algebra requires a fine-level index > 1");
    const double boundary = 3.0 - delta; // image of mu_coarse = 2
    if (mu_fine >= boundary) return mu_fine + delta - 1.0;
    return (mu_fine + 1.0 - delta) / (2.0 - delta);
}

double gamma_of_delta(double mu_f, double delta) {
    if (!(delta < 1.0)) throw DomainError("index algebra requires delta < 1");
    return 1.0 + (delta - 1.0) * branch_weight(mu_f);
}

double delta_of_gamma(double mu_f, double gamma) {
    if (!(gamma < 1.0)) throw DomainError("index algebra requires gamma < 1");
    return 1.0 + (gamma - 1.0) / branch_weight(mu_f);
}

void DemandLaw::validate() const {
    if (!(delta < 1.0)) throw ValidationError("demand law: delta must be < 1 (normalizability)");
    if (!(mu_f > 1.0))
        throw ValidationError("demand law: mu_f must be > 1 for a finite mean ceiling");
    if (!(mean_ceiling > 0.0) || !std::isfinite(mean_ceiling))
        throw ValidationError("demand law: mean ceiling must be finite and positive");
    if (!(d_lo > 0.0 && d_lo < mean_ceiling))
        throw ValidationError("demand law: need 0 < d_lo < mean ceiling");
}

double DemandDensity::pdf(double d) const {
    if (d < law.d_lo || d >= law.mean_ceiling) return 0.0;
    const double smax = law.mean_ceiling - law.d_lo;
    const double s = law.mean_ceiling - d;
    return (1.0 - law.delta) / std::pow(smax, 1.0 - law.delta) * std::pow(s, -law.delta);
}

double DemandDensity::quantile(double u) const {
    const double smax = law.mean_ceiling - law.d_lo;
    return law.mean_ceiling - smax * std::pow(1.0 - u, 1.0 / (1.0 - law.delta));
}

DemandDensity demand_density(const DemandLaw& law) {
    law.validate();
    return DemandDensity{law};
}

ScalingFit verify_small_beta_scaling(const FirmDistribution& dist,
                                     const std::vector<double>& beta_grid) {
    if (dist.kind() != FirmDistribution::Kind::Pareto)
        throw ValidationError("verify_small_beta_scaling: pareto kind required");
    const double mu = dist.pareto_mu();
    if (!(mu > 1.0)) throw ValidationError("verify_small_beta_scaling: mu_F > 1 required");
    if (mu == 2.0)
        throw ValidationError(
            "verify_small_beta_scaling: mu_F = 2 is the logarithmic boundary case");
    if (beta_grid.size() < 3)
        throw ValidationError("verify_small_beta_scaling: need at least 3 grid points");

    const double mean0 = dist.unweighted_moment(1);
    std::vector<double> lx, ly;
    lx.reserve(beta_grid.size());
    ly.reserve(beta_grid.size());
    for (double b : beta_grid) {
        if (!(b > 0.0)) throw ValidationError("verify_small_beta_scaling: grid must be positive");
        const double gap = mean0 - demand_of_beta(dist, b);
        if (!(gap > 0.0)) continue;
        lx.push_back(std::log(b));
        ly.push_back(std::log(gap));
    }
    ScalingFit fit;
    fit.expected_slope = mu > 2.0 ? 1.0 : mu - 1.0;
    if (lx.size() < 3) {
        fit.note = "fewer than 3 usable grid points";
        return fit;
    }
    const LineFit line = fit_line(lx.data(), ly.data(), static_cast<int>(lx.size()));
    fit.slope = line.slope;
    fit.intercept = line.intercept;
    fit.r_squared = line.r_squared;
    fit.ok = fit.r_squared > 0.999;
    if (!fit.ok)
        fit.note = "poor fit: R^2 <= 0.999, beta grid is outside the asymptotic regime";
    return fit;
}

} // namespace prodisp
