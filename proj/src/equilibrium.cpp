#include "prodisp/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "prodisp/errors.hpp"
#include "prodisp/quadrature.hpp"

namespace prodisp {

namespace {

void require_beta(double beta) {
    if (!(beta >= 0.0) || !std::isfinite(beta))
        throw ValidationError("beta must be finite and >= 0 (got " + std::to_string(beta) + ")");
}

// Characteristic width of the integrand, used only to place quadrature nodes.
double integrand_scale(const FirmDistribution& dist, double beta) {
    double width;
    switch (dist.kind()) {
        case FirmDistribution::Kind::Pareto: width = dist.pareto_c0(); break;
        case FirmDistribution::Kind::Gb2: width = dist.gb2_params().b; break;
        default: width = 1.0; break;
    }
    if (beta > 0.0 && 1.0 / beta < width) return 1.0 / beta;
    return width;
}

// log of sum_k w c_k^n exp(-beta (c_k - c_min)) over the atoms
double log_shifted_sum(const FirmDistribution& dist, double beta, int n) {
    const long m = dist.atom_count();
    const double cmin = dist.atom_value(0);
    double acc = 0.0;
    for (long i = 0; i < m; ++i) {
        const double c = dist.atom_value(i);
        double term = std::exp(-beta * (c - cmin));
        for (int k = 0; k < n; ++k) term *= c;
        acc += term;
    }
    return std::log(acc * dist.atom_weight());
}

// log of integral c^n P^F(c) exp(-beta (c - lo)) dc for continuous kinds
double log_shifted_integral(const FirmDistribution& dist, double beta, int n) {
    if (dist.kind() == FirmDistribution::Kind::Exponential) {
        const double lam = dist.exponential_rate();
        // closed form: lam / (lam+beta)^(n+1) * n!
        double logv = std::log(lam) - (n + 1) * std::log(lam + beta);
        for (int k = 2; k <= n; ++k) logv += std::log(static_cast<double>(k));
        return logv;
    }
    const double lo = dist.support_lower_bound();
    auto f = [&dist, beta, n, lo](double c) {
        double v = dist.density(c) * std::exp(-beta * (c - lo));
        for (int k = 0; k < n; ++k) v *= c;
        return v;
    };
    QuadOptions opts;
    opts.rel_tol = 1e-10;
    const double v = integrate_upper_or_throw(f, lo, integrand_scale(dist, beta), opts,
                                              "partition/moment integral");
    if (!(v > 0.0)) throw ConvergenceError("moment integral evaluated to a nonpositive value", 0.0);
    return std::log(v);
}

double log_weighted(const FirmDistribution& dist, double beta, int n) {
    return dist.is_discrete() ? log_shifted_sum(dist, beta, n)
                              : log_shifted_integral(dist, beta, n);
}

double shift(const FirmDistribution& dist) {
    return dist.is_discrete() ? dist.atom_value(0) : dist.support_lower_bound();
}

} // namespace

double log_partition_function(const FirmDistribution& dist, double beta) {
    require_beta(beta);
    return log_weighted(dist, beta, 0) - beta * shift(dist);
}

double partition_function(const FirmDistribution& dist, double beta) {
    return std::exp(log_partition_function(dist, beta));
}

double moment(const FirmDistribution& dist, double beta, int n) {
    require_beta(beta);
    if (n < 0 || n > 2) throw ValidationError("moment order must be 0, 1 or 2");
    if (n == 0) return 1.0;
    if (beta == 0.0) {
        if (!dist.has_finite_moment(n))
            throw DomainError(std::string("moment of order ") + std::to_string(n) +
                              " diverges at beta = 0 for this " + dist.kind_name() +
                              " distribution");
        return dist.unweighted_moment(n); // closed forms, no quadrature
    }
    return std::exp(log_weighted(dist, beta, n) - log_weighted(dist, beta, 0));
}

double demand_of_beta(const FirmDistribution& dist, double beta) {
    return moment(dist, beta, 1);
}

double beta_of_demand(const FirmDistribution& dist, double demand) {
    const double lo = dist.support_lower_bound();
    const bool finite_mean = dist.has_finite_moment(1);
    const double mean0 = finite_mean ? dist.unweighted_moment(1) : 0.0;
    if (!(demand > lo) || (finite_mean && !(demand < mean0))) {
        const std::string hi = finite_mean ? std::to_string(mean0) : "inf";
        throw DomainError("demand " + std::to_string(demand) +
                          " outside the attainable open interval (" + std::to_string(lo) + ", " +
                          hi + ")");
    }

    // bracket: D(beta) is strictly decreasing
    double blo = 0.0, bhi = 1.0 / std::max(demand - lo, 1e-300);
    if (!finite_mean) {
        blo = bhi;
        while (demand_of_beta(dist, blo) < demand) {
            blo *= 0.25;
            if (blo < 1e-300)
                throw ConvergenceError("beta_of_demand: could not bracket from below", blo);
        }
    }
    while (demand_of_beta(dist, bhi) > demand) {
        bhi *= 4.0;
        if (bhi > 1e300) throw ConvergenceError("beta_of_demand: could not bracket from above", bhi);
    }
    if (blo > bhi * 0.25) blo = 0.0; // bracket degenerate only when mean is infinite

    // bisection to ~1e-3 relative
    for (int it = 0; it < 200; ++it) {
        const double mid = blo > 0.0 ? std::sqrt(blo * bhi) : 0.5 * (blo + bhi);
        if (demand_of_beta(dist, mid) > demand)
            blo = mid;
        else
            bhi = mid;
        if (bhi - blo <= 1e-3 * bhi) break;
    }

    // Newton with dD/dbeta = -(<c^2> - <c>^2)
    double beta = 0.5 * (blo + bhi);
    for (int it = 0; it < 60; ++it) {
        const double d = demand_of_beta(dist, beta);
        const double var = moment(dist, beta, 2) - d * d;
        double next = beta + (d - demand) / var;
        if (!(next > blo && next < bhi)) next = 0.5 * (blo + bhi);
        if (d > demand)
            blo = beta;
        else
            bhi = beta;
        const double step = std::abs(next - beta);
        beta = next;
        if (step <= 1e-12 * std::max(beta, 1e-300)) break;
    }
    return beta;
}

double EquilibriumState::worker_density(double c) const {
    if (discrete) throw DomainError("worker_density: continuous kinds only");
    if (c < source.support_lower_bound()) return 0.0;
    return source.density(c) * std::exp(-beta * c - log_partition);
}

double EquilibriumState::stored_mass() const {
    if (discrete) {
        double s = 0.0;
        for (double w : weight) s += w;
        return s;
    }
    double s = head_mass + tail_mass;
    for (std::size_t i = 0; i + 1 < support.size(); ++i)
        s += 0.5 * (weight[i] + weight[i + 1]) * (support[i + 1] - support[i]);
    return s;
}

double EquilibriumState::stored_first_moment() const {
    double s = 0.0;
    if (discrete) {
        for (std::size_t i = 0; i < support.size(); ++i) s += support[i] * weight[i];
        return s;
    }
    s = head_mass * support.front() + tail_mass * support.back(); // crude ends, tiny masses
    for (std::size_t i = 0; i + 1 < support.size(); ++i) {
        const double cm = 0.5 * (support[i] + support[i + 1]);
        s += cm * 0.5 * (weight[i] + weight[i + 1]) * (support[i + 1] - support[i]);
    }
    return s;
}

double EquilibriumState::sample(Rng& rng) const {
    const double u = rng.uniform_pos(); // target survival value
    if (discrete) {
        double acc = 0.0;
        for (std::size_t i = 0; i < support.size(); ++i) {
            acc += weight[i];
            if (u <= acc) return support[i];
        }
        return support.back();
    }
    // survival is decreasing; find cell with survival[i] >= u >= survival[i+1]
    const auto it = std::lower_bound(survival.begin(), survival.end(), u,
                                     [](double s, double target) { return s > target; });
    if (it == survival.begin()) return support.front();
    if (it == survival.end()) return support.back();
    const std::size_t j = static_cast<std::size_t>(it - survival.begin());
    const double s1 = survival[j - 1], s2 = survival[j];
    const double t = s1 > s2 ? (s1 - u) / (s1 - s2) : 0.5;
    // log-linear in c within the cell
    return support[j - 1] * std::pow(support[j] / support[j - 1], t);
}

EquilibriumState worker_distribution(const FirmDistribution& dist, double beta,
                                     int grid_points) {
    require_beta(beta);
    EquilibriumState st;
    st.beta = beta;
    st.source = dist;
    st.log_partition = log_partition_function(dist, beta);
    st.partition_value = std::exp(st.log_partition);
    st.demand = demand_of_beta(dist, beta);
    st.discrete = dist.is_discrete();

    if (st.discrete) {
        const long m = dist.atom_count();
        const double cmin = dist.atom_value(0);
        st.support.resize(m);
        st.weight.resize(m);
        double norm = 0.0;
        for (long i = 0; i < m; ++i) {
            st.support[i] = dist.atom_value(i);
            st.weight[i] = std::exp(-beta * (st.support[i] - cmin));
            norm += st.weight[i];
        }
        st.survival.resize(m);
        double tail = 0.0;
        for (long i = m - 1; i >= 0; --i) {
            st.weight[i] /= norm;
            tail += st.weight[i];
            st.survival[i] = tail;
        }
        return st;
    }

    if (grid_points < 16) throw ValidationError("worker_distribution: grid too small");
    const double lo = dist.support_lower_bound();
    const double scale = integrand_scale(dist, beta);
    // unnormalized, shifted worker weight; stable for large beta
    auto g = [&dist, beta, lo](double c) {
        return dist.density(c) * std::exp(-beta * (c - lo));
    };
    QuadOptions cell_opts;
    cell_opts.rel_tol = 1e-9;
    cell_opts.max_intervals = 200;

    // choose grid bounds: strictly positive start, upper end near quantile
    // 1 - 1e-6 of the worker distribution
    double glo = lo;
    if (glo <= 0.0) glo = scale * 1e-9;
    double ghi = dist.upper_quantile(1e-7); // firm-side bound
    if (beta > 0.0) {
        // the Boltzmann factor pulls the worker quantile far below the firm
        // quantile; shrink while the relative tail stays under 1e-7
        const double z_all = integrate_upper(g, lo, scale, cell_opts).value;
        const double cand = std::max(glo * 1.01, glo + 40.0 / beta);
        if (cand < ghi && integrate_upper(g, cand, 1.0 / beta, cell_opts).value <= 1e-7 * z_all)
            ghi = cand;
        while (integrate_upper(g, ghi, scale, cell_opts).value > 2e-7 * z_all &&
               ghi < 1e12 * scale)
            ghi *= 2.0;
    }
    if (ghi <= glo * (1.0 + 1e-12)) ghi = glo * 2.0;

    const int n = grid_points;
    st.support.resize(n);
    st.weight.resize(n);
    st.survival.resize(n);
    const double ratio = std::log(ghi / glo) / (n - 1);
    for (int i = 0; i < n; ++i) st.support[i] = glo * std::exp(ratio * i);
    st.support[n - 1] = ghi;

    std::vector<double> cell(n - 1);
    double mass = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
        cell[i] = integrate(g, st.support[i], st.support[i + 1], cell_opts).value;
        mass += cell[i];
    }
    const double head = glo > lo ? integrate(g, lo, glo, cell_opts).value : 0.0;
    const double tail = integrate_upper(g, ghi, scale, cell_opts).value;
    const double total = head + mass + tail;
    if (!(total > 0.0)) throw ConvergenceError("worker_distribution: zero total mass", 0.0);

    st.head_mass = head / total;
    st.tail_mass = tail / total;
    double acc = tail;
    for (int i = n - 1; i >= 0; --i) {
        st.survival[i] = acc / total;
        if (i > 0) acc += cell[i - 1];
    }
    const double log_total = std::log(total) - beta * lo; // = log Z via this route
    for (int i = 0; i < n; ++i)
        st.weight[i] = dist.density(st.support[i]) * std::exp(-beta * st.support[i] - log_total);
    return st;
}

UniformClosedForm uniform_closed_form(double delta_c, long count, double beta) {
    if (!(delta_c > 0.0) || count < 1) throw ValidationError("uniform_closed_form: bad grid");
    if (!(beta > 0.0)) throw ValidationError("uniform_closed_form: beta must be > 0");
    UniformClosedForm r;
    r.beta_dc = beta * delta_c;
    r.beta_k_dc = beta * static_cast<double>(count) * delta_c;
    r.small_spacing_ok = r.beta_dc < 0.1;
    r.large_range_ok = r.beta_k_dc > 10.0;
    r.z_approx = 1.0 / (beta * delta_c);
    r.demand_approx = 1.0 / beta;

    // exact geometric sums, x = e^(-beta dc):
    //   Z      = x (1 - x^K) / (1 - x)
    //   sum kx^k = x (1 - (K+1) x^K + K x^(K+1)) / (1-x)^2
    const double K = static_cast<double>(count);
    const double one_minus_x = -std::expm1(-r.beta_dc);
    const double x = std::exp(-r.beta_dc);
    const double xK = std::exp(-r.beta_k_dc);
    r.z_exact = x * (1.0 - xK) / one_minus_x;
    r.demand_exact =
        delta_c * (1.0 - (K + 1.0) * xK + K * xK * x) / (one_minus_x * (1.0 - xK));
    r.z_rel_err = std::abs(r.z_approx - r.z_exact) / r.z_exact;
    r.demand_rel_err = std::abs(r.demand_approx - r.demand_exact) / r.demand_exact;
    return r;
}

} // namespace prodisp
