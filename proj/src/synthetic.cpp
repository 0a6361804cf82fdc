#include "prodisp/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "prodisp/equilibrium.hpp"
#include "prodisp/errors.hpp"

namespace prodisp {

namespace {

std::string padded_id(const char* prefix, long i, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%0*ld", prefix, width, i);
    return buf;
}

// multinomial via conditional binomials over the weight vector
void allocate_workers(std::mt19937_64& engine, long n, const std::vector<double>& weights,
                      std::vector<long>& out) {
    double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    long remaining = n;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (remaining <= 0 || wsum <= 0.0) break;
        if (i + 1 == weights.size()) {
            out[i] += remaining;
            break;
        }
        const double p = std::min(1.0, weights[i] / wsum);
        std::binomial_distribution<long> bin(remaining, p);
        const long take = bin(engine);
        out[i] += take;
        remaining -= take;
        wsum -= weights[i];
    }
}

} // namespace

SyntheticEconomy generate_synthetic_economy(const FirmDistribution& dist, const DemandLaw& law,
                                            const GenerateParams& params, std::uint64_t seed) {
    law.validate();
    if (!dist.has_finite_moment(1))
        throw ValidationError("generate: firm distribution needs a finite mean (mu_F > 1)");
    const DemandDensity demand = demand_density(law);

    SyntheticEconomy eco;
    eco.mean_ceiling = law.mean_ceiling;
    Rng rng(seed);
    std::mt19937_64 alloc_engine(child_seed(seed, 0x10000));

    const long K = params.firms;
    const int id_width = K >= 10000 ? 6 : 4;
    std::vector<double> c(static_cast<std::size_t>(K));
    std::vector<double> boltzmann(static_cast<std::size_t>(K));
    std::vector<long> workers(static_cast<std::size_t>(K));
    std::vector<int> sector(static_cast<std::size_t>(K));

    for (long y = 0; y < params.years; ++y) {
        const int year = params.start_year + static_cast<int>(y);
        for (long i = 0; i < K; ++i) c[static_cast<std::size_t>(i)] = dist.sample(rng);

        // sector labels by scenario rule
        if (params.sector_rule == "random") {
            for (long i = 0; i < K; ++i)
                sector[static_cast<std::size_t>(i)] =
                    static_cast<int>(rng.uniform() * static_cast<double>(params.sectors));
        } else { // size-stratified: contiguous blocks of the c-order
            std::vector<std::size_t> idx(static_cast<std::size_t>(K));
            std::iota(idx.begin(), idx.end(), 0);
            std::stable_sort(idx.begin(), idx.end(),
                             [&c](std::size_t a, std::size_t b) { return c[a] < c[b]; });
            for (long r = 0; r < K; ++r)
                sector[idx[static_cast<std::size_t>(r)]] =
                    static_cast<int>((r * params.sectors) / K);
        }

        std::fill(workers.begin(), workers.end(), 0L);
        const double cmin = *std::min_element(c.begin(), c.end());
        for (long m = 0; m < params.periods_per_year; ++m) {
            const double d = demand.sample(rng);
            const double beta = beta_of_demand(dist, d);
            eco.demand_draws.push_back(d);
            eco.beta_draws.push_back(beta);
            for (long i = 0; i < K; ++i)
                boltzmann[static_cast<std::size_t>(i)] =
                    std::exp(-beta * (c[static_cast<std::size_t>(i)] - cmin));
            allocate_workers(alloc_engine, params.workers, boltzmann, workers);
        }

        auto& rows = eco.panel.by_year[year];
        for (long i = 0; i < K; ++i) {
            const long L = workers[static_cast<std::size_t>(i)];
            if (L == 0) continue; // no workers all year: no output to report
            FirmRecord rec;
            rec.firm_id = padded_id("f", i + 1, id_width);
            rec.year = year;
            rec.workers = static_cast<double>(L);
            rec.output = c[static_cast<std::size_t>(i)] * rec.workers;
            rec.productivity = rec.output / rec.workers;
            rec.sector = padded_id("s", sector[static_cast<std::size_t>(i)] + 1, 2);
            rows.push_back(std::move(rec));
        }
        if (rows.empty()) eco.panel.by_year.erase(year);
    }
    return eco;
}

} // namespace prodisp
