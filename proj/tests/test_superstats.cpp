#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "prodisp/errors.hpp"
#include "prodisp/fitting.hpp"
#include "prodisp/quadrature.hpp"
#include "prodisp/rng.hpp"
#include "prodisp/superstats.hpp"

using namespace prodisp;

namespace {

SuperstatConfig cfg_of(double gamma, double beta_max, double mu = 1.5) {
    SuperstatConfig cfg;
    cfg.gamma = gamma;
    cfg.beta_max = beta_max;
    cfg.firm_dist = FirmDistribution::pareto(mu, 1.0);
    return cfg;
}

} // namespace

TEST_CASE("generalized Boltzmann factor") {
    for (double g : {0.0, 0.5, 0.9, -1.0}) {
        CHECK(generalized_boltzmann(cfg_of(g, 3.0), 0.0).value ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
    // gamma = 0 closed form (1 - e^(-bm c))/(bm c)
    const SuperstatConfig flat = cfg_of(0.0, 2.5);
    for (double c : {0.1, 1.0, 10.0, 500.0}) {
        const double expect = -std::expm1(-2.5 * c) / (2.5 * c);
        CHECK(generalized_boltzmann(flat, c).value == doctest::Approx(expect).epsilon(1e-10));
    }
    // strictly decreasing in c
    const SuperstatConfig half = cfg_of(0.5, 1.0);
    double prev = 1.0;
    for (double c : {0.5, 1.0, 5.0, 50.0, 5000.0}) {
        const double b = generalized_boltzmann(half, c).value;
        CHECK(b < prev);
        CHECK(b > 0.0);
        prev = b;
    }
    CHECK_THROWS_AS(generalized_boltzmann(cfg_of(1.2, 1.0), 1.0), ValidationError);
}

TEST_CASE("asymptotic form") {
    // gamma = 0: 1/(beta_max c) shape
    CHECK(bfactor_asymptotic(cfg_of(0.0, 4.0), 10.0) ==
          doctest::Approx(1.0 / 40.0).epsilon(1e-14));
    // ratio tends to 1 for c >> 1/beta_max, closing as c grows
    const SuperstatConfig half = cfg_of(0.5, 1.0);
    const double r1 = generalized_boltzmann(half, 2.0).value / bfactor_asymptotic(half, 2.0);
    const double r2 = generalized_boltzmann(half, 8.0).value / bfactor_asymptotic(half, 8.0);
    CHECK(std::abs(r2 - 1.0) < std::abs(r1 - 1.0));
    // acceptance band at c = 1e3/beta_max for all four exponents
    for (double g : {0.0, 0.25, 0.5, 0.75}) {
        const SuperstatConfig cfg = cfg_of(g, 7.0);
        const double c = 1e3 / cfg.beta_max;
        const double ratio =
            generalized_boltzmann(cfg, c).value / bfactor_asymptotic(cfg, c);
        CHECK(ratio > 0.98);
        CHECK(ratio < 1.02);
    }
    // un-normalized amplitude carries the Gamma(1-gamma) pole
    auto amplitude = [](double g) {
        const SuperstatConfig cfg = cfg_of(g, 1.0);
        return bfactor_asymptotic(cfg, 1.0) / (1.0 - g);
    };
    CHECK(amplitude(0.99) > 99.0);
    CHECK(amplitude(0.999) > 999.0);
}

TEST_CASE("superstatistical worker distribution") {
    // mu_F = 1.5, gamma = 0.5: worker tail index 2.0, read off the tabulated tail
    SuperstatConfig cfg = cfg_of(0.5, 100.0 / 3.0);
    const SuperWorker w = worker_dist_super(cfg);
    CHECK(w.mu_w_predicted == doctest::Approx(2.0));
    // normalization by an independent quadrature route (checks Z_B)
    const double mass_quad = integrate_upper(
        [&cfg, &w](double c) {
            return cfg.firm_dist.density(c) * generalized_boltzmann(cfg, c).value *
                   std::exp(-w.log_norm);
        },
        1.0, 1.0, QuadOptions{1e-8, 0.0, 400}).value;
    CHECK(mass_quad == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(w.stored_mass() == doctest::Approx(1.0).epsilon(1e-4)); // trapezoid gauge
    // weighted Hill over the deep tabulated tail
    std::vector<double> mass(w.support.size(), 0.0);
    for (std::size_t i = 0; i + 1 < w.support.size(); ++i)
        mass[i] = w.survival[i] - w.survival[i + 1];
    double lo = w.support.front();
    for (std::size_t i = 0; i < w.support.size(); ++i)
        if (w.survival[i] > 1e-3) lo = w.support[i];
    const double mu_hat = hill_window_weighted(w.support, mass, lo, w.support.back());
    CHECK(std::abs(mu_hat - 2.0) / 2.0 < 0.03);

    // survival decreasing
    for (std::size_t i = 1; i < w.survival.size(); ++i) CHECK(w.survival[i] <= w.survival[i - 1]);

    // suppression vanishes as gamma -> 1: prediction approaches mu_F
    CHECK(mu_worker_of(1.5, 1.0 - 1e-9) == doctest::Approx(1.5).epsilon(1e-8));

    // heavier worker tail for delta = -1 than delta = -2 (fixed mu_F = 1.5)
    const SuperWorker w1 = worker_dist_super(cfg_of(gamma_of_delta(1.5, -1.0), 100.0 / 3.0));
    const SuperWorker w2 = worker_dist_super(cfg_of(gamma_of_delta(1.5, -2.0), 100.0 / 3.0));
    auto survival_at = [](const SuperWorker& sw, double c) {
        std::size_t i = 0;
        while (i + 1 < sw.support.size() && sw.support[i] < c) ++i;
        return sw.survival[i];
    };
    for (double c : {50.0, 200.0, 1000.0})
        CHECK(survival_at(w1, c) > survival_at(w2, c));
}

TEST_CASE("sampling the tabulated worker distribution") {
    const SuperWorker w = worker_dist_super(cfg_of(0.5, 33.0));
    Rng rng(11);
    const int n = 30000;
    const std::size_t probe = w.support.size() / 3;
    int above = 0;
    for (int i = 0; i < n; ++i)
        if (w.sample(rng) > w.support[probe]) ++above;
    const double p = w.survival[probe];
    CHECK(std::abs(above / static_cast<double>(n) - p) <
          4.0 * std::sqrt(p * (1.0 - p) / n) + 1e-3);
}

TEST_CASE("index algebra") {
    CHECK(mu_worker_of(1.5, -1.0) == 2.5); // hand value, low branch
    CHECK(mu_worker_of(3.0, 0.5) == 3.5);  // hand value, high branch
    CHECK(delta_of(1.5, 2.5) == -1.0);
    CHECK(delta_of(3.0, 3.5) == 0.5);

    // branch continuity at mu_F = 2: the two textbook forms and the
    // implementation agree exactly there
    for (double d : {-2.0, -1.0, 0.0, 0.5, 0.9}) {
        const double high = 2.0 - d + 1.0;
        const double low = (2.0 - 1.0) * (1.0 - d) + 2.0;
        CHECK(high == low);
        CHECK(mu_worker_of(2.0, d) == high);
        CHECK(mu_worker_of(std::nextafter(2.0, 3.0), d) ==
              doctest::Approx(high).epsilon(1e-14));
        CHECK(mu_worker_of(std::nextafter(2.0, 1.0), d) ==
              doctest::Approx(high).epsilon(1e-14));
        // delta recovery at the boundary: (2, 2+eps) -> 1 - eps
        const double eps = 1e-6;
        CHECK(delta_of(2.0, 2.0 + eps) == doctest::Approx(1.0 - eps).epsilon(1e-9));
    }

    // ordering and inverse consistency on both branches
    for (double mu : {1.1, 1.5, 1.9, 2.0, 2.5, 3.5, 6.0}) {
        for (double d : {-3.0, -1.0, 0.0, 0.5, 0.99}) {
            const double w = mu_worker_of(mu, d);
            CHECK(w > mu);
            CHECK(delta_of(mu, w) == doctest::Approx(d).epsilon(1e-13));
            CHECK(mu_coarse_of(w, d) == doctest::Approx(mu).epsilon(1e-13));
        }
    }

    // fixed point at (1,1): |mu_W(1+eps) - 1| <= C eps
    for (double d : {-2.0, -1.0, 0.0, 0.5}) {
        const double eps = 1e-3;
        CHECK(std::abs(mu_worker_of(1.0 + eps, d) - 1.0) <= 5e-3);
    }

    // gamma <-> delta mapping matches the worker relation on both branches
    for (double mu : {1.5, 3.0}) {
        for (double d : {-1.0, 0.5}) {
            const double g = gamma_of_delta(mu, d);
            CHECK(mu_worker_of(mu, d) == doctest::Approx(mu - g + 1.0).epsilon(1e-14));
            CHECK(delta_of_gamma(mu, g) == doctest::Approx(d).epsilon(1e-14));
        }
    }

    CHECK_THROWS_AS(mu_worker_of(0.9, 0.0), DomainError);
    CHECK_THROWS_AS(mu_worker_of(1.5, 1.0), DomainError);
    CHECK_THROWS_AS(delta_of(2.0, 1.5), DomainError); // would imply delta >= 1
}

TEST_CASE("two-level composition walks the index toward one") {
    double mu = 3.2;
    const double deltas[2] = {-0.5, 0.3};
    for (int step = 0; step < 60; ++step) {
        const double next = mu_coarse_of(mu, deltas[step % 2]);
        CHECK(next <= mu);
        CHECK(next >= 1.0); // never driven below one
        if (next == 1.0 || next == mu) break;
        mu = next;
    }
    CHECK(mu == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("demand density") {
    DemandLaw law;
    law.delta = -1.0;
    law.mean_ceiling = 3.0;
    law.mu_f = 1.5;
    law.d_lo = 1.0;
    const DemandDensity lin = demand_density(law);
    // density vanishes linearly at the ceiling
    CHECK(lin.pdf(2.9) / lin.pdf(2.8) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(lin.pdf(3.0) == 0.0);

    // delta = 0: uniform on the interval
    law.delta = 0.0;
    const DemandDensity flat = demand_density(law);
    CHECK(flat.pdf(1.5) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(flat.pdf(2.9) == doctest::Approx(0.5).epsilon(1e-12));

    // delta = 0.5: integrable singularity; sampler agrees with quadrature
    law.delta = 0.5;
    const DemandDensity sing = demand_density(law);
    const double mass =
        integrate([&sing](double d) { return sing.pdf(d); }, 1.0, 3.0).value;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-7));
    const double mean_quad =
        integrate([&sing](double d) { return d * sing.pdf(d); }, 1.0, 3.0).value;
    Rng rng(5);
    double acc = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) acc += sing.sample(rng);
    const double mean_mc = acc / n;
    CHECK(mean_mc < 3.0);
    CHECK(mean_mc == doctest::Approx(mean_quad).epsilon(2e-3));

    // quantile is the inverse CDF
    for (double u : {0.1, 0.5, 0.9}) {
        const double d = sing.quantile(u);
        const double cdf = integrate([&sing](double x) { return sing.pdf(x); }, 1.0, d).value;
        CHECK(cdf == doctest::Approx(u).epsilon(1e-7));
    }
}

TEST_CASE("small-beta scaling of the demand gap") {
    std::vector<double> grid;
    for (int i = 0; i < 12; ++i) grid.push_back(std::pow(10.0, -6.0 + 3.0 * i / 11.0));

    ScalingFit fit = verify_small_beta_scaling(FirmDistribution::pareto(3.0, 1.0), grid);
    CHECK(fit.ok);
    CHECK(fit.expected_slope == 1.0);
    CHECK(std::abs(fit.slope - 1.0) < 0.03);
    CHECK(fit.r_squared > 0.999);

    fit = verify_small_beta_scaling(FirmDistribution::pareto(1.5, 1.0), grid);
    CHECK(fit.ok);
    CHECK(fit.expected_slope == 0.5);
    CHECK(std::abs(fit.slope - 0.5) < 0.03);

    // grid far outside the asymptotic regime: poor-fit diagnostic
    fit = verify_small_beta_scaling(FirmDistribution::pareto(1.5, 1.0), {0.3, 3.0, 30.0});
    CHECK_FALSE(fit.ok);
    CHECK(!fit.note.empty());

    CHECK_THROWS_AS(verify_small_beta_scaling(FirmDistribution::pareto(2.0, 1.0), grid),
                    ValidationError);
}
