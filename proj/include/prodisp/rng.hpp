#ifndef PRODISP_RNG_HPP
#define PRODISP_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace prodisp {

// SplitMix64 step; also the seed-splitting rule for parallel replicas:
// child k of a master seed is the k-th output of a SplitMix64 stream
// seeded with the master.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t child_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t s = master;
    std::uint64_t out = 0;
    for (std::uint64_t k = 0; k <= index; ++k) out = splitmix64(s);
    return out;
}

// mt19937_64 with hand-rolled variate transforms so that streams are
// reproducible independent of the standard library's distribution
// implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t bits() { return engine_(); }

    // uniform on [0, 1)
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform on (0, 1]; safe as a log argument
    double uniform_pos() { return 1.0 - uniform(); }

    double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

    double normal() {
        // polar Marsaglia; one deviate consumed per call, spare cached
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

    // Marsaglia-Tsang for shape >= 1, boost trick for shape < 1
    double gamma(double shape) {
        if (shape < 1.0) {
            const double g = gamma(shape + 1.0);
            return g * std::pow(uniform_pos(), 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_pos();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double beta(double p, double q) {
        const double x = gamma(p);
        const double y = gamma(q);
        return x / (x + y);
    }

    double pareto(double mu, double c0) { return c0 * std::pow(uniform_pos(), -1.0 / mu); }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace prodisp

#endif
