#include "prodisp/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "prodisp/errors.hpp"
#include "prodisp/quadrature.hpp"

namespace prodisp {

FirmDistribution FirmDistribution::discrete_levels(std::vector<double> levels) {
    if (levels.empty()) throw ValidationError("discrete-levels: at least one level required");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!(levels[i] > 0.0)) throw ValidationError("discrete-levels: levels must be positive");
        if (i > 0 && !(levels[i] > levels[i - 1]))
            throw ValidationError("discrete-levels: levels must be strictly increasing");
    }
    FirmDistribution d;
    d.kind_ = Kind::DiscreteLevels;
    d.values_ = std::move(levels);
    return d;
}

FirmDistribution FirmDistribution::uniform_grid(double delta_c, long count) {
    if (!(delta_c > 0.0)) throw ValidationError("uniform-grid: spacing must be positive");
    if (count < 1) throw ValidationError("uniform-grid: count must be >= 1");
    FirmDistribution d;
    d.kind_ = Kind::UniformGrid;
    d.p1_ = delta_c;
    d.n_ = count;
    return d;
}

FirmDistribution FirmDistribution::pareto(double mu, double c0) {
    if (!(mu > 0.0)) throw ValidationError("pareto: index mu must be positive");
    if (!(c0 > 0.0)) throw ValidationError("pareto: scale c0 must be positive");
    FirmDistribution d;
    d.kind_ = Kind::Pareto;
    d.p1_ = mu;
    d.p2_ = c0;
    return d;
}

FirmDistribution FirmDistribution::exponential(double lambda) {
    if (!(lambda > 0.0)) throw ValidationError("exponential: rate must be positive");
    FirmDistribution d;
    d.kind_ = Kind::Exponential;
    d.p1_ = lambda;
    return d;
}

FirmDistribution FirmDistribution::gb2(const GB2Params& params) {
    params.validate();
    FirmDistribution d;
    d.kind_ = Kind::Gb2;
    d.gb2_ = params;
    return d;
}

FirmDistribution FirmDistribution::empirical(std::vector<double> sample) {
    if (sample.empty()) throw ValidationError("empirical-sample: nonempty sample required");
    for (double v : sample)
        if (!(v > 0.0)) throw ValidationError("empirical-sample: values must be positive");
    std::sort(sample.begin(), sample.end());
    FirmDistribution d;
    d.kind_ = Kind::EmpiricalSample;
    d.values_ = std::move(sample);
    return d;
}

const char* FirmDistribution::kind_name() const {
    switch (kind_) {
        case Kind::DiscreteLevels: return "discrete-levels";
        case Kind::UniformGrid: return "uniform-grid";
        case Kind::Pareto: return "pareto";
        case Kind::Exponential: return "exponential";
        case Kind::Gb2: return "gb2";
        case Kind::EmpiricalSample: return "empirical-sample";
    }
    return "?";
}

long FirmDistribution::atom_count() const {
    switch (kind_) {
        case Kind::DiscreteLevels:
        case Kind::EmpiricalSample: return static_cast<long>(values_.size());
        case Kind::UniformGrid: return n_;
        default: throw DomainError("atoms requested from a continuous distribution");
    }
}

double FirmDistribution::atom_value(long i) const {
    if (kind_ == Kind::UniformGrid) return p1_ * static_cast<double>(i + 1);
    return values_[static_cast<std::size_t>(i)];
}

double FirmDistribution::atom_weight() const {
    // level-sum convention for discrete kinds, normalized for samples
    return kind_ == Kind::EmpiricalSample ? 1.0 / static_cast<double>(values_.size()) : 1.0;
}

double FirmDistribution::support_lower_bound() const {
    switch (kind_) {
        case Kind::DiscreteLevels:
        case Kind::EmpiricalSample: return values_.front();
        case Kind::UniformGrid: return p1_;
        case Kind::Pareto: return p2_;
        case Kind::Exponential: return 0.0;
        case Kind::Gb2: return 0.0;
    }
    return 0.0;
}

double FirmDistribution::density(double c) const {
    switch (kind_) {
        case Kind::Pareto:
            if (c < p2_) return 0.0;
            return p1_ * std::pow(p2_ / c, p1_) / c;
        case Kind::Exponential: return c < 0.0 ? 0.0 : p1_ * std::exp(-p1_ * c);
        case Kind::Gb2: return gb2_.pdf(c);
        default: throw DomainError("density requested from a discrete distribution");
    }
}

bool FirmDistribution::has_finite_moment(int n) const {
    switch (kind_) {
        case Kind::Pareto: return p1_ > n;
        case Kind::Gb2: return gb2_.tail_index() > n;
        default: return true;
    }
}

double FirmDistribution::unweighted_moment(int n) const {
    if (n == 0) return kind_ == Kind::EmpiricalSample || !is_discrete()
                           ? 1.0
                           : static_cast<double>(atom_count());
    switch (kind_) {
        case Kind::DiscreteLevels:
        case Kind::UniformGrid:
        case Kind::EmpiricalSample: {
            // mean over atoms (level-sum convention divides by K as well:
            // <c^n>_0 = sum c^n / Z(0) and Z(0) = K)
            const long m = atom_count();
            double acc = 0.0;
            for (long i = 0; i < m; ++i) acc += std::pow(atom_value(i), n);
            return acc / static_cast<double>(m);
        }
        case Kind::Pareto:
            if (!(p1_ > n))
                throw DomainError("pareto moment of order " + std::to_string(n) +
                                  " diverges for mu_F = " + std::to_string(p1_));
            return p1_ * std::pow(p2_, n) / (p1_ - n);
        case Kind::Exponential: {
            double acc = 1.0;
            for (int k = 1; k <= n; ++k) acc *= k / p1_;
            return acc;
        }
        case Kind::Gb2: return gb2_.moment(n);
    }
    return 0.0;
}

double FirmDistribution::upper_quantile(double tail_prob) const {
    if (!(tail_prob > 0.0 && tail_prob < 1.0))
        throw ValidationError("upper_quantile: tail probability must be in (0,1)");
    switch (kind_) {
        case Kind::Pareto: return p2_ * std::pow(tail_prob, -1.0 / p1_);
        case Kind::Exponential: return -std::log(tail_prob) / p1_;
        case Kind::Gb2: {
            // bracket on the survival function, then bisect
            auto survival = [this](double c) {
                QuadOptions q;
                q.rel_tol = 1e-9;
                return integrate_upper([this](double x) { return gb2_.pdf(x); }, c,
                                       std::max(c, gb2_.b), q)
                    .value;
            };
            double lo = gb2_.b, hi = gb2_.b;
            while (survival(hi) > tail_prob) hi *= 4.0;
            while (survival(lo) < tail_prob) lo *= 0.25;
            for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-9; ++it) {
                const double mid = std::sqrt(lo * hi);
                (survival(mid) > tail_prob ? lo : hi) = mid;
            }
            return std::sqrt(lo * hi);
        }
        default: throw DomainError("upper_quantile: continuous kinds only");
    }
}

double FirmDistribution::sample(Rng& rng) const {
    switch (kind_) {
        case Kind::Pareto: return rng.pareto(p1_, p2_);
        case Kind::Exponential: return rng.exponential(p1_);
        case Kind::Gb2: return gb2_.sample(rng);
        case Kind::DiscreteLevels:
        case Kind::EmpiricalSample:
        case Kind::UniformGrid: {
            const long m = atom_count();
            const long i = std::min<long>(m - 1, static_cast<long>(rng.uniform() * m));
            return atom_value(i);
        }
    }
    return 0.0;
}

} // namespace prodisp
