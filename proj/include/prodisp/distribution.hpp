#ifndef PRODISP_DISTRIBUTION_HPP
#define PRODISP_DISTRIBUTION_HPP

#include <string>
#include <vector>

#include "prodisp/gb2.hpp"
#include "prodisp/rng.hpp"

namespace prodisp {

// Productivity distribution across firms. Productivities are in units of
// 10^6 yen/person throughout.
//
// Discrete kinds (discrete-levels, uniform-grid) follow the level-sum
// convention: the partition function is a plain sum over levels, so
// Z(0) = K. Continuous kinds and empirical samples are normalized, so
// Z(0) = 1.
class FirmDistribution {
  public:
    enum class Kind { DiscreteLevels, UniformGrid, Pareto, Exponential, Gb2, EmpiricalSample };

    static FirmDistribution discrete_levels(std::vector<double> levels);
    static FirmDistribution uniform_grid(double delta_c, long count);
    static FirmDistribution pareto(double mu, double c0);
    static FirmDistribution exponential(double lambda);
    static FirmDistribution gb2(const GB2Params& params);
    static FirmDistribution empirical(std::vector<double> sample);

    Kind kind() const { return kind_; }
    const char* kind_name() const;
    bool is_discrete() const {
        return kind_ == Kind::DiscreteLevels || kind_ == Kind::UniformGrid ||
               kind_ == Kind::EmpiricalSample;
    }

    // atoms of a discrete kind: level (or sample value) and its weight
    // (1 for levels, 1/N for empirical)
    long atom_count() const;
    double atom_value(long i) const;
    double atom_weight() const;

    double support_lower_bound() const;
    // density of a continuous kind
    double density(double c) const;
    // <c^n>_0; throws DomainError when divergent
    double unweighted_moment(int n) const;
    double mean() const { return unweighted_moment(1); }
    bool has_finite_moment(int n) const;

    // c with P_>(c) = tail_prob, for grid construction; continuous kinds only
    double upper_quantile(double tail_prob) const;

    double sample(Rng& rng) const;

    // accessors for kind-specific parameters
    double pareto_mu() const { return p1_; }
    double pareto_c0() const { return p2_; }
    double exponential_rate() const { return p1_; }
    double grid_spacing() const { return p1_; }
    long grid_count() const { return n_; }
    const GB2Params& gb2_params() const { return gb2_; }
    const std::vector<double>& values() const { return values_; }

  private:
    FirmDistribution() = default;

    Kind kind_ = Kind::Pareto;
    double p1_ = 0.0; // mu | lambda | delta_c
    double p2_ = 0.0; // c0
    long n_ = 0;      // grid count
    GB2Params gb2_;
    std::vector<double> values_; // levels or sorted empirical sample
};

} // namespace prodisp

#endif
