#ifndef PRODISP_FITTING_HPP
#define PRODISP_FITTING_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "prodisp/errors.hpp"
#include "prodisp/gb2.hpp"

namespace prodisp {

struct RankPoint {
    double c = 0.0;
    double cumulative = 0.0; // rank / N, the empirical survival at c
};

// rank-size construction of the survival function: point i (1-based rank
// in descending order) maps to (c_(i), i/N)
std::vector<RankPoint> rank_size(std::vector<double> samples);
std::vector<RankPoint> rank_size_weighted(std::vector<double> values,
                                          std::vector<double> weights);

struct ParetoFit {
    double mu_hat = 0.0;
    double c0_hat = 0.0;
    double fit_lo = 0.0;
    double fit_hi = 0.0;
    double std_error = 0.0;
    long n_tail = 0;
    std::string method; // "hill" | "gb2-tail"
};

// mu_hat = k / sum_{i<=k} ln(c_(i)/c_(k+1)), k = ceil(tail_fraction N)
ParetoFit hill_estimator(const std::vector<double>& samples, double tail_fraction,
                         long n_floor = 30);
// weighted variant: the tail is the smallest atom set holding at least
// tail_fraction of the total weight; std error uses the effective tail size
ParetoFit hill_weighted(const std::vector<double>& values, const std::vector<double>& weights,
                        double tail_fraction, long n_floor = 30);
// windowed form on tabulated data: mu = sum w / sum w ln(v/lo), lo < v <= hi
double hill_window_weighted(const std::vector<double>& values,
                            const std::vector<double>& weights, double lo, double hi);

// weighted Hill over the atoms above a caller-fixed threshold; the std
// error uses the effective tail size (sum w)^2 / sum w^2
ParetoFit hill_weighted_threshold(const std::vector<double>& values,
                                  const std::vector<double>& weights, double threshold,
                                  long n_floor = 30);

struct Gb2StartOutcome {
    GB2Params start;
    GB2Params found;
    double log_likelihood = 0.0; // mean per observation
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> ll_trace; // per accepted step, nondecreasing
};

struct Gb2Fit {
    GB2Params params;
    double log_likelihood = 0.0; // mean per observation
    double grad_norm = 0.0;
    bool converged = false;
    int winning_start = -1;
    std::vector<Gb2StartOutcome> starts;
    // observed-information standard errors of (ln a, ln b, ln p, ln q)
    std::array<double, 4> log_param_std_error{};
    double tail_index_std_error = 0.0; // delta-method on a*q
    double sample_max = 0.0;
};

// thrown when no start reaches the gradient tolerance; carries the best
// point found (e.g. pareto-like data, whose likelihood supremum sits on
// the a -> infinity boundary of the family)
struct Gb2Error : ConvergenceError {
    Gb2Error(const std::string& what, double achieved, Gb2StartOutcome best_found)
        : ConvergenceError(what, achieved), best(std::move(best_found)) {}
    Gb2StartOutcome best;
};

// maximum likelihood on log-parameters, BFGS with Armijo backtracking,
// 8 deterministic moment-matched starts (plus the optional init)
Gb2Fit gb2_mle(const std::vector<double>& samples,
               const std::optional<GB2Params>& init = std::nullopt);

// upper-tail index a*q of the fitted survival, as a ParetoFit
ParetoFit pareto_index_from_gb2(const GB2Params& params, double sample_max = 0.0,
                                double std_error = 0.0);
ParetoFit pareto_index_from_gb2(const Gb2Fit& fit);

// lower cutoff minimizing the Kolmogorov-Smirnov distance between the
// empirical tail and the Hill-fitted pareto, scanned over a deterministic
// grid of candidate tail sizes
struct FitRange {
    double fit_lo = 0.0;
    double fit_hi = 0.0;
    double ks_distance = 0.0;
    long n_tail = 0;
};
FitRange select_fit_range(const std::vector<double>& samples, long n_floor = 30);

} // namespace prodisp

#endif
